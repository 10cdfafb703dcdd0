#ifndef WSDEP_ANALYSIS_H_
#define WSDEP_ANALYSIS_H_

// Executable versions of the identifiability, effective-rank, sample
// complexity and information-theoretic lower bound results. Rate outputs hold
// only up to the unspecified universal constants c1, c2, c4 (default 1).
// Logarithms are natural.

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "wsdep/mrf.h"

namespace wsdep {

struct IdentifiabilityReport {
  int d = 0;
  int m = 0;
  double a_min = 0, a_max = 0, c_min = 0, c_max = 0;
  double mu_bound = 0;       // d
  double xi_bound = 0;       // 6.4/sqrt(m) (c_max/c_min)(a_max/a_min)
  double product_bound = 0;  // mu_bound * xi_bound
  bool identifiable = false; // product_bound < 1
  double m_min = 0;          // 40.96 d^2 [c_max a_max / (c_min a_min)]^2
};

IdentifiabilityReport IdentifiabilityBound(int d, int m, double a_min, double a_max,
                                  double c_min, double c_max);

// Extremes used by the identifiability bound, taken as magnitudes: a from the
// source/label covariances Sigma_OS, c from the off-diagonal of Sigma_O.
struct CovarianceExtremes {
  double a_min = 0, a_max = 0, c_min = 0, c_max = 0;
};
CovarianceExtremes ExtractExtremes(const Eigen::MatrixXd& full_sigma);

// 2 ||z||_inf / ||z||_2, the tangent-space incoherence bound for z z^T.
double XiEstimate(const Eigen::VectorXd& z);

// Largest ||N||_inf over `trials` random N in the tangent space of z z^T with
// ||N|| = 1; a lower estimate of xi.
double XiMonteCarloLower(const Eigen::VectorXd& z, int trials,
                         std::uint64_t seed);

struct MuEstimateResult {
  double upper = 0;              // degree bound max(d, 1)
  double monte_carlo_lower = 0;  // max spectral norm over sampled sign matrices
};

// Sign matrices live on the graph's off-diagonal pattern; a graph without
// edges leaves only the diagonal, whose sign matrices all have norm 1. The
// all-plus pattern is always the first draw.
MuEstimateResult MuEstimate(const SourceGraph& support, int trials,
                            std::uint64_t seed);

// h_X(Y) = (XY + YX)/2.
Eigen::MatrixXd SymmetricProduct(const Eigen::MatrixXd& x,
                                 const Eigen::MatrixXd& y);

// Orthogonal projection onto the tangent space of z z^T.
Eigen::MatrixXd ProjectTangent(const Eigen::MatrixXd& m, const Eigen::VectorXd& z);

// Masks entries outside the diagonal and the graph's edges.
Eigen::MatrixXd ProjectSupport(const Eigen::MatrixXd& m, const SourceGraph& support);

struct TransversalityEstimate {
  double alpha_omega = 0, alpha_t = 0;
  double delta_omega = 0, delta_t = 0;
  double beta_omega = 0, beta_t = 0;
  double alpha = 0, beta = 0, delta = 0;  // min / max / max aggregates
  int trials = 0;
};

// Monte Carlo estimates over `trials` random unit-norm elements of Omega
// (diagonal plus edges) and T (tangent space of z z^T). Samples are drawn
// from a single stream, so a larger trial count extends the smaller one.
TransversalityEstimate EstimateTransversality(const Eigen::MatrixXd& sigma_o,
                                              const SourceGraph& support,
                                              const Eigen::VectorXd& z,
                                              int trials, std::uint64_t seed);

struct ConditionConstants {
  double alpha = 0, beta = 0, delta = 0;
  double nu = 0.25;
  double gamma = 0;  // nu alpha / (2 d beta (2 - nu))
  double psi_1 = 0, psi_m = 0;  // extreme eigenvalues of Sigma_O
  double sigma = 0;             // ||z||^2
  double k_o_min = 0;           // smallest nonzero |K_O| entry
  double c1 = 1, c2 = 1, c4 = 1;
  int d = 0;
};

ConditionConstants MakeConditionConstants(double alpha, double beta,
                                          double delta, double nu, int d,
                                          double psi_1, double psi_m,
                                          double sigma, double k_o_min,
                                          double c1 = 1.0, double c2 = 1.0,
                                          double c4 = 1.0);

double GammaFor(double nu, double alpha, double beta, int d);

// All constants for a full (sources + Y) covariance with the given source
// graph: transversality by Monte Carlo, d = max(MaxDegree, 1), the rest exact.
ConditionConstants ConditionConstantsFor(const Eigen::MatrixXd& full_sigma,
                                         const SourceGraph& support, double nu,
                                         int trials, std::uint64_t seed);

struct SbdLimits {
  double effective_rank_limit = 0;  // m^tau / ((1+tau) log m)
  double cluster_limit = 0;  // m^(tau/(2-tau)) / ((1+tau) log m)^(2/(2-tau))
};
SbdLimits SbdThresholds(int m, double tau);

bool CheckSbd(double r_e, int s, int m, double tau);
bool CheckSsb(double r_e, int d, double c);

enum class RateCondition { kSbd, kSsb };
std::string ToString(RateCondition c);

struct RateEstimate {
  RateCondition condition = RateCondition::kSsb;
  double tau = 1;
  double rho = 0;
  double n_required = 0;
  double lambda_n = 0;  // evaluated at n = n_required
  double success_probability = 0;  // 1 - m^-tau
};

RateEstimate SampleComplexity(RateCondition condition,
                              const ConditionConstants& constants, int d, int m,
                              double tau);

struct LowerBoundReport {
  int m = 0;
  double theta = 0, delta = 0;
  double n_max_unsupervised = 0;
  double n_supervised = 0;
  double n_delta = 0;
  double relative_cost = 0;
  bool degenerate = false;  // m == 2: a single candidate graph
};

LowerBoundReport LowerBound(int m, double theta, double delta);

struct MomentPair {
  double e_st = 0;  // E[l_s l_t] with the edge (s, t) present
  double e_uv = 0;  // E[l_s l_t] when s and t only meet through Y
};

MomentPair MomentFormulas(double theta);

// 1 - 4 / (e^{4 theta} + 3) - tanh^2(theta), evaluated without cancellation.
double LatentSeparation(double theta);

}  // namespace wsdep

#endif  // WSDEP_ANALYSIS_H_
