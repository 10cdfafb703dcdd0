#ifndef WSDEP_RPCA_H_
#define WSDEP_RPCA_H_

// Sparse plus low-rank decomposition of an inverse covariance:
//
//   minimize   1/2 tr(M Sigma M) - tr(M) + lambda_n (gamma ||S||_1 + ||L||_*)
//   subject to M = S - L >= pd_floor I,  L >= 0.
//
// Solved by forward-backward splitting on the pair (S, L): a gradient step on
// the smooth quadratic in M, then the l1 prox on S and the PSD-restricted
// nuclear prox on L.

#include <vector>

#include <Eigen/Dense>

#include "wsdep/covariance.h"

namespace wsdep {

struct StepPolicy {
  enum class Kind { kFixed, kBacktracking };
  Kind kind = Kind::kBacktracking;
  // Fixed step, or the initial step for backtracking. 0 selects 1/||Sigma||.
  double eta = 0.0;
  double shrink = 0.5;  // backtracking factor
};

struct SolverConfig {
  double lambda_n = 0.01;
  double gamma = 1.0;
  int max_iters = 5000;
  double tol = 1e-6;  // KKT residual stopping threshold
  StepPolicy step;
  double pd_floor = 1e-6;

  void Validate() const;
};

struct DecompositionResult {
  Eigen::MatrixXd s_hat;
  Eigen::MatrixXd l_hat;
  std::vector<double> objective_trace;  // entry 0 is the initial point
  int iterations = 0;
  bool converged = false;
  double final_kkt_residual = 0.0;
};

// 1/2 tr((S - L) Sigma (S - L)) - tr(S - L).
double Loss(const Eigen::MatrixXd& s, const Eigen::MatrixXd& l,
            const Eigen::MatrixXd& sigma);

// Gradient of the loss with respect to M = S - L: (Sigma M + M Sigma)/2 - I.
Eigen::MatrixXd LossGradient(const Eigen::MatrixXd& m,
                             const Eigen::MatrixXd& sigma);

// Loss plus lambda_n (gamma ||S||_1 + ||L||_*).
double Objective(const Eigen::MatrixXd& s, const Eigen::MatrixXd& l,
                 const Eigen::MatrixXd& sigma, const SolverConfig& config);

// Entrywise soft threshold, diagonal included.
Eigen::MatrixXd ProxL1(const Eigen::MatrixXd& x, double t);

// Q max(Lambda - t, 0) Q^T: nuclear-norm prox restricted to the PSD cone.
Eigen::MatrixXd ProxNuclearPsd(const Eigen::MatrixXd& x, double t);

// Largest violation of the optimality conditions for S (entrywise) and for
// L (spectral); zero at an optimum of the unconstrained-in-M problem.
double KktResidual(const Eigen::MatrixXd& s, const Eigen::MatrixXd& l,
                   const Eigen::MatrixXd& sigma, const SolverConfig& config);

DecompositionResult Solve(const CovarianceMatrix& sigma,
                          const SolverConfig& config);

}  // namespace wsdep

#endif  // WSDEP_RPCA_H_
