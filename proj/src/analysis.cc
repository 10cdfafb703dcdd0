#include "wsdep/analysis.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "wsdep/covariance.h"
#include "wsdep/error.h"

namespace wsdep {

namespace {

double MaxAbs(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double OpNorm(const Eigen::MatrixXd& m) {
  return SpectralNorm(0.5 * (m + m.transpose()));
}

Eigen::VectorXd Normalized(const Eigen::VectorXd& z) {
  const double norm = z.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw ValidationError("z must be a finite nonzero vector");
  }
  return z / norm;
}

Eigen::VectorXd GaussianVector(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd x(m);
  for (int i = 0; i < m; ++i) x(i) = normal(rng);
  return x;
}

// Symmetric Gaussian matrix on the diagonal and the graph's edges.
Eigen::MatrixXd GaussianOnSupport(const SourceGraph& support,
                                  std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const int m = support.m();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) out(i, i) = normal(rng);
  for (const auto& [i, j] : support.edges()) {
    out(i, j) = out(j, i) = normal(rng);
  }
  return out;
}

void CheckPositive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ValidationError(std::string(name) + " must be positive and finite");
  }
}

}  // namespace

IdentifiabilityReport IdentifiabilityBound(int d, int m, double a_min, double a_max,
                                  double c_min, double c_max) {
  if (d < 1) throw ValidationError("d must be at least 1");
  if (m < 2) throw ValidationError("m must be at least 2");
  CheckPositive(a_min, "a_min");
  CheckPositive(a_max, "a_max");
  CheckPositive(c_min, "c_min");
  CheckPositive(c_max, "c_max");
  if (a_min > a_max || c_min > c_max) {
    throw ValidationError("extremes must satisfy min <= max");
  }
  IdentifiabilityReport r;
  r.d = d;
  r.m = m;
  r.a_min = a_min;
  r.a_max = a_max;
  r.c_min = c_min;
  r.c_max = c_max;
  const double ratio = (c_max / c_min) * (a_max / a_min);
  r.mu_bound = d;
  r.xi_bound = 6.4 / std::sqrt(static_cast<double>(m)) * ratio;
  r.product_bound = r.mu_bound * r.xi_bound;
  r.identifiable = r.product_bound < 1.0;
  r.m_min = 40.96 * d * d * ratio * ratio;
  return r;
}

CovarianceExtremes ExtractExtremes(const Eigen::MatrixXd& full_sigma) {
  const int m = static_cast<int>(full_sigma.rows()) - 1;
  if (m < 2 || full_sigma.cols() != m + 1) {
    throw DimensionMismatchError(
        "need a square covariance over at least two sources and Y");
  }
  CovarianceExtremes e;
  e.a_min = e.c_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    const double a = std::abs(full_sigma(i, m));
    e.a_min = std::min(e.a_min, a);
    e.a_max = std::max(e.a_max, a);
    for (int j = i + 1; j < m; ++j) {
      const double c = std::abs(full_sigma(i, j));
      e.c_min = std::min(e.c_min, c);
      e.c_max = std::max(e.c_max, c);
    }
  }
  return e;
}

double XiEstimate(const Eigen::VectorXd& z) {
  return 2.0 * Normalized(z).cwiseAbs().maxCoeff();
}

double XiMonteCarloLower(const Eigen::VectorXd& z, int trials,
                         std::uint64_t seed) {
  if (trials < 1) throw ValidationError("trials must be at least 1");
  const Eigen::VectorXd zb = Normalized(z);
  std::mt19937_64 rng(seed);
  double best = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Eigen::VectorXd x = GaussianVector(static_cast<int>(z.size()), rng);
    const Eigen::MatrixXd n = zb * x.transpose() + x * zb.transpose();
    const double norm = OpNorm(n);
    if (norm > 0.0) best = std::max(best, MaxAbs(n) / norm);
  }
  return best;
}

MuEstimateResult MuEstimate(const SourceGraph& support, int trials,
                            std::uint64_t seed) {
  if (trials < 1) throw ValidationError("trials must be at least 1");
  MuEstimateResult r;
  r.upper = std::max(1, support.MaxDegree());
  if (support.num_edges() == 0) {
    r.monte_carlo_lower = 1.0;
    return r;
  }
  const int m = support.m();
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  for (int t = 0; t < trials; ++t) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m, m);
    for (const auto& [i, j] : support.edges()) {
      const double v = (t == 0 || coin(rng)) ? 1.0 : -1.0;
      s(i, j) = s(j, i) = v;
    }
    r.monte_carlo_lower = std::max(r.monte_carlo_lower, SpectralNorm(s));
  }
  return r;
}

Eigen::MatrixXd SymmetricProduct(const Eigen::MatrixXd& x,
                                 const Eigen::MatrixXd& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw DimensionMismatchError("h_X(Y) needs equally sized operands");
  }
  return 0.5 * (x * y + y * x);
}

Eigen::MatrixXd ProjectTangent(const Eigen::MatrixXd& m,
                               const Eigen::VectorXd& z) {
  const Eigen::VectorXd zb = Normalized(z);
  const Eigen::MatrixXd p = zb * zb.transpose();
  return p * m + m * p - p * m * p;
}

Eigen::MatrixXd ProjectSupport(const Eigen::MatrixXd& m,
                               const SourceGraph& support) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  out.diagonal() = m.diagonal();
  for (const auto& [i, j] : support.edges()) {
    out(i, j) = m(i, j);
    out(j, i) = m(j, i);
  }
  return out;
}

TransversalityEstimate EstimateTransversality(const Eigen::MatrixXd& sigma_o,
                                              const SourceGraph& support,
                                              const Eigen::VectorXd& z,
                                              int trials, std::uint64_t seed) {
  if (trials < 1) throw ValidationError("trials must be at least 1");
  const int m = support.m();
  if (sigma_o.rows() != m || sigma_o.cols() != m || z.size() != m) {
    throw DimensionMismatchError("covariance, support and z disagree on m");
  }
  const Eigen::VectorXd zb = Normalized(z);
  const double inf = std::numeric_limits<double>::infinity();

  TransversalityEstimate r;
  r.trials = trials;
  r.alpha_omega = r.alpha_t = inf;
  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    const Eigen::MatrixXd omega = GaussianOnSupport(support, rng);
    const Eigen::VectorXd x = GaussianVector(m, rng);
    const Eigen::MatrixXd tangent = zb * x.transpose() + x * zb.transpose();

    // Omega direction, unit entrywise max norm.
    const double omega_inf = MaxAbs(omega);
    if (omega_inf > 0.0) {
      const Eigen::MatrixXd h = SymmetricProduct(sigma_o, omega / omega_inf);
      const Eigen::MatrixXd on = ProjectSupport(h, support);
      r.alpha_omega = std::min(r.alpha_omega, MaxAbs(on));
      r.delta_omega = std::max(r.delta_omega, MaxAbs(h - on));
    }
    const double omega_op = OpNorm(omega);
    if (omega_op > 0.0) {
      r.beta_omega = std::max(
          r.beta_omega, OpNorm(SymmetricProduct(sigma_o, omega / omega_op)));
    }

    // Tangent direction, unit spectral norm.
    const double tangent_op = OpNorm(tangent);
    if (tangent_op > 0.0) {
      const Eigen::MatrixXd h = SymmetricProduct(sigma_o, tangent / tangent_op);
      const Eigen::MatrixXd on = ProjectTangent(h, zb);
      r.alpha_t = std::min(r.alpha_t, OpNorm(on));
      r.delta_t = std::max(r.delta_t, OpNorm(h - on));
    }
    const double tangent_inf = MaxAbs(tangent);
    if (tangent_inf > 0.0) {
      r.beta_t = std::max(
          r.beta_t, MaxAbs(SymmetricProduct(sigma_o, tangent / tangent_inf)));
    }
  }
  if (!std::isfinite(r.alpha_omega)) r.alpha_omega = 0.0;
  if (!std::isfinite(r.alpha_t)) r.alpha_t = 0.0;
  r.alpha = std::min(r.alpha_omega, r.alpha_t);
  r.beta = std::max(r.beta_omega, r.beta_t);
  r.delta = std::max(r.delta_omega, r.delta_t);
  return r;
}

double GammaFor(double nu, double alpha, double beta, int d) {
  return nu * alpha / (2.0 * d * beta * (2.0 - nu));
}

ConditionConstants MakeConditionConstants(double alpha, double beta,
                                          double delta, double nu, int d,
                                          double psi_1, double psi_m,
                                          double sigma, double k_o_min,
                                          double c1, double c2, double c4) {
  if (!(nu > 0.0 && nu < 0.5)) throw ValidationError("nu must lie in (0, 1/2)");
  if (d < 1) throw ValidationError("d must be at least 1");
  CheckPositive(alpha, "alpha");
  CheckPositive(beta, "beta");
  if (!(delta >= 0.0)) throw ValidationError("delta must be non-negative");
  CheckPositive(psi_m, "psi_m");
  if (psi_1 < psi_m) throw ValidationError("psi_1 must be at least psi_m");
  CheckPositive(sigma, "sigma");
  CheckPositive(k_o_min, "k_o_min");
  CheckPositive(c1, "c1");
  CheckPositive(c2, "c2");
  CheckPositive(c4, "c4");
  ConditionConstants c;
  c.alpha = alpha;
  c.beta = beta;
  c.delta = delta;
  c.nu = nu;
  c.d = d;
  c.gamma = GammaFor(nu, alpha, beta, d);
  c.psi_1 = psi_1;
  c.psi_m = psi_m;
  c.sigma = sigma;
  c.k_o_min = k_o_min;
  c.c1 = c1;
  c.c2 = c2;
  c.c4 = c4;
  return c;
}

ConditionConstants ConditionConstantsFor(const Eigen::MatrixXd& full_sigma,
                                         const SourceGraph& support, double nu,
                                         int trials, std::uint64_t seed) {
  const int m = support.m();
  if (full_sigma.rows() != m + 1 || full_sigma.cols() != m + 1) {
    throw DimensionMismatchError("covariance must cover the sources and Y");
  }
  const BlockDecomposition block = GroundTruthDecomposition(full_sigma);
  const Eigen::MatrixXd sigma_o = full_sigma.topLeftCorner(m, m);
  const auto t = EstimateTransversality(sigma_o, support, block.z, trials, seed);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma_o,
                                                     Eigen::EigenvaluesOnly);
  double k_min = std::numeric_limits<double>::infinity();
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      const double v = std::abs(block.k_o(i, j));
      if (v > 1e-8) k_min = std::min(k_min, v);
    }
  }
  return MakeConditionConstants(t.alpha, t.beta, t.delta, nu,
                                std::max(1, support.MaxDegree()),
                                eig.eigenvalues()(m - 1), eig.eigenvalues()(0),
                                block.z.squaredNorm(), k_min);
}

SbdLimits SbdThresholds(int m, double tau) {
  if (m <= 1) throw ValidationError("the SBD condition needs m >= 2");
  if (!(tau > 0.0 && tau <= 1.0)) throw ValidationError("tau must lie in (0, 1]");
  const double log_m = std::log(static_cast<double>(m));
  SbdLimits l;
  l.effective_rank_limit = std::pow(m, tau) / ((1.0 + tau) * log_m);
  l.cluster_limit = std::pow(m, tau / (2.0 - tau)) /
                    std::pow((1.0 + tau) * log_m, 2.0 / (2.0 - tau));
  return l;
}

bool CheckSbd(double r_e, int s, int m, double tau) {
  const SbdLimits l = SbdThresholds(m, tau);
  return r_e <= l.effective_rank_limit && s <= l.cluster_limit;
}

bool CheckSsb(double r_e, int d, double c) {
  if (d < 1) throw ValidationError("d must be at least 1");
  CheckPositive(c, "c");
  return r_e <= c * d;
}

std::string ToString(RateCondition c) {
  return c == RateCondition::kSbd ? "SBD" : "SSB";
}

RateEstimate SampleComplexity(RateCondition condition,
                              const ConditionConstants& k, int d, int m,
                              double tau) {
  if (!(k.nu > 0.0 && k.nu < 0.5)) throw ValidationError("nu must lie in (0, 1/2)");
  if (d < 1) throw ValidationError("d must be at least 1");
  if (m <= 1) throw ValidationError("m must be at least 2");
  if (!(tau > 0.0 && tau <= 1.0)) throw ValidationError("tau must lie in (0, 1]");
  for (double v : {k.alpha, k.beta, k.gamma, k.psi_1, k.psi_m, k.sigma,
                   k.k_o_min, k.c1, k.c2, k.c4}) {
    CheckPositive(v, "condition constant");
  }
  const double nu = k.nu;
  const double core = 6.0 * k.c2 * k.beta * (3.0 - 2.0 * nu) * (2.0 - nu) *
                      k.psi_1 / (nu * k.alpha * k.alpha * k.psi_m) *
                      std::max({k.gamma / k.k_o_min, 1.0 / k.sigma,
                                1.0 / k.psi_m});
  const double lead = std::max(1.0, 1.0 / k.gamma) * (3.0 - 2.0 * nu);
  const double m_tau = std::pow(static_cast<double>(m), tau);
  const double log_m = std::log(static_cast<double>(m));

  RateEstimate r;
  r.condition = condition;
  r.tau = tau;
  r.success_probability = 1.0 - 1.0 / m_tau;
  if (condition == RateCondition::kSbd) {
    r.rho = core * core;
    r.n_required = r.rho * d * d * m_tau;
    r.lambda_n = lead * k.c1 * k.psi_1 * std::sqrt(m_tau) /
                 (k.psi_m * std::sqrt(r.n_required));
  } else {
    r.rho = core * k.c4;
    r.n_required = r.rho * (1.0 + tau) * d * d * log_m;
    r.lambda_n = lead * k.c4 * k.c2 * k.psi_1 * d * (1.0 + tau) * log_m /
                 (k.psi_m * r.n_required);
  }
  return r;
}

double LatentSeparation(double theta) {
  if (std::abs(theta) > 1.0) {
    // Both moments approach 1; subtract their distances from 1 instead.
    const double sech = 1.0 / std::cosh(theta);
    return sech * sech - 4.0 / (std::exp(4.0 * theta) + 3.0);
  }
  const MomentPair p = MomentFormulas(theta);
  return p.e_st - p.e_uv;
}

MomentPair MomentFormulas(double theta) {
  if (!std::isfinite(theta)) throw ValidationError("theta must be finite");
  MomentPair p;
  // (e^{3t} - e^{-t}) / (e^{3t} + 3 e^{-t}) = expm1(4t) / (expm1(4t) + 4).
  const double e = std::expm1(4.0 * theta);
  p.e_st = std::isinf(e) ? 1.0 : e / (e + 4.0);
  const double t = std::tanh(theta);
  p.e_uv = t * t;
  return p;
}

LowerBoundReport LowerBound(int m, double theta, double delta) {
  if (m < 2) throw ValidationError("the lower bound needs m >= 2");
  if (theta == 0.0) {
    throw ValidationError("theta = 0 makes the bound divide by zero");
  }
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw ValidationError("theta must be positive and finite");
  }
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  LowerBoundReport r;
  r.m = m;
  r.theta = theta;
  r.delta = delta;
  if (m == 2) {
    r.degenerate = true;
    return r;
  }
  const double log_graphs = std::log(m * (m - 1) / 2.0);
  const double separation = LatentSeparation(theta);
  if (!(separation > 0.0)) {
    throw NumericalFailureError("moment separation underflowed at this theta");
  }
  r.n_max_unsupervised = (1.0 - delta) * log_graphs / (2.0 * theta * separation);
  r.n_supervised = (1.0 - delta) * log_graphs / (2.0 * theta * std::tanh(theta));
  r.n_delta = r.n_max_unsupervised - r.n_supervised;
  r.relative_cost = std::tanh(theta) / separation;
  return r;
}

}  // namespace wsdep
