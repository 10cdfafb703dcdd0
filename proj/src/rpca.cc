#include "wsdep/rpca.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "wsdep/error.h"

namespace wsdep {

namespace {

void CheckConformable(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw DimensionMismatchError("matrices must be square and of equal size");
  }
}

double SmoothPart(const Eigen::MatrixXd& m, const Eigen::MatrixXd& sigma) {
  return 0.5 * (m.transpose() * sigma * m).trace() - m.trace();
}

// Raises the spectrum of S - L to at least `floor`, charging the change to S.
void EnforcePdFloor(Eigen::MatrixXd& s, const Eigen::MatrixXd& l,
                    double floor) {
  const Eigen::MatrixXd m = s - l;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.eigenvalues()(0) >= floor) return;
  const Eigen::VectorXd lift =
      (eig.eigenvalues().array().max(floor) - eig.eigenvalues().array())
          .matrix();
  Eigen::MatrixXd correction =
      eig.eigenvectors() * lift.asDiagonal() * eig.eigenvectors().transpose();
  s += 0.5 * (correction + correction.transpose());
}

}  // namespace

void SolverConfig::Validate() const {
  if (!(lambda_n > 0.0)) throw ValidationError("lambda_n must be positive");
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  if (max_iters < 1) throw ValidationError("max_iters must be at least 1");
  if (!(tol > 0.0)) throw ValidationError("tol must be positive");
  if (!(pd_floor > 0.0)) throw ValidationError("pd_floor must be positive");
  if (step.eta < 0.0) throw ValidationError("step size must be non-negative");
  if (!(step.shrink > 0.0 && step.shrink < 1.0)) {
    throw ValidationError("backtracking shrink factor must lie in (0, 1)");
  }
}

double Loss(const Eigen::MatrixXd& s, const Eigen::MatrixXd& l,
            const Eigen::MatrixXd& sigma) {
  CheckConformable(s, l);
  CheckConformable(s, sigma);
  return SmoothPart(s - l, sigma);
}

Eigen::MatrixXd LossGradient(const Eigen::MatrixXd& m,
                             const Eigen::MatrixXd& sigma) {
  CheckConformable(m, sigma);
  Eigen::MatrixXd g = 0.5 * (sigma * m + m * sigma);
  g.diagonal().array() -= 1.0;
  return g;
}

double Objective(const Eigen::MatrixXd& s, const Eigen::MatrixXd& l,
                 const Eigen::MatrixXd& sigma, const SolverConfig& config) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(l, Eigen::EigenvaluesOnly);
  const double nuclear = eig.eigenvalues().cwiseAbs().sum();
  return Loss(s, l, sigma) +
         config.lambda_n * (config.gamma * s.cwiseAbs().sum() + nuclear);
}

Eigen::MatrixXd ProxL1(const Eigen::MatrixXd& x, double t) {
  if (t < 0.0) throw ValidationError("prox threshold must be non-negative");
  return x.unaryExpr([t](double v) {
    const double mag = std::abs(v) - t;
    return mag > 0.0 ? std::copysign(mag, v) : 0.0;
  });
}

Eigen::MatrixXd ProxNuclearPsd(const Eigen::MatrixXd& x, double t) {
  if (t < 0.0) throw ValidationError("prox threshold must be non-negative");
  if (x.size() == 0) return x;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (x + x.transpose()));
  const Eigen::VectorXd shrunk = (eig.eigenvalues().array() - t).max(0.0).matrix();
  Eigen::MatrixXd out =
      eig.eigenvectors() * shrunk.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

double KktResidual(const Eigen::MatrixXd& s, const Eigen::MatrixXd& l,
                   const Eigen::MatrixXd& sigma, const SolverConfig& config) {
  CheckConformable(s, l);
  CheckConformable(s, sigma);
  const int m = static_cast<int>(s.rows());
  const Eigen::MatrixXd g = LossGradient(s - l, sigma);
  const double weight = config.lambda_n * config.gamma;

  // -g must lie in weight * d||S||_1.
  double sparse_part = 0.0;
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      const double r = s(i, j) != 0.0
                           ? std::abs(g(i, j) + weight * (s(i, j) > 0 ? 1 : -1))
                           : std::max(0.0, std::abs(g(i, j)) - weight);
      sparse_part = std::max(sparse_part, r);
    }
  }

  // lambda I - g must lie in the normal cone {P >= 0, P L = 0}.
  Eigen::MatrixXd w = -g;
  w.diagonal().array() += config.lambda_n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_l(0.5 * (l + l.transpose()));
  const double scale = std::max(1.0, eig_l.eigenvalues().cwiseAbs().maxCoeff());
  std::vector<int> null_idx;
  for (int k = 0; k < m; ++k) {
    if (eig_l.eigenvalues()(k) <= 1e-9 * scale) null_idx.push_back(k);
  }
  Eigen::MatrixXd null_basis(m, static_cast<int>(null_idx.size()));
  for (std::size_t k = 0; k < null_idx.size(); ++k) {
    null_basis.col(static_cast<int>(k)) = eig_l.eigenvectors().col(null_idx[k]);
  }
  Eigen::MatrixXd projected = Eigen::MatrixXd::Zero(m, m);
  if (!null_idx.empty()) {
    Eigen::MatrixXd inner = null_basis.transpose() * w * null_basis;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_w(0.5 * (inner + inner.transpose()));
    const Eigen::VectorXd pos = eig_w.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXd q = null_basis * eig_w.eigenvectors();
    projected = q * pos.asDiagonal() * q.transpose();
  }
  const double low_rank_part = SpectralNorm(w - projected);
  return std::max(sparse_part, low_rank_part);
}

namespace {

// One forward-backward step from (s, l). With backtracking the step shrinks
// until the quadratic model bounds the smooth part; returns false when no
// admissible step remains at machine precision.
bool ProximalStep(const Eigen::MatrixXd& s, const Eigen::MatrixXd& l,
                  const Eigen::MatrixXd& sigma, const SolverConfig& config,
                  bool backtracking, double eta0, double& step,
                  Eigen::MatrixXd& s_next, Eigen::MatrixXd& l_next) {
  const Eigen::MatrixXd g = LossGradient(s - l, sigma);
  const double smooth = SmoothPart(s - l, sigma);
  const double l1_weight = config.lambda_n * config.gamma;
  while (true) {
    s_next = ProxL1(s - step * g, step * l1_weight);
    l_next = ProxNuclearPsd(l + step * g, step * config.lambda_n);
    if (!backtracking) return true;
    const Eigen::MatrixXd ds = s_next - s;
    const Eigen::MatrixXd dl = l_next - l;
    const double model = smooth + g.cwiseProduct(ds).sum() -
                         g.cwiseProduct(dl).sum() +
                         (ds.squaredNorm() + dl.squaredNorm()) / (2.0 * step);
    const double smooth_new = SmoothPart(s_next - l_next, sigma);
    if (smooth_new <= model + 1e-12 * (1.0 + std::abs(smooth))) return true;
    step *= config.step.shrink;
    if (step < 1e-20 * eta0) return false;
  }
}

}  // namespace

DecompositionResult Solve(const CovarianceMatrix& sigma_in,
                          const SolverConfig& config) {
  config.Validate();
  const Eigen::MatrixXd& sigma = sigma_in.values();
  const int m = sigma_in.m();
  if (m == 0) throw DimensionMismatchError("empty covariance");

  const double sigma_norm = SpectralNorm(sigma);
  const double eta0 =
      config.step.eta > 0.0 ? config.step.eta
                            : (sigma_norm > 0.0 ? 1.0 / sigma_norm : 1.0);
  const bool backtracking = config.step.kind == StepPolicy::Kind::kBacktracking;

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    const double var = sigma(i, i);
    s(i, i) = (var > 1e-12 ? 1.0 / var : 1.0) + config.pd_floor;
  }
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd s_prev = s, l_prev = l;

  DecompositionResult result;
  double objective = Objective(s, l, sigma, config);
  result.objective_trace.push_back(objective);
  double step = eta0;
  double momentum_t = 1.0;  // Nesterov sequence; backtracking mode only
  int consecutive_increases = 0;
  double kkt = KktResidual(s, l, sigma, config);

  for (int iter = 1; iter <= config.max_iters && kkt >= config.tol; ++iter) {
    Eigen::MatrixXd s_next, l_next;
    double objective_next = 0.0;
    bool accepted = false;
    // With backtracking, first try a step from the extrapolated point; if it
    // fails to descend, restart the momentum and step from the iterate.
    for (int attempt = backtracking ? 0 : 1; attempt < 2 && !accepted; ++attempt) {
      Eigen::MatrixXd s_base = s, l_base = l;
      double t_next = 1.0;
      if (attempt == 0) {
        t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum_t * momentum_t));
        const double beta = (momentum_t - 1.0) / t_next;
        s_base += beta * (s - s_prev);
        l_base = ProxNuclearPsd(l + beta * (l - l_prev), 0.0);
      }
      if (!ProximalStep(s_base, l_base, sigma, config, backtracking, eta0,
                        step, s_next, l_next)) {
        continue;
      }
      EnforcePdFloor(s_next, l_next, config.pd_floor);
      objective_next = Objective(s_next, l_next, sigma, config);
      if (!std::isfinite(objective_next) || !s_next.allFinite() ||
          !l_next.allFinite()) {
        throw NumericalFailureError("non-finite iterate at iteration " +
                                    std::to_string(iter));
      }
      if (backtracking && objective_next > objective + 1e-10) continue;
      accepted = true;
      momentum_t = t_next;
    }
    if (!accepted) {
      if (backtracking && momentum_t != 1.0) {
        momentum_t = 1.0;  // retry once more without momentum history
        s_prev = s;
        l_prev = l;
        continue;
      }
      break;  // no descent step exists at machine precision
    }

    if (!backtracking) {
      consecutive_increases =
          objective_next > objective + 1e-9 ? consecutive_increases + 1 : 0;
      if (consecutive_increases >= 10) {
        throw DivergenceError(
            "objective increased for 10 consecutive iterations; use a smaller "
            "step");
      }
    }
    // A fixed point other than an optimum arises when the PD floor binds:
    // nothing further can change, so stop instead of spinning to max_iters.
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    const bool stalled =
        std::max((s_next - s).cwiseAbs().maxCoeff(),
                 (l_next - l).cwiseAbs().maxCoeff()) <= 1e-14 * scale;
    s_prev = std::move(s);
    l_prev = std::move(l);
    s = std::move(s_next);
    l = std::move(l_next);
    objective = objective_next;
    result.objective_trace.push_back(objective);
    result.iterations = iter;
    kkt = KktResidual(s, l, sigma, config);
    if (stalled) break;
  }

  result.s_hat = 0.5 * (s + s.transpose());
  result.l_hat = 0.5 * (l + l.transpose());
  result.final_kkt_residual = kkt;
  result.converged = kkt < config.tol;
  return result;
}

}  // namespace wsdep
