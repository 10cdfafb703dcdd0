#include "wsdep/covariance.h"

#include <cmath>
#include <string>

#include "wsdep/error.h"

namespace wsdep {

CovarianceMatrix::CovarianceMatrix(Eigen::MatrixXd values)
    : values_(std::move(values)) {
  if (values_.rows() != values_.cols()) {
    throw DimensionMismatchError("covariance matrix must be square");
  }
  if (!values_.allFinite()) {
    throw ValidationError("covariance matrix has non-finite entries");
  }
  const double asym = (values_ - values_.transpose()).cwiseAbs().maxCoeff();
  if (values_.size() > 0 && asym > 1e-12) {
    throw ValidationError("covariance matrix is not symmetric (max |A - A^T| = " +
                          std::to_string(asym) + ")");
  }
  values_ = 0.5 * (values_ + values_.transpose()).eval();
}

EmpiricalCovariance ComputeEmpiricalCovariance(const LabelMatrix& labels) {
  if (labels.n() < 2) {
    throw InsufficientSamplesError("empirical covariance needs n >= 2, got " +
                                   std::to_string(labels.n()));
  }
  const int m = labels.m();
  const double n = labels.n();
  // Accumulate in integers: entries of L L^T are exact counts.
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(m);
  std::vector<long long> acc(static_cast<std::size_t>(m) * m, 0);
  std::vector<long long> col_sum(m, 0);
  for (int j = 0; j < labels.n(); ++j) {
    const auto col = labels.Column(j);
    for (int a = 0; a < m; ++a) {
      col_sum[a] += col[a];
      long long* row = acc.data() + static_cast<std::size_t>(a) * m;
      for (int b = a; b < m; ++b) row[b] += col[a] * col[b];
    }
  }
  for (int a = 0; a < m; ++a) {
    sum(a) = static_cast<double>(col_sum[a]);
    for (int b = a; b < m; ++b) {
      gram(a, b) = gram(b, a) =
          static_cast<double>(acc[static_cast<std::size_t>(a) * m + b]);
    }
  }
  EmpiricalCovariance out;
  out.mean = sum / n;
  Eigen::MatrixXd cov = gram / n - out.mean * out.mean.transpose();
  out.covariance = CovarianceMatrix(0.5 * (cov + cov.transpose()));
  return out;
}

double SpectralNorm(const Eigen::MatrixXd& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetric,
                                                     Eigen::EigenvaluesOnly);
  return std::max(std::abs(eig.eigenvalues()(0)),
                  std::abs(eig.eigenvalues()(eig.eigenvalues().size() - 1)));
}

double EffectiveRank(const CovarianceMatrix& a) {
  if (a.m() == 0) throw UndefinedEffectiveRankError("empty matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a.values(),
                                                     Eigen::EigenvaluesOnly);
  Eigen::VectorXd ev = eig.eigenvalues();
  if (ev(0) < kPsdTolerance) {
    throw NotPsdError("matrix is not PSD (smallest eigenvalue " +
                      std::to_string(ev(0)) + ")");
  }
  ev = ev.cwiseMax(0.0);
  const double top = ev(ev.size() - 1);
  if (!(top > 0.0)) {
    throw UndefinedEffectiveRankError("effective rank of the zero matrix");
  }
  return ev.sum() / top;
}

SddShiftResult SddShift(const CovarianceMatrix& a) {
  const Eigen::MatrixXd& v = a.values();
  double deficit = 0.0;
  for (int i = 0; i < a.m(); ++i) {
    const double off = v.row(i).cwiseAbs().sum() - std::abs(v(i, i));
    deficit = std::max(deficit, off - v(i, i));
  }
  SddShiftResult out;
  out.nu = deficit + kSddPad;
  Eigen::MatrixXd shifted = v;
  shifted.diagonal().array() += out.nu;
  out.shifted = CovarianceMatrix(std::move(shifted));
  return out;
}

CovarianceMatrix InvertPsd(const CovarianceMatrix& a, double ridge) {
  if (ridge < 0.0) throw ValidationError("ridge must be non-negative");
  Eigen::MatrixXd shifted = a.values();
  shifted.diagonal().array() += ridge;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(shifted);
  const double smallest = a.m() > 0 ? eig.eigenvalues()(0) : 1.0;
  if (!(smallest > 1e-10)) {
    throw SingularMatrixError(
        "matrix is singular after ridge (smallest eigenvalue " +
            std::to_string(smallest) + ")",
        smallest);
  }
  Eigen::MatrixXd inv = eig.eigenvectors() *
                        eig.eigenvalues().cwiseInverse().asDiagonal() *
                        eig.eigenvectors().transpose();
  return CovarianceMatrix(0.5 * (inv + inv.transpose()));
}

}  // namespace wsdep
