#ifndef WSDEP_COVARIANCE_H_
#define WSDEP_COVARIANCE_H_

#include <Eigen/Dense>

#include "wsdep/mrf.h"

namespace wsdep {

// Symmetric, finite m x m matrix.
class CovarianceMatrix {
 public:
  CovarianceMatrix() = default;
  // Throws ValidationError unless `values` is square, finite and symmetric
  // within 1e-12. The stored matrix is exactly symmetrized.
  explicit CovarianceMatrix(Eigen::MatrixXd values);

  int m() const { return static_cast<int>(values_.rows()); }
  const Eigen::MatrixXd& values() const { return values_; }
  double operator()(int i, int j) const { return values_(i, j); }

 private:
  Eigen::MatrixXd values_;
};

struct EmpiricalCovariance {
  CovarianceMatrix covariance;
  Eigen::VectorXd mean;  // per-source mean vote v
};

// (1/n) L L^T - v v^T. Requires n >= 2.
EmpiricalCovariance ComputeEmpiricalCovariance(const LabelMatrix& labels);

// Eigenvalues below zero but above this are treated as rounding noise.
inline constexpr double kPsdTolerance = -1e-10;

// trace(A) / ||A|| for symmetric PSD A.
double EffectiveRank(const CovarianceMatrix& a);

struct SddShiftResult {
  CovarianceMatrix shifted;
  double nu = 0.0;
};

inline constexpr double kSddPad = 1e-9;

// Adds nu I, nu = max(0, max_i(sum_{j!=i} |A_ij| - A_ii)) + kSddPad, making
// the matrix strictly diagonally dominant without touching off-diagonals.
SddShiftResult SddShift(const CovarianceMatrix& a);

// (A + ridge I)^{-1}; throws SingularMatrixError when the smallest
// eigenvalue of A + ridge I is not above 1e-10.
CovarianceMatrix InvertPsd(const CovarianceMatrix& a, double ridge = 0.0);

// Largest eigenvalue magnitude of a symmetric matrix.
double SpectralNorm(const Eigen::MatrixXd& symmetric);

}  // namespace wsdep

#endif  // WSDEP_COVARIANCE_H_
