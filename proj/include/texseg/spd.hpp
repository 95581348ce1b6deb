#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>

namespace texseg::spd {

/// Raised when an input fails the symmetry or positive-definiteness checks.
class SpdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Symmetric positive definite matrix. Construction validates symmetry
/// (|A(j,k) - A(k,j)| <= 1e-12 * (1 + |A(j,k)|)) and a strictly positive
/// smallest eigenvalue.
class SpdMatrix {
 public:
  explicit SpdMatrix(Eigen::MatrixXd entries);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }

  static SpdMatrix identity(int n);

 private:
  Eigen::MatrixXd entries_;
};

/// Symmetric matrix attached to the tangent space at a basepoint.
class TangentMatrix {
 public:
  TangentMatrix(Eigen::MatrixXd entries, SpdMatrix basepoint);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  const SpdMatrix& basepoint() const { return basepoint_; }

 private:
  Eigen::MatrixXd entries_;
  SpdMatrix basepoint_;
};

struct SymEig {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns, A = V diag(values) V^T
};

/// Eigendecomposition restricted to symmetric input; rejects matrices whose
/// asymmetry exceeds the SpdMatrix tolerance.
SymEig sym_eig(const Eigen::MatrixXd& a);

/// Applies f to the eigenvalues: Q diag(f(w)) Q^T. Non-finite f(w) means the
/// eigenvalue left the domain of f and raises SpdError.
Eigen::MatrixXd spd_function(const SpdMatrix& a, const std::function<double(double)>& f);

Eigen::MatrixXd spd_sqrt(const SpdMatrix& a);
Eigen::MatrixXd spd_inv_sqrt(const SpdMatrix& a);
Eigen::MatrixXd spd_log(const SpdMatrix& a);

// Affine-invariant metric. The four functions below are the whole metric
// surface; swapping the geometry (e.g. log-Euclidean) means replacing them.

/// d(A,B) = ||log(A^{-1/2} B A^{-1/2})||_F
double geodesic_distance(const SpdMatrix& a, const SpdMatrix& b);

/// Log_A(B) = A^{1/2} log(A^{-1/2} B A^{-1/2}) A^{1/2}, tangent at A.
TangentMatrix riemannian_log(const SpdMatrix& a, const SpdMatrix& b);

/// Exp_A(X) = A^{1/2} exp(A^{-1/2} X A^{-1/2}) A^{1/2}; inverse of the log map.
SpdMatrix riemannian_exp(const SpdMatrix& a, const TangentMatrix& x);

/// <X,Y>_M = trace(M^{-1} X M^{-1} Y)
double inner_product(const SpdMatrix& m, const TangentMatrix& x, const TangentMatrix& y);

/// Eigenvalues below 1e-12 * (largest eigenvalue) are floored before a matrix
/// log; each such event bumps this process-wide counter.
long clamp_warning_count();
void reset_clamp_warnings();

}  // namespace texseg::spd
