#include "texseg/spd.hpp"

#include <atomic>
#include <cmath>
#include <optional>
#include <string>

namespace texseg::spd {

namespace {

std::atomic<long> g_clamp_warnings{0};

constexpr double kSymmetryTol = 1e-12;
constexpr double kEigenFloorRel = 1e-12;

bool is_symmetric(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) return false;
  for (Eigen::Index j = 0; j < a.rows(); ++j)
    for (Eigen::Index k = j + 1; k < a.cols(); ++k)
      if (std::abs(a(j, k) - a(k, j)) > kSymmetryTol * (1.0 + std::abs(a(j, k))))
        return false;
  return true;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a) {
  return 0.5 * (a + a.transpose());
}

void check_same_dim(const SpdMatrix& a, int other_dim, const char* what) {
  if (a.dim() != other_dim)
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.dim()) + " vs " +
                                std::to_string(other_dim) + ")");
}

/// Eigenvalues destined for a log, floored at 1e-12 * max eigenvalue.
Eigen::VectorXd clamped_for_log(const Eigen::VectorXd& w) {
  const double wmax = w.maxCoeff();
  if (!(wmax > 0.0))
    throw SpdError("matrix log: all eigenvalues non-positive, matrix is not positive definite");
  const double floor = kEigenFloorRel * wmax;
  Eigen::VectorXd out = w;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (out[i] < floor) {
      out[i] = floor;
      g_clamp_warnings.fetch_add(1, std::memory_order_relaxed);
    }
  }
  return out;
}

}  // namespace

SpdMatrix::SpdMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.rows() != entries_.cols())
    throw std::invalid_argument("SpdMatrix: entries must be square and non-empty");
  if (!is_symmetric(entries_))
    throw SpdError("SpdMatrix: entries are not symmetric within tolerance");
  entries_ = symmetrized(entries_);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(entries_, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 0.0))
    throw SpdError("SpdMatrix: smallest eigenvalue is not positive (" +
                   std::to_string(es.eigenvalues().minCoeff()) + ")");
}

SpdMatrix SpdMatrix::identity(int n) {
  return SpdMatrix(Eigen::MatrixXd::Identity(n, n));
}

TangentMatrix::TangentMatrix(Eigen::MatrixXd entries, SpdMatrix basepoint)
    : entries_(std::move(entries)), basepoint_(std::move(basepoint)) {
  if (entries_.rows() != entries_.cols())
    throw std::invalid_argument("TangentMatrix: entries must be square");
  if (entries_.rows() != basepoint_.dim())
    throw std::invalid_argument("TangentMatrix: dimension differs from basepoint");
  if (!is_symmetric(entries_))
    throw SpdError("TangentMatrix: entries are not symmetric within tolerance");
  entries_ = symmetrized(entries_);
}

SymEig sym_eig(const Eigen::MatrixXd& a) {
  if (!is_symmetric(a))
    throw SpdError("sym_eig: input is not symmetric within tolerance");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(a));
  if (es.info() != Eigen::Success)
    throw SpdError("sym_eig: eigendecomposition failed to converge");
  return SymEig{es.eigenvalues(), es.eigenvectors()};
}

Eigen::MatrixXd spd_function(const SpdMatrix& a, const std::function<double(double)>& f) {
  SymEig eig = sym_eig(a.entries());
  Eigen::VectorXd fw(eig.values.size());
  for (Eigen::Index i = 0; i < fw.size(); ++i) {
    fw[i] = f(eig.values[i]);
    if (!std::isfinite(fw[i]))
      throw SpdError("spd_function: eigenvalue " + std::to_string(eig.values[i]) +
                     " is outside the domain of f; matrix lost positive definiteness");
  }
  return symmetrized(eig.vectors * fw.asDiagonal() * eig.vectors.transpose());
}

Eigen::MatrixXd spd_sqrt(const SpdMatrix& a) {
  return spd_function(a, [](double w) { return std::sqrt(w); });
}

Eigen::MatrixXd spd_inv_sqrt(const SpdMatrix& a) {
  return spd_function(a, [](double w) { return 1.0 / std::sqrt(w); });
}

Eigen::MatrixXd spd_log(const SpdMatrix& a) {
  SymEig eig = sym_eig(a.entries());
  Eigen::VectorXd w = clamped_for_log(eig.values);
  Eigen::VectorXd logw = w.array().log().matrix();
  return symmetrized(eig.vectors * logw.asDiagonal() * eig.vectors.transpose());
}

namespace {

/// Eigendecomposition of the whitened matrix A^{-1/2} B A^{-1/2} plus the
/// square-root factors of A: fallback for inputs whose Cholesky fails.
struct Whitened {
  Eigen::MatrixXd root;      // A^{1/2}
  SymEig eig;                // of A^{-1/2} B A^{-1/2}
  Eigen::VectorXd log_vals;  // clamped log eigenvalues
};

Whitened whiten(const SpdMatrix& a, const SpdMatrix& b) {
  check_same_dim(a, b.dim(), "whiten");
  SymEig ea = sym_eig(a.entries());
  Eigen::VectorXd wa = clamped_for_log(ea.values);
  Eigen::VectorXd inv_sqrt_w = wa.array().rsqrt().matrix();
  Eigen::VectorXd sqrt_w = wa.array().sqrt().matrix();
  Eigen::MatrixXd a_inv_root =
      ea.vectors * inv_sqrt_w.asDiagonal() * ea.vectors.transpose();
  Eigen::MatrixXd a_root = ea.vectors * sqrt_w.asDiagonal() * ea.vectors.transpose();

  Eigen::MatrixXd w = symmetrized(a_inv_root * b.entries() * a_inv_root);
  SymEig ew = sym_eig(w);
  Eigen::VectorXd lw = clamped_for_log(ew.values).array().log().matrix();
  return Whitened{std::move(a_root), std::move(ew), std::move(lw)};
}

/// Primary route for the distance and the log map. The generalized
/// eigenvalues of (B, A) are the squared singular values of L_A^{-1} L_B
/// (Cholesky factors); Jacobi SVD keeps their relative accuracy where the
/// explicit whitening A^{-1/2} B A^{-1/2} loses ~cond(A) digits and breaks
/// d(A,B) = d(B,A) around 1e-7 at condition 1e6. Same 1e-12 relative floor
/// and warning counter as every other eigenvalue log.
struct Quotient {
  Eigen::MatrixXd chol_a;    // L with A = L L^T
  Eigen::MatrixXd vectors;   // left singular vectors of L_A^{-1} L_B
  Eigen::VectorXd log_gen;   // clamped log generalized eigenvalues
};

std::optional<Quotient> cholesky_quotient(const SpdMatrix& a, const SpdMatrix& b,
                                          bool need_vectors) {
  Eigen::LLT<Eigen::MatrixXd> llt_a(a.entries());
  Eigen::LLT<Eigen::MatrixXd> llt_b(b.entries());
  if (llt_a.info() != Eigen::Success || llt_b.info() != Eigen::Success)
    return std::nullopt;
  Eigen::MatrixXd chol_a = llt_a.matrixL();
  const Eigen::MatrixXd quotient =
      llt_a.matrixL().solve(Eigen::MatrixXd(llt_b.matrixL()));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      quotient, need_vectors ? static_cast<unsigned>(Eigen::ComputeFullU) : 0u);
  Eigen::VectorXd sigma = svd.singularValues();
  const double floor = std::sqrt(kEigenFloorRel) * sigma[0];
  Eigen::VectorXd log_gen(sigma.size());
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma[i] < floor) {
      sigma[i] = floor;
      g_clamp_warnings.fetch_add(1, std::memory_order_relaxed);
    }
    log_gen[i] = 2.0 * std::log(sigma[i]);
  }
  return Quotient{std::move(chol_a),
                  need_vectors ? svd.matrixU() : Eigen::MatrixXd(),
                  std::move(log_gen)};
}

}  // namespace

double geodesic_distance(const SpdMatrix& a, const SpdMatrix& b) {
  check_same_dim(a, b.dim(), "geodesic_distance");
  if (auto q = cholesky_quotient(a, b, false)) return q->log_gen.norm();
  return whiten(a, b).log_vals.norm();
}

TangentMatrix riemannian_log(const SpdMatrix& a, const SpdMatrix& b) {
  check_same_dim(a, b.dim(), "riemannian_log");
  if (auto q = cholesky_quotient(a, b, true)) {
    // Log_A(B) = L log(L^{-1} B L^{-T}) L^T for any factor A = L L^T, and
    // L^{-1} B L^{-T} = X X^T with X = L_A^{-1} L_B, so log = U 2logSigma U^T.
    const Eigen::MatrixXd core =
        q->vectors * q->log_gen.asDiagonal() * q->vectors.transpose();
    Eigen::MatrixXd tangent = symmetrized(q->chol_a * core * q->chol_a.transpose());
    return TangentMatrix(std::move(tangent), a);
  }
  Whitened w = whiten(a, b);
  Eigen::MatrixXd log_w =
      w.eig.vectors * w.log_vals.asDiagonal() * w.eig.vectors.transpose();
  Eigen::MatrixXd tangent = symmetrized(w.root * log_w * w.root);
  return TangentMatrix(std::move(tangent), a);
}

SpdMatrix riemannian_exp(const SpdMatrix& a, const TangentMatrix& x) {
  check_same_dim(a, x.dim(), "riemannian_exp");
  SymEig ea = sym_eig(a.entries());
  Eigen::VectorXd wa = clamped_for_log(ea.values);
  Eigen::MatrixXd a_inv_root =
      ea.vectors * wa.array().rsqrt().matrix().asDiagonal() * ea.vectors.transpose();
  Eigen::MatrixXd a_root =
      ea.vectors * wa.array().sqrt().matrix().asDiagonal() * ea.vectors.transpose();

  Eigen::MatrixXd v = symmetrized(a_inv_root * x.entries() * a_inv_root);
  SymEig ev = sym_eig(v);
  Eigen::MatrixXd exp_v = ev.vectors * ev.values.array().exp().matrix().asDiagonal() *
                          ev.vectors.transpose();
  return SpdMatrix(symmetrized(a_root * exp_v * a_root));
}

double inner_product(const SpdMatrix& m, const TangentMatrix& x, const TangentMatrix& y) {
  check_same_dim(m, x.dim(), "inner_product");
  check_same_dim(m, y.dim(), "inner_product");
  Eigen::LLT<Eigen::MatrixXd> llt(m.entries());
  if (llt.info() != Eigen::Success)
    throw SpdError("inner_product: basepoint is not positive definite");
  Eigen::MatrixXd mx = llt.solve(x.entries());
  Eigen::MatrixXd my = llt.solve(y.entries());
  return (mx * my).trace();
}

long clamp_warning_count() { return g_clamp_warnings.load(std::memory_order_relaxed); }

void reset_clamp_warnings() { g_clamp_warnings.store(0, std::memory_order_relaxed); }

}  // namespace texseg::spd
