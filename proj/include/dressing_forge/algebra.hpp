#ifndef DRESSING_FORGE_ALGEBRA_HPP
#define DRESSING_FORGE_ALGEBRA_HPP

// Small dense complex linear algebra: the substrate for loop factors,
// frames and dressing. Dimensions are tiny (n <= 8), so everything is dense.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "dressing_forge/errors.hpp"

namespace dressing_forge {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr cd kI{0.0, 1.0};

namespace tol {
/// Relative threshold on sigma_min / sigma_max for spanning sets.
inline constexpr double kRank = 1e-10;
/// Residual allowed for idempotency, self-adjointness and realness of projections.
inline constexpr double kProjection = 1e-12;
/// Largest condition number accepted by solve_linear.
inline constexpr double kCondMax = 1e12;
/// Max-norm distance under which two projections are considered equal.
inline constexpr double kProjectionEquality = 1e-9;
}  // namespace tol

template <typename Derived>
double max_norm(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

inline double max_imag(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return m.imag().cwiseAbs().maxCoeff();
}

inline void require_same_shape(const CMatrix& a, const CMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorKind::DimensionMismatch,
         std::string(what) + ": " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
             std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

inline void require_square(const CMatrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    fail(ErrorKind::DimensionMismatch, std::string(what) + ": matrix is not square");
  }
}

inline CMatrix identity(Eigen::Index n) { return CMatrix::Identity(n, n); }

/// An orthogonal (self-adjoint, idempotent) projection of C^n.
///
/// Alongside the matrix we keep an orthonormal basis of the image so that
/// transported images g(z) Im(pi) can be formed as g(z) * basis and then
/// re-projected, rather than by conjugating the matrix.
class HermitianProjection {
 public:
  HermitianProjection() = default;

  /// Zero projection of C^n.
  static HermitianProjection zero(Eigen::Index n) {
    HermitianProjection p;
    p.matrix_ = CMatrix::Zero(n, n);
    p.basis_ = CMatrix::Zero(n, 0);
    p.rank_ = 0;
    p.is_real_ = true;
    return p;
  }

  static HermitianProjection full(Eigen::Index n) {
    HermitianProjection p;
    p.matrix_ = identity(n);
    p.basis_ = identity(n);
    p.rank_ = static_cast<int>(n);
    p.is_real_ = true;
    return p;
  }

  /// Wraps an explicit matrix; it must already be an orthogonal projection.
  static HermitianProjection from_matrix(const CMatrix& m) {
    require_square(m, "HermitianProjection::from_matrix");
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (m + m.adjoint()));
    const auto& values = eig.eigenvalues();
    int rank = 0;
    for (Eigen::Index i = 0; i < values.size(); ++i) rank += values(i) > 0.5 ? 1 : 0;
    HermitianProjection p;
    p.matrix_ = m;
    p.basis_ = eig.eigenvectors().rightCols(rank);
    p.rank_ = rank;
    p.is_real_ = max_imag(m) < tol::kProjection;
    p.validate();
    return p;
  }

  const CMatrix& matrix() const noexcept { return matrix_; }
  /// Orthonormal columns spanning the image.
  const CMatrix& basis() const noexcept { return basis_; }
  int rank() const noexcept { return rank_; }
  bool is_real() const noexcept { return is_real_; }
  Eigen::Index dim() const noexcept { return matrix_.rows(); }

  CMatrix complement() const { return identity(dim()) - matrix_; }

  /// Entrywise conjugate: the projection onto conj(Im pi).
  HermitianProjection conjugate() const {
    HermitianProjection p = *this;
    p.matrix_ = matrix_.conjugate();
    p.basis_ = basis_.conjugate();
    return p;
  }

  double idempotency_residual() const { return max_norm(matrix_ * matrix_ - matrix_); }
  double adjoint_residual() const { return max_norm(matrix_ - matrix_.adjoint()); }

 private:
  friend HermitianProjection project_onto_span(const CMatrix& span);

  void validate() const {
    const double idem = idempotency_residual();
    const double adj = adjoint_residual();
    if (idem >= tol::kProjection || adj >= tol::kProjection) {
      fail(ErrorKind::RankDeficient, "projection failed validation (|p^2-p| = " + std::to_string(idem) +
                                         ", |p-p*| = " + std::to_string(adj) + ")");
    }
    if (std::abs(matrix_.trace().real() - rank_) > 1e-9) {
      fail(ErrorKind::RankDeficient, "projection trace does not match its rank");
    }
  }

  CMatrix matrix_;
  CMatrix basis_;
  int rank_ = 0;
  bool is_real_ = true;
};

/// Hermitian projection onto the column span of `span` (n x k, independent columns),
/// i.e. V (V*V)^{-1} V*, formed from an orthonormal basis of the span.
inline HermitianProjection project_onto_span(const CMatrix& span) {
  const Eigen::Index n = span.rows();
  const Eigen::Index k = span.cols();
  if (k == 0) return HermitianProjection::zero(n);
  if (k > n) fail(ErrorKind::RankDeficient, "more spanning vectors than the ambient dimension");
  if (!span.allFinite()) fail(ErrorKind::InvalidArgument, "spanning matrix has non-finite entries");

  const bool real_input = max_imag(span) == 0.0;
  CMatrix q;
  Eigen::VectorXd sv;
  if (real_input) {
    Eigen::JacobiSVD<RMatrix> svd(span.real(), Eigen::ComputeThinU);
    sv = svd.singularValues();
    q = svd.matrixU().cast<cd>();
  } else {
    Eigen::JacobiSVD<CMatrix> svd(span, Eigen::ComputeThinU);
    sv = svd.singularValues();
    q = svd.matrixU();
  }
  const double smax = sv(0);
  const double smin = sv(k - 1);
  if (!(smax > 0.0) || smin <= tol::kRank * smax) {
    fail(ErrorKind::RankDeficient, "spanning vectors are linearly dependent (sigma_min/sigma_max = " +
                                       std::to_string(smax > 0 ? smin / smax : 0.0) + ")");
  }

  HermitianProjection p;
  p.matrix_ = q * q.adjoint();
  if (real_input) p.matrix_ = p.matrix_.real().cast<cd>();
  p.basis_ = q;
  p.rank_ = static_cast<int>(k);
  p.is_real_ = real_input || max_imag(p.matrix_) < tol::kProjection;
  p.validate();
  return p;
}

/// xi_* : the matrix with its diagonal removed.
inline CMatrix star_reduce(const CMatrix& xi) {
  require_square(xi, "star_reduce");
  CMatrix out = xi;
  out.diagonal().setZero();
  return out;
}

/// Solves A X = B. Throws Singular when A is numerically singular.
inline CMatrix solve_linear(const CMatrix& a, const CMatrix& b) {
  require_square(a, "solve_linear");
  if (a.rows() != b.rows()) fail(ErrorKind::DimensionMismatch, "solve_linear: row count mismatch");
  Eigen::PartialPivLU<CMatrix> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond > 1.0 / tol::kCondMax)) {
    fail(ErrorKind::Singular, "matrix is singular to working precision (rcond = " + std::to_string(rcond) + ")");
  }
  return lu.solve(b);
}

inline CVector solve_linear(const CMatrix& a, const CVector& b) {
  return solve_linear(a, CMatrix(b)).col(0);
}

inline double projection_distance(const HermitianProjection& a, const HermitianProjection& b) {
  require_same_shape(a.matrix(), b.matrix(), "projection_distance");
  return max_norm(a.matrix() - b.matrix());
}

}  // namespace dressing_forge

#endif  // DRESSING_FORGE_ALGEBRA_HPP
