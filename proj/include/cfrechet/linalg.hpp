#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "cfrechet/errors.hpp"

namespace cfrechet {

/// Relative eigenvalue floor below which a matrix is rejected as not PSD;
/// eigenvalues in [-tol, 0) are treated as roundoff and clamped to zero.
inline constexpr double kDefaultClampTol = 1e-10;

/// Relative cutoff for pseudo-inversion: eigenvalues <= eps * lambda_max are
/// treated as exact zeros of a rank-deficient matrix.
inline constexpr double kDefaultPinvEps = 1e-10;

namespace detail {

inline void require_finite(const Eigen::MatrixXd& m, const std::string& what) {
  if (!m.allFinite()) {
    throw InputError(what + " contains non-finite entries");
  }
}

}  // namespace detail

/// Dense symmetric real matrix. The constructor averages the two triangles,
/// so (i,j) and (j,i) compare equal bit-for-bit afterwards, and rejects
/// non-square or non-finite input.
class SymMatrix {
 public:
  explicit SymMatrix(const Eigen::MatrixXd& m) {
    if (m.rows() == 0 || m.rows() != m.cols()) {
      throw InputError("symmetric matrix must be square and non-empty, got " +
                       std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    detail::require_finite(m, "symmetric matrix");
    mat_ = 0.5 * (m + m.transpose());
  }

  static SymMatrix zero(Eigen::Index dim) {
    return SymMatrix(Eigen::MatrixXd::Zero(dim, dim));
  }

  static SymMatrix identity(Eigen::Index dim) {
    return SymMatrix(Eigen::MatrixXd::Identity(dim, dim));
  }

  static SymMatrix from_diag(const Eigen::VectorXd& diag) {
    return SymMatrix(Eigen::MatrixXd(diag.asDiagonal()));
  }

  Eigen::Index dim() const { return mat_.rows(); }
  const Eigen::MatrixXd& mat() const { return mat_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return mat_(i, j); }
  double trace() const { return mat_.trace(); }

 private:
  Eigen::MatrixXd mat_;
};

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending,
/// eigenvector columns orthonormal and ordered to match.
struct EigDecomp {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
};

inline EigDecomp sym_eig(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.mat());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric eigendecomposition failed to converge for " +
                         std::to_string(m.dim()) + "x" + std::to_string(m.dim()) +
                         " matrix");
  }
  EigDecomp d;
  d.eigenvalues = solver.eigenvalues().reverse();
  d.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return d;
}

namespace detail {

// Shared PSD gate: smallest admissible eigenvalue is -tol * max(1, lambda_max).
inline void check_psd(const EigDecomp& d, double tol, const char* op) {
  const double lambda_max = d.eigenvalues(0);
  const double floor = -tol * std::max(1.0, lambda_max);
  const double lambda_min = d.eigenvalues(d.eigenvalues.size() - 1);
  if (lambda_min < floor) {
    throw NumericalError(std::string(op) + ": matrix is not PSD within clamp tolerance " +
                         std::to_string(tol) + ", smallest eigenvalue " +
                         std::to_string(lambda_min));
  }
}

}  // namespace detail

/// PSD square root via eigendecomposition. Eigenvalues within the clamp
/// tolerance of zero are clamped to zero; anything further negative throws.
inline SymMatrix sqrt_psd(const SymMatrix& m, double clamp_tol = kDefaultClampTol) {
  const EigDecomp d = sym_eig(m);
  detail::check_psd(d, clamp_tol, "sqrt_psd");
  const Eigen::VectorXd roots = d.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  return SymMatrix(d.eigenvectors * roots.asDiagonal() * d.eigenvectors.transpose());
}

/// Tr((a^{1/2} b a^{1/2})^{1/2}), the coupling term of the Gaussian
/// Wasserstein-2 distance. The inner product is re-symmetrized before the
/// outer root; floating-point asymmetry would otherwise leak complex parts.
inline double trace_sqrt_product(const SymMatrix& a, const SymMatrix& b,
                                 double clamp_tol = kDefaultClampTol) {
  if (a.dim() != b.dim()) {
    throw InputError("trace_sqrt_product: dimension mismatch " +
                     std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  const SymMatrix root_a = sqrt_psd(a, clamp_tol);
  const SymMatrix inner(root_a.mat() * b.mat() * root_a.mat());
  const SymMatrix outer = sqrt_psd(inner, clamp_tol);
  return std::max(outer.trace(), 0.0);
}

/// Moore-Penrose pseudo-inverse of a PSD matrix: eigenvalues above
/// eps * lambda_max are inverted, the rest zeroed. The all-zero matrix maps
/// to the all-zero matrix.
inline SymMatrix pinv_psd(const SymMatrix& m, double eps = kDefaultPinvEps) {
  const EigDecomp d = sym_eig(m);
  detail::check_psd(d, kDefaultClampTol, "pinv_psd");
  const double lambda_max = d.eigenvalues(0);
  if (lambda_max <= 0.0) {
    return SymMatrix::zero(m.dim());
  }
  const double cutoff = eps * lambda_max;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(m.dim());
  for (Eigen::Index i = 0; i < m.dim(); ++i) {
    if (d.eigenvalues(i) > cutoff) {
      inv(i) = 1.0 / d.eigenvalues(i);
    }
  }
  return SymMatrix(d.eigenvectors * inv.asDiagonal() * d.eigenvectors.transpose());
}

/// Smallest eigenvalue; the PSD validation primitive used by the stats types.
inline double min_eigenvalue(const SymMatrix& m) {
  const EigDecomp d = sym_eig(m);
  return d.eigenvalues(d.eigenvalues.size() - 1);
}

}  // namespace cfrechet
