#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>

#include "cfrechet/errors.hpp"
#include "cfrechet/linalg.hpp"

namespace cfrechet {

namespace detail {

inline void check_table(const Eigen::MatrixXd& rows, const std::string& name) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    if (!rows.row(i).allFinite()) {
      for (Eigen::Index j = 0; j < rows.cols(); ++j) {
        if (!std::isfinite(rows(i, j))) {
          throw InputError("non-finite value in " + name + " at row " +
                           std::to_string(i) + ", column " + std::to_string(j));
        }
      }
    }
  }
}

}  // namespace detail

/// Second-order statistics of one joint distribution over (x, y):
/// means plus the covariance blocks c_xx, c_yx, c_yy. n_samples is 0 for
/// analytically constructed statistics.
struct JointStats {
  Eigen::VectorXd mean_x;
  Eigen::VectorXd mean_y;
  SymMatrix c_xx;
  Eigen::MatrixXd c_yx;  // d_y x d_x cross-covariance
  SymMatrix c_yy;
  std::int64_t n_samples = 0;

  Eigen::Index dim_x() const { return mean_x.size(); }
  Eigen::Index dim_y() const { return mean_y.size(); }

  Eigen::MatrixXd c_xy() const { return c_yx.transpose(); }

  /// Mean of the concatenated (x, y) vector.
  Eigen::VectorXd block_mean() const {
    Eigen::VectorXd m(dim_x() + dim_y());
    m << mean_x, mean_y;
    return m;
  }

  /// Covariance of the concatenated (x, y) vector, x block first.
  SymMatrix block_cov() const {
    const Eigen::Index dx = dim_x();
    const Eigen::Index dy = dim_y();
    Eigen::MatrixXd c(dx + dy, dx + dy);
    c.topLeftCorner(dx, dx) = c_xx.mat();
    c.topRightCorner(dx, dy) = c_yx.transpose();
    c.bottomLeftCorner(dy, dx) = c_yx;
    c.bottomRightCorner(dy, dy) = c_yy.mat();
    return SymMatrix(c);
  }

  /// Checks dimension consistency and that the full block covariance is PSD
  /// within the clamp tolerance (which covers c_xx and c_yy as principal
  /// sub-blocks).
  void validate(double clamp_tol = kDefaultClampTol) const {
    if (c_xx.dim() != dim_x() || c_yy.dim() != dim_y() ||
        c_yx.rows() != dim_y() || c_yx.cols() != dim_x()) {
      throw InputError("joint statistics have inconsistent dimensions");
    }
    detail::require_finite(mean_x, "mean_x");
    detail::require_finite(mean_y, "mean_y");
    detail::require_finite(c_yx, "c_yx");
    const SymMatrix block = block_cov();
    const EigDecomp d = sym_eig(block);
    detail::check_psd(d, clamp_tol, "joint covariance");
  }
};

/// Shared-x statistics for a true model (y) and a generated model (yhat).
/// The x moments are stored once, so both induced joints share the input
/// marginal by construction.
struct CondPairStats {
  Eigen::VectorXd mean_x;
  SymMatrix c_xx;

  Eigen::VectorXd mean_y;
  Eigen::MatrixXd c_yx;
  SymMatrix c_yy;

  Eigen::VectorXd mean_yhat;
  Eigen::MatrixXd c_yhatx;
  SymMatrix c_yhatyhat;

  std::int64_t n_samples = 0;

  Eigen::Index dim_x() const { return mean_x.size(); }
  Eigen::Index dim_y() const { return mean_y.size(); }

  JointStats true_joint() const {
    return JointStats{mean_x, mean_y, c_xx, c_yx, c_yy, n_samples};
  }

  JointStats generated_joint() const {
    return JointStats{mean_x, mean_yhat, c_xx, c_yhatx, c_yhatyhat, n_samples};
  }

  void validate(double clamp_tol = kDefaultClampTol) const {
    if (mean_yhat.size() != dim_y()) {
      throw InputError("true and generated outputs must share a dimension, got " +
                       std::to_string(dim_y()) + " vs " +
                       std::to_string(mean_yhat.size()));
    }
    true_joint().validate(clamp_tol);
    generated_joint().validate(clamp_tol);
  }
};

/// Moments of y given a conditioning value x. The covariance is the Schur
/// complement and does not depend on x.
struct CondMoments {
  Eigen::VectorXd mean_given_x;
  SymMatrix cov_given_x;
};

/// Sample means and covariance blocks of paired rows, 1/n normalization.
inline JointStats estimate_joint(const Eigen::MatrixXd& x_rows,
                                 const Eigen::MatrixXd& y_rows) {
  if (x_rows.rows() != y_rows.rows()) {
    throw InputError("paired tables must have equal row counts: x has " +
                     std::to_string(x_rows.rows()) + " rows, y has " +
                     std::to_string(y_rows.rows()));
  }
  const Eigen::Index n = x_rows.rows();
  if (n < 2) {
    throw InputError("need at least 2 paired samples, got " + std::to_string(n));
  }
  detail::check_table(x_rows, "x");
  detail::check_table(y_rows, "y");

  const Eigen::RowVectorXd mean_x = x_rows.colwise().mean();
  const Eigen::RowVectorXd mean_y = y_rows.colwise().mean();
  const Eigen::MatrixXd xc = x_rows.rowwise() - mean_x;
  const Eigen::MatrixXd yc = y_rows.rowwise() - mean_y;
  const double inv_n = 1.0 / static_cast<double>(n);

  JointStats js{mean_x.transpose(),
                mean_y.transpose(),
                SymMatrix((xc.transpose() * xc) * inv_n),
                (yc.transpose() * xc) * inv_n,
                SymMatrix((yc.transpose() * yc) * inv_n),
                n};
  js.validate();
  return js;
}

/// Shared-x estimation for a triplet dataset: x paired with both y and yhat.
/// The x moments are computed once and reused for both models.
inline CondPairStats estimate_cond_pair(const Eigen::MatrixXd& x_rows,
                                        const Eigen::MatrixXd& y_rows,
                                        const Eigen::MatrixXd& yhat_rows) {
  if (x_rows.rows() != y_rows.rows() || x_rows.rows() != yhat_rows.rows()) {
    throw InputError("triplet tables must have equal row counts: x has " +
                     std::to_string(x_rows.rows()) + ", y has " +
                     std::to_string(y_rows.rows()) + ", yhat has " +
                     std::to_string(yhat_rows.rows()));
  }
  const Eigen::Index n = x_rows.rows();
  if (n < 2) {
    throw InputError("need at least 2 paired samples, got " + std::to_string(n));
  }
  if (y_rows.cols() != yhat_rows.cols()) {
    throw InputError("y and yhat must share a dimension, got " +
                     std::to_string(y_rows.cols()) + " vs " +
                     std::to_string(yhat_rows.cols()));
  }
  detail::check_table(x_rows, "x");
  detail::check_table(y_rows, "y");
  detail::check_table(yhat_rows, "yhat");

  const Eigen::RowVectorXd mean_x = x_rows.colwise().mean();
  const Eigen::RowVectorXd mean_y = y_rows.colwise().mean();
  const Eigen::RowVectorXd mean_yhat = yhat_rows.colwise().mean();
  const Eigen::MatrixXd xc = x_rows.rowwise() - mean_x;
  const Eigen::MatrixXd yc = y_rows.rowwise() - mean_y;
  const Eigen::MatrixXd hc = yhat_rows.rowwise() - mean_yhat;
  const double inv_n = 1.0 / static_cast<double>(n);

  CondPairStats ps{mean_x.transpose(),
                   SymMatrix((xc.transpose() * xc) * inv_n),
                   mean_y.transpose(),
                   (yc.transpose() * xc) * inv_n,
                   SymMatrix((yc.transpose() * yc) * inv_n),
                   mean_yhat.transpose(),
                   (hc.transpose() * xc) * inv_n,
                   SymMatrix((hc.transpose() * hc) * inv_n),
                   n};
  ps.validate();
  return ps;
}

/// Conditional moments of y given x:
///   mean = m_y + C_yx C_xx^+ (x - m_x),  cov = C_yy - C_yx C_xx^+ C_xy.
/// C_xx is pseudo-inverted, so rank-deficient inputs condition on the
/// informative subspace only.
inline CondMoments conditional_moments(const JointStats& js, const Eigen::VectorXd& x,
                                       double pinv_eps = kDefaultPinvEps) {
  if (x.size() != js.dim_x()) {
    throw InputError("conditioning vector has dimension " + std::to_string(x.size()) +
                     ", expected " + std::to_string(js.dim_x()));
  }
  if (!x.allFinite()) {
    throw InputError("conditioning vector contains non-finite entries");
  }
  const SymMatrix cxx_pinv = pinv_psd(js.c_xx, pinv_eps);
  const Eigen::MatrixXd gain = js.c_yx * cxx_pinv.mat();
  Eigen::VectorXd mean = js.mean_y + gain * (x - js.mean_x);
  SymMatrix cov(js.c_yy.mat() - gain * js.c_yx.transpose());
  return CondMoments{std::move(mean), std::move(cov)};
}

/// Rescales the conditioning variable x -> alpha * x, alpha in (0, 1]:
/// c_xx picks up alpha^2, the cross blocks alpha, the output blocks are
/// untouched.
inline CondPairStats scale_x(const CondPairStats& ps, double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw InputError("alpha must lie in (0, 1], got " + std::to_string(alpha));
  }
  CondPairStats out = ps;
  out.mean_x = alpha * ps.mean_x;
  out.c_xx = SymMatrix((alpha * alpha) * ps.c_xx.mat());
  out.c_yx = alpha * ps.c_yx;
  out.c_yhatx = alpha * ps.c_yhatx;
  return out;
}

}  // namespace cfrechet
