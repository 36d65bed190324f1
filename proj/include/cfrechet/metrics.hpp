#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <string>

#include "cfrechet/errors.hpp"
#include "cfrechet/linalg.hpp"
#include "cfrechet/report.hpp"
#include "cfrechet/stats.hpp"

namespace cfrechet {

/// A Gaussian as its first two moments.
struct GaussianDesc {
  Eigen::VectorXd mean;
  SymMatrix cov;
};

namespace detail {

inline double clamp_nonneg(double v) { return std::max(v, 0.0); }

inline MetricReport pair_report(Metric metric, double value, const CondPairStats& ps,
                                double clamp_tol, double pinv_eps) {
  MetricReport r;
  r.metric = metric;
  r.value = clamp_nonneg(value);
  r.n_samples = ps.n_samples;
  r.dim_x = ps.dim_x();
  r.dim_y = ps.dim_y();
  r.clamp_tol = clamp_tol;
  r.pinv_eps = pinv_eps;
  return r;
}

}  // namespace detail

/// Squared Wasserstein-2 distance between two Gaussians:
///   ||m_a - m_b||^2 + Tr(C_a) + Tr(C_b) - 2 Tr((C_a^{1/2} C_b C_a^{1/2})^{1/2}).
/// Clamped to >= 0 (the exact value is provably nonnegative).
inline double gaussian_w2(const GaussianDesc& a, const GaussianDesc& b,
                          double clamp_tol = kDefaultClampTol) {
  if (a.mean.size() != b.mean.size() || a.cov.dim() != b.cov.dim() ||
      a.cov.dim() != a.mean.size()) {
    throw InputError("gaussian_w2: dimension mismatch");
  }
  const double mean_term = (a.mean - b.mean).squaredNorm();
  const double trace_term = a.cov.trace() + b.cov.trace() -
                            2.0 * trace_sqrt_product(a.cov, b.cov, clamp_tol);
  return detail::clamp_nonneg(mean_term + trace_term);
}

/// Marginal Frechet distance: distance between the two output marginals,
/// ignoring the conditioning input entirely.
inline MetricReport mfid(const CondPairStats& ps, double clamp_tol = kDefaultClampTol) {
  const double v = gaussian_w2(GaussianDesc{ps.mean_y, ps.c_yy},
                               GaussianDesc{ps.mean_yhat, ps.c_yhatyhat}, clamp_tol);
  return detail::pair_report(Metric::MFID, v, ps, clamp_tol, kDefaultPinvEps);
}

/// Restricted Frechet distance: distance between the two joint (x, output)
/// Gaussians, which share the x marginal by construction of CondPairStats.
inline MetricReport rfid(const CondPairStats& ps, double clamp_tol = kDefaultClampTol) {
  const JointStats a = ps.true_joint();
  const JointStats b = ps.generated_joint();
  const double v = gaussian_w2(GaussianDesc{a.block_mean(), a.block_cov()},
                               GaussianDesc{b.block_mean(), b.block_cov()}, clamp_tol);
  return detail::pair_report(Metric::RFID, v, ps, clamp_tol, kDefaultPinvEps);
}

/// Conditional Frechet distance, closed form:
///   ||m_y - m_yhat||^2
///   + Tr[(C_yx - C_yhatx) C_xx^+ (C_xy - C_xyhat)]
///   + Tr[C_yy|x + C_yhatyhat|x - 2 (C_yy|x^{1/2} C_yhatyhat|x C_yy|x^{1/2})^{1/2}]
/// with the conditional covariances given by the Schur complements.
inline MetricReport cfid(const CondPairStats& ps, double clamp_tol = kDefaultClampTol,
                         double pinv_eps = kDefaultPinvEps) {
  const SymMatrix cxx_pinv = pinv_psd(ps.c_xx, pinv_eps);
  const Eigen::MatrixXd diff = ps.c_yx - ps.c_yhatx;

  const double mean_term = (ps.mean_y - ps.mean_yhat).squaredNorm();
  const double cross_term = (diff * cxx_pinv.mat() * diff.transpose()).trace();

  const SymMatrix cond_true(ps.c_yy.mat() -
                            ps.c_yx * cxx_pinv.mat() * ps.c_yx.transpose());
  const SymMatrix cond_gen(ps.c_yhatyhat.mat() -
                           ps.c_yhatx * cxx_pinv.mat() * ps.c_yhatx.transpose());
  const double cond_term = cond_true.trace() + cond_gen.trace() -
                           2.0 * trace_sqrt_product(cond_true, cond_gen, clamp_tol);

  return detail::pair_report(Metric::CFID, mean_term + cross_term + cond_term, ps,
                             clamp_tol, pinv_eps);
}

/// Joint Frechet distance between two full (x, y) Gaussians whose input
/// marginals may differ. Coincides with RFID when they do not.
inline MetricReport jfd(const JointStats& a, const JointStats& b,
                        double clamp_tol = kDefaultClampTol) {
  if (a.dim_x() != b.dim_x() || a.dim_y() != b.dim_y()) {
    throw InputError("jfd: joint statistics have mismatched dimensions");
  }
  const double v = gaussian_w2(GaussianDesc{a.block_mean(), a.block_cov()},
                               GaussianDesc{b.block_mean(), b.block_cov()}, clamp_tol);
  MetricReport r;
  r.metric = Metric::JFD;
  r.value = detail::clamp_nonneg(v);
  r.n_samples = a.n_samples;
  r.dim_x = a.dim_x();
  r.dim_y = a.dim_y();
  r.clamp_tol = clamp_tol;
  return r;
}

}  // namespace cfrechet
