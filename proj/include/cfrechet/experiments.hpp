#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cfrechet/errors.hpp"
#include "cfrechet/metrics.hpp"
#include "cfrechet/random.hpp"
#include "cfrechet/stats.hpp"

namespace cfrechet {

/// Zero-mean, unit-variance bivariate Gaussian with correlation rho between
/// the input x and the output y.
struct BvnModel {
  double rho = 0.0;

  void validate() const {
    if (!(std::abs(rho) <= 1.0)) {
      throw InputError("correlation must lie in [-1, 1], got " + std::to_string(rho));
    }
  }
};

/// n paired scalar samples (x, y) from the bivariate model, via the Cholesky
/// transform y = rho x + sqrt(1 - rho^2) z of two standard normals.
/// Deterministic given the seed.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sample_bvn(const BvnModel& model,
                                                              Eigen::Index n,
                                                              std::uint64_t seed) {
  model.validate();
  if (n < 1) {
    throw InputError("sample count must be positive, got " + std::to_string(n));
  }
  Rng rng(seed);
  const double tail = std::sqrt(std::max(0.0, 1.0 - model.rho * model.rho));
  Eigen::MatrixXd x(n, 1), y(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    x(i, 0) = z1;
    y(i, 0) = model.rho * z1 + tail * z2;
  }
  return {std::move(x), std::move(y)};
}

/// Covariance estimators compared in the synthetic study: the plain sample
/// covariance and two variance-normalized variants that stand in for access
/// to unlimited unpaired output (NSC1) or input and output (NSC2) data.
enum class EstimatorKind { SC, NSC1, NSC2 };

inline const char* estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::SC: return "SC";
    case EstimatorKind::NSC1: return "NSC1";
    case EstimatorKind::NSC2: return "NSC2";
  }
  throw InputError("unknown estimator enum value");
}

/// 2x2 second-moment estimate of paired scalar samples.
/// SC:    S = (1/n) sum_i z_i z_i^T with z_i = [x_i, y_i]^T.
/// NSC1:  S rescaled so the output variance entry is exactly 1.
/// NSC2:  S rescaled so the whole diagonal is exactly (1, 1).
/// Normalized entries are written as exact constants, not recomputed through
/// division, so the variance-normalized estimators match the unit-variance
/// truth bit-for-bit on those entries.
inline SymMatrix fit_covariance(EstimatorKind kind, const Eigen::MatrixXd& x,
                                const Eigen::MatrixXd& y) {
  if (x.rows() != y.rows() || x.cols() != 1 || y.cols() != 1) {
    throw InputError("fit_covariance: expects paired n x 1 sample tables");
  }
  const Eigen::Index n = x.rows();
  if (n < 2) {
    throw InputError("fit_covariance: need at least 2 samples, got " +
                     std::to_string(n));
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const double s_xx = x.col(0).squaredNorm() * inv_n;
  const double s_yy = y.col(0).squaredNorm() * inv_n;
  const double s_xy = x.col(0).dot(y.col(0)) * inv_n;

  Eigen::Matrix2d s;
  switch (kind) {
    case EstimatorKind::SC:
      s << s_xx, s_xy, s_xy, s_yy;
      break;
    case EstimatorKind::NSC1: {
      if (s_yy <= 0.0) {
        throw InputError("fit_covariance: zero output variance, cannot normalize");
      }
      const double root_yy = std::sqrt(s_yy);
      s << s_xx, s_xy / root_yy, s_xy / root_yy, 1.0;
      break;
    }
    case EstimatorKind::NSC2: {
      if (s_xx <= 0.0 || s_yy <= 0.0) {
        throw InputError("fit_covariance: zero sample variance, cannot normalize");
      }
      const double scale = std::sqrt(s_xx) * std::sqrt(s_yy);
      s << 1.0, s_xy / scale, s_xy / scale, 1.0;
      break;
    }
  }
  return SymMatrix(s);
}

/// Which x variance the evaluation plugs into the metric formulas: the true
/// model value (the estimated one is not needed at test time) or the
/// estimator's own top-left entry.
enum class CxxSource { True, Estimated };

/// Assembles shared-x pair statistics for metric evaluation: the true-model
/// blocks come from the bivariate model, the generated-model blocks from the
/// estimate's output column.
inline CondPairStats estimator_to_pair_stats(const SymMatrix& est, const BvnModel& truth,
                                             CxxSource source = CxxSource::True) {
  truth.validate();
  if (est.dim() != 2) {
    throw InputError("estimator_to_pair_stats: expects a 2x2 estimate");
  }
  const double c_xx = source == CxxSource::True ? 1.0 : est(0, 0);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  CondPairStats ps{zero,
                   SymMatrix(Eigen::MatrixXd::Constant(1, 1, c_xx)),
                   zero,
                   Eigen::MatrixXd::Constant(1, 1, truth.rho),
                   SymMatrix(Eigen::MatrixXd::Constant(1, 1, 1.0)),
                   zero,
                   Eigen::MatrixXd::Constant(1, 1, est(1, 0)),
                   SymMatrix(Eigen::MatrixXd::Constant(1, 1, est(1, 1))),
                   0};
  ps.validate();
  return ps;
}

inline constexpr std::array<EstimatorKind, 3> kEstimators = {
    EstimatorKind::SC, EstimatorKind::NSC1, EstimatorKind::NSC2};
inline constexpr std::array<Metric, 3> kTrialMetrics = {Metric::MFID, Metric::RFID,
                                                        Metric::CFID};

/// Per-trial metric values of the three estimators, plus medians.
/// values[e][m] indexes kEstimators x kTrialMetrics.
struct TrialTable {
  double rho = 0.0;
  Eigen::Index n = 0;
  int trials = 0;
  std::uint64_t seed = 0;
  CxxSource cxx_source = CxxSource::True;
  std::array<std::array<std::vector<double>, 3>, 3> values;
  std::array<std::array<double, 3>, 3> medians{};
};

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size();
  return k % 2 == 1 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

}  // namespace detail

/// The synthetic estimator comparison: per trial, draw n paired samples, fit
/// SC/NSC1/NSC2, and evaluate MFID/RFID/CFID against the true model. Each
/// trial uses its own substream of the seed, so results are independent of
/// evaluation order and bitwise reproducible.
inline TrialTable run_synthetic(double rho, Eigen::Index n, int trials,
                                std::uint64_t seed,
                                CxxSource source = CxxSource::True) {
  if (trials < 1) {
    throw InputError("trial count must be positive, got " + std::to_string(trials));
  }
  const BvnModel truth{rho};
  truth.validate();

  TrialTable table;
  table.rho = rho;
  table.n = n;
  table.trials = trials;
  table.seed = seed;
  table.cxx_source = source;
  for (auto& row : table.values) {
    for (auto& cell : row) cell.reserve(static_cast<std::size_t>(trials));
  }

  for (int t = 0; t < trials; ++t) {
    const auto [x, y] = sample_bvn(truth, n, substream_seed(seed, t));
    for (std::size_t e = 0; e < kEstimators.size(); ++e) {
      const SymMatrix est = fit_covariance(kEstimators[e], x, y);
      const CondPairStats ps = estimator_to_pair_stats(est, truth, source);
      table.values[e][0].push_back(mfid(ps).value);
      table.values[e][1].push_back(rfid(ps).value);
      table.values[e][2].push_back(cfid(ps).value);
    }
  }
  for (std::size_t e = 0; e < kEstimators.size(); ++e) {
    for (std::size_t m = 0; m < kTrialMetrics.size(); ++m) {
      table.medians[e][m] = detail::median(table.values[e][m]);
    }
  }
  return table;
}

/// Scalar CFID of the bivariate model pair, the independent oracle for the
/// matrix path: (rho - rhohat)^2 + (sqrt(1-rho^2) - sqrt(1-rhohat^2))^2.
inline double cfid_scalar(double rho, double rhohat) {
  if (!(std::abs(rho) <= 1.0) || !(std::abs(rhohat) <= 1.0)) {
    throw InputError("correlations must lie in [-1, 1]");
  }
  const double d_corr = rho - rhohat;
  const double d_cond = std::sqrt(1.0 - rho * rho) - std::sqrt(1.0 - rhohat * rhohat);
  return d_corr * d_corr + d_cond * d_cond;
}

/// Scalar shared-x pair statistics of two bivariate models with correlations
/// rho (true) and rhohat (generated).
inline CondPairStats bvn_pair_stats(double rho, double rhohat) {
  BvnModel{rho}.validate();
  BvnModel{rhohat}.validate();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  return CondPairStats{zero,
                       SymMatrix(Eigen::MatrixXd::Constant(1, 1, 1.0)),
                       zero,
                       Eigen::MatrixXd::Constant(1, 1, rho),
                       SymMatrix(Eigen::MatrixXd::Constant(1, 1, 1.0)),
                       zero,
                       Eigen::MatrixXd::Constant(1, 1, rhohat),
                       SymMatrix(Eigen::MatrixXd::Constant(1, 1, 1.0)),
                       0};
}

/// Metric surfaces over a (rho, rhohat) grid.
struct GridResult {
  Eigen::VectorXd rho_axis;
  Eigen::VectorXd rhohat_axis;
  Eigen::MatrixXd squared_diff;  // (rho - rhohat)^2, the reference surface
  Eigen::MatrixXd rfid;
  Eigen::MatrixXd cfid;
};

/// Evaluates (rho - rhohat)^2, RFID and CFID over resolution^2 grid points
/// with both correlations in [-0.99, 0.99].
inline GridResult contour_grid(Eigen::Index resolution) {
  if (resolution < 2) {
    throw InputError("grid resolution must be at least 2, got " +
                     std::to_string(resolution));
  }
  GridResult grid;
  grid.rho_axis = Eigen::VectorXd::LinSpaced(resolution, -0.99, 0.99);
  grid.rhohat_axis = grid.rho_axis;
  grid.squared_diff.resize(resolution, resolution);
  grid.rfid.resize(resolution, resolution);
  grid.cfid.resize(resolution, resolution);
  for (Eigen::Index i = 0; i < resolution; ++i) {
    for (Eigen::Index j = 0; j < resolution; ++j) {
      const double rho = grid.rho_axis(i);
      const double rhohat = grid.rhohat_axis(j);
      const CondPairStats ps = bvn_pair_stats(rho, rhohat);
      grid.squared_diff(i, j) = (rho - rhohat) * (rho - rhohat);
      grid.rfid(i, j) = rfid(ps).value;
      grid.cfid(i, j) = cfid(ps).value;
    }
  }
  return grid;
}

struct AlphaSweepPoint {
  double alpha = 0.0;
  double mfid = 0.0;
  double rfid = 0.0;
  double cfid = 0.0;
};

/// MFID/RFID/CFID of the scalar model pair after rescaling x by each alpha.
/// CFID is invariant; RFID collapses towards MFID as alpha shrinks.
inline std::vector<AlphaSweepPoint> alpha_sweep(double rho, double rhohat,
                                                const std::vector<double>& alphas) {
  const CondPairStats base = bvn_pair_stats(rho, rhohat);
  std::vector<AlphaSweepPoint> out;
  out.reserve(alphas.size());
  for (const double alpha : alphas) {
    const CondPairStats scaled = scale_x(base, alpha);
    out.push_back(AlphaSweepPoint{alpha, mfid(scaled).value, rfid(scaled).value,
                                  cfid(scaled).value});
  }
  return out;
}

}  // namespace cfrechet
