#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>

#include "cfrechet/linalg.hpp"
#include "cfrechet/ot.hpp"
#include "cfrechet/random.hpp"
#include "cfrechet/stats.hpp"

namespace cfrechet::testutil {

inline Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

inline Eigen::VectorXd random_vector(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

inline SymMatrix random_psd(Rng& rng, Eigen::Index dim, double ridge = 0.0) {
  const Eigen::MatrixXd g = random_matrix(rng, dim, dim);
  return SymMatrix(g * g.transpose() / static_cast<double>(dim) +
                   ridge * Eigen::MatrixXd::Identity(dim, dim));
}

/// Random shared-x pair statistics: blocks cut out of one positive-definite
/// covariance over the stacked (x, y, yhat) vector, so both induced joints
/// are PSD with margin ridge.
inline CondPairStats random_pair_stats(Rng& rng, Eigen::Index dx, Eigen::Index dy,
                                       double ridge = 0.5) {
  const SymMatrix full = random_psd(rng, dx + 2 * dy, ridge);
  const Eigen::MatrixXd& c = full.mat();
  return CondPairStats{random_vector(rng, dx),
                       SymMatrix(c.block(0, 0, dx, dx)),
                       random_vector(rng, dy),
                       c.block(dx, 0, dy, dx),
                       SymMatrix(c.block(dx, dx, dy, dy)),
                       random_vector(rng, dy),
                       c.block(dx + dy, 0, dy, dx),
                       SymMatrix(c.block(dx + dy, dx + dy, dy, dy)),
                       0};
}

/// Pair statistics whose generated blocks equal the true blocks exactly.
inline CondPairStats perfect_pair_stats(Rng& rng, Eigen::Index dx, Eigen::Index dy,
                                        double ridge = 1.0) {
  const SymMatrix full = random_psd(rng, dx + dy, ridge);
  const Eigen::MatrixXd& c = full.mat();
  const Eigen::VectorXd mean_y = random_vector(rng, dy);
  return CondPairStats{random_vector(rng, dx),
                       SymMatrix(c.block(0, 0, dx, dx)),
                       mean_y,
                       c.block(dx, 0, dy, dx),
                       SymMatrix(c.block(dx, dx, dy, dy)),
                       mean_y,
                       c.block(dx, 0, dy, dx),
                       SymMatrix(c.block(dx, dx, dy, dy)),
                       0};
}

inline CondPairStats swapped(const CondPairStats& ps) {
  return CondPairStats{ps.mean_x, ps.c_xx,       ps.mean_yhat, ps.c_yhatx,
                       ps.c_yhatyhat, ps.mean_y, ps.c_yx,      ps.c_yy,
                       ps.n_samples};
}

/// Random finite-support joint without any shared-marginal structure.
inline DiscreteJoint random_joint(Rng& rng, Eigen::Index k, Eigen::Index dx,
                                  Eigen::Index dy) {
  DiscreteJoint dj{random_matrix(rng, k, dx), random_matrix(rng, k, dy),
                   Eigen::VectorXd(k)};
  for (Eigen::Index i = 0; i < k; ++i) dj.w(i) = rng.uniform();
  dj.w /= dj.w.sum();
  return dj;
}

/// Gauss-Hermite rule for the standard normal: k nodes and probability
/// weights via Golub-Welsch on the Jacobi matrix of the (probabilists')
/// Hermite recurrence. Exact for polynomials up to degree 2k-1.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_hermite_normal(int k) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(k, k);
  for (int i = 1; i < k; ++i) {
    const double b = std::sqrt(static_cast<double>(i));
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  Eigen::VectorXd nodes = es.eigenvalues();
  Eigen::VectorXd weights(k);
  for (int i = 0; i < k; ++i) {
    const double v = es.eigenvectors()(0, i);
    weights(i) = v * v;
  }
  weights /= weights.sum();
  return {std::move(nodes), std::move(weights)};
}

/// Quadrature discretization of the bivariate unit-variance Gaussian with
/// correlation rho: tensor nodes pushed through the Cholesky transform.
/// Instances built with the same k share their x support exactly.
inline DiscreteJoint bvn_quadrature_joint(double rho, int k) {
  const auto [nodes, weights] = gauss_hermite_normal(k);
  const double tail = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  DiscreteJoint dj{Eigen::MatrixXd(k * k, 1), Eigen::MatrixXd(k * k, 1),
                   Eigen::VectorXd(k * k)};
  Eigen::Index r = 0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j, ++r) {
      dj.x(r, 0) = nodes(i);
      dj.y(r, 0) = rho * nodes(i) + tail * nodes(j);
      dj.w(r) = weights(i) * weights(j);
    }
  }
  dj.w /= dj.w.sum();
  return dj;
}

}  // namespace cfrechet::testutil
