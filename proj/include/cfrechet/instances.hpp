#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "cfrechet/ot.hpp"
#include "cfrechet/random.hpp"

namespace cfrechet {

/// Two finite-support joints over (x, y) used as one oracle test instance.
struct InstancePair {
  DiscreteJoint a;
  DiscreteJoint b;
};

/// Random pair of joints with an identical x marginal: a common x support
/// and common per-point masses, with independent conditional y supports per
/// joint. Support sizes and dimensions are drawn up to the given caps.
inline InstancePair random_shared_instance(Rng& rng, Eigen::Index max_x_support = 4,
                                           Eigen::Index max_y_support = 5,
                                           Eigen::Index max_dim = 3) {
  const Eigen::Index dx = 1 + static_cast<Eigen::Index>(rng.below(max_dim));
  const Eigen::Index dy = 1 + static_cast<Eigen::Index>(rng.below(max_dim));
  const Eigen::Index kx = 1 + static_cast<Eigen::Index>(rng.below(max_x_support));

  Eigen::MatrixXd x_support(kx, dx);
  for (Eigen::Index i = 0; i < kx; ++i) {
    for (Eigen::Index j = 0; j < dx; ++j) x_support(i, j) = rng.normal();
  }
  Eigen::VectorXd x_mass(kx);
  for (Eigen::Index i = 0; i < kx; ++i) x_mass(i) = rng.uniform();
  x_mass /= x_mass.sum();

  const auto build_joint = [&]() {
    std::vector<Eigen::RowVectorXd> xs, ys;
    std::vector<double> ws;
    for (Eigen::Index g = 0; g < kx; ++g) {
      const Eigen::Index ky = 1 + static_cast<Eigen::Index>(rng.below(max_y_support));
      Eigen::VectorXd cond(ky);
      for (Eigen::Index j = 0; j < ky; ++j) cond(j) = rng.uniform();
      cond /= cond.sum();
      for (Eigen::Index j = 0; j < ky; ++j) {
        Eigen::RowVectorXd y(dy);
        for (Eigen::Index c = 0; c < dy; ++c) y(c) = rng.normal();
        xs.push_back(x_support.row(g));
        ys.push_back(y);
        ws.push_back(x_mass(g) * cond(j));
      }
    }
    DiscreteJoint dj{Eigen::MatrixXd(static_cast<Eigen::Index>(xs.size()), dx),
                     Eigen::MatrixXd(static_cast<Eigen::Index>(xs.size()), dy),
                     Eigen::VectorXd(static_cast<Eigen::Index>(xs.size()))};
    for (std::size_t r = 0; r < xs.size(); ++r) {
      dj.x.row(static_cast<Eigen::Index>(r)) = xs[r];
      dj.y.row(static_cast<Eigen::Index>(r)) = ys[r];
      dj.w(static_cast<Eigen::Index>(r)) = ws[r];
    }
    dj.w /= dj.w.sum();
    return dj;
  };

  InstancePair pair{build_joint(), build_joint()};
  pair.a.validate();
  pair.b.validate();
  return pair;
}

/// The label-shuffling construction: both joints put mass 1/2 on each of two
/// x points; the first pairs y with x, the second pairs y with the opposite
/// x. The y marginals coincide (MWD = 0) while every conditional differs
/// (CWD = 1 under squared-distance cost).
inline InstancePair shuffle_instance() {
  Eigen::MatrixXd x(2, 1), y_paired(2, 1), y_shuffled(2, 1);
  x << 0.0, 1.0;
  y_paired << 0.0, 1.0;
  y_shuffled << 1.0, 0.0;
  Eigen::VectorXd w(2);
  w << 0.5, 0.5;
  return InstancePair{DiscreteJoint{x, y_paired, w}, DiscreteJoint{x, y_shuffled, w}};
}

}  // namespace cfrechet
