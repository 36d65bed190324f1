#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "cfrechet/errors.hpp"
#include "cfrechet/report.hpp"

namespace cfrechet {

/// Finite-support joint distribution over (x, y) points. Duplicate support
/// points are permitted; their weights act additively.
struct DiscreteJoint {
  Eigen::MatrixXd x;  // k x d_x support points, one per row
  Eigen::MatrixXd y;  // k x d_y support points, paired by row
  Eigen::VectorXd w;  // k probability weights

  Eigen::Index size() const { return w.size(); }
  Eigen::Index dim_x() const { return x.cols(); }
  Eigen::Index dim_y() const { return y.cols(); }

  void validate() const {
    if (size() < 1 || x.rows() != size() || y.rows() != size()) {
      throw InputError("discrete joint: points and weights must pair by row");
    }
    if (!x.allFinite() || !y.allFinite() || !w.allFinite()) {
      throw InputError("discrete joint: support contains non-finite values");
    }
    if ((w.array() < 0.0).any()) {
      throw InputError("discrete joint: weights must be nonnegative");
    }
    if (std::abs(w.sum() - 1.0) > 1e-12) {
      throw InputError("discrete joint: weights must sum to 1, got " +
                       std::to_string(w.sum()));
    }
  }
};

/// An optimal transport plan between two weight vectors, together with the
/// objective and the dual potentials of the final basis. The duals certify
/// optimality: u_i + v_j <= cost_ij up to roundoff, with equality on the
/// support of the plan.
struct CouplingPlan {
  Eigen::MatrixXd plan;
  double objective = 0.0;
  Eigen::VectorXd dual_u;
  Eigen::VectorXd dual_v;
};

namespace detail {

// Upper bound on simplex pivots before declaring a cycling failure.
inline int simplex_iteration_cap(Eigen::Index m, Eigen::Index n) {
  return static_cast<int>(200 * (m + n) + 20 * m * n);
}

}  // namespace detail

/// Exact solution of the transportation problem
///   min sum_ij plan_ij cost_ij  s.t.  plan >= 0, row sums = p, col sums = q
/// by the transportation (network) simplex with a northwest-corner start and
/// Dantzig entering rule. Exactness matters here: regularized solvers cannot
/// resolve the metric chain slacks below 1e-9.
inline CouplingPlan solve_ot(const Eigen::MatrixXd& cost, const Eigen::VectorXd& p,
                             const Eigen::VectorXd& q) {
  const Eigen::Index m = p.size();
  const Eigen::Index n = q.size();
  if (m < 1 || n < 1 || cost.rows() != m || cost.cols() != n) {
    throw InputError("solve_ot: cost must be " + std::to_string(m) + "x" +
                     std::to_string(n) + ", got " + std::to_string(cost.rows()) + "x" +
                     std::to_string(cost.cols()));
  }
  if (!cost.allFinite()) {
    throw InputError("solve_ot: cost matrix contains non-finite entries");
  }
  if ((p.array() < 0.0).any() || (q.array() < 0.0).any()) {
    throw InputError("solve_ot: weights must be nonnegative");
  }
  const double mass_p = p.sum();
  const double mass_q = q.sum();
  if (mass_p <= 0.0 || mass_q <= 0.0) {
    throw InputError("solve_ot: weights must carry positive total mass");
  }
  if (std::abs(mass_p - mass_q) > 1e-9 * std::max(1.0, std::max(mass_p, mass_q))) {
    throw InputError("solve_ot: marginal masses differ: " + std::to_string(mass_p) +
                     " vs " + std::to_string(mass_q));
  }

  // Balance the demands exactly against the supplies.
  Eigen::VectorXd supply = p;
  Eigen::VectorXd demand = q * (mass_p / mass_q);

  Eigen::MatrixXd plan = Eigen::MatrixXd::Zero(m, n);
  std::vector<std::vector<char>> basic(m, std::vector<char>(n, 0));
  std::vector<std::vector<int>> row_adj(m);  // basic columns per row
  std::vector<std::vector<int>> col_adj(n);  // basic rows per column

  const auto add_basic = [&](Eigen::Index i, Eigen::Index j) {
    basic[i][j] = 1;
    row_adj[i].push_back(static_cast<int>(j));
    col_adj[j].push_back(static_cast<int>(i));
  };
  const auto drop_basic = [&](Eigen::Index i, Eigen::Index j) {
    basic[i][j] = 0;
    auto& rj = row_adj[i];
    rj.erase(std::find(rj.begin(), rj.end(), static_cast<int>(j)));
    auto& ci = col_adj[j];
    ci.erase(std::find(ci.begin(), ci.end(), static_cast<int>(i)));
  };

  // Northwest-corner start: advances one index per allocation, which yields
  // exactly m+n-1 basic cells forming a spanning staircase (zero allocations
  // included, so degenerate instances keep a full basis).
  {
    Eigen::VectorXd a = supply;
    Eigen::VectorXd b = demand;
    Eigen::Index i = 0;
    Eigen::Index j = 0;
    while (true) {
      const double t = std::min(a(i), b(j));
      plan(i, j) = t;
      add_basic(i, j);
      a(i) -= t;
      b(j) -= t;
      if (i == m - 1 && j == n - 1) break;
      if (i == m - 1) {
        ++j;
      } else if (j == n - 1) {
        ++i;
      } else if (a(i) <= b(j)) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  const double cost_scale = 1.0 + cost.cwiseAbs().maxCoeff();
  const double reduced_cost_tol = 1e-12 * cost_scale;
  const int iteration_cap = detail::simplex_iteration_cap(m, n);

  Eigen::VectorXd u(m);
  Eigen::VectorXd v(n);
  std::vector<char> u_set(m), v_set(n);
  std::deque<int> queue;  // nodes: rows are [0, m), columns are [m, m+n)

  const auto compute_duals = [&]() {
    std::fill(u_set.begin(), u_set.end(), 0);
    std::fill(v_set.begin(), v_set.end(), 0);
    u(0) = 0.0;
    u_set[0] = 1;
    queue.clear();
    queue.push_back(0);
    Eigen::Index assigned = 1;
    while (!queue.empty()) {
      const int node = queue.front();
      queue.pop_front();
      if (node < m) {
        for (const int j : row_adj[node]) {
          if (!v_set[j]) {
            v(j) = cost(node, j) - u(node);
            v_set[j] = 1;
            ++assigned;
            queue.push_back(static_cast<int>(m) + j);
          }
        }
      } else {
        const int j = node - static_cast<int>(m);
        for (const int i : col_adj[j]) {
          if (!u_set[i]) {
            u(i) = cost(i, j) - v(j);
            u_set[i] = 1;
            ++assigned;
            queue.push_back(i);
          }
        }
      }
    }
    if (assigned != m + n) {
      throw NumericalError("solve_ot: basis lost spanning-tree structure");
    }
  };

  std::vector<int> parent(m + n);
  std::vector<char> visited(m + n);

  int iter = 0;
  for (; iter < iteration_cap; ++iter) {
    compute_duals();

    // Entering variable: most negative reduced cost.
    double best = -reduced_cost_tol;
    Eigen::Index bi = -1, bj = -1;
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (!basic[i][j]) {
          const double r = cost(i, j) - u(i) - v(j);
          if (r < best) {
            best = r;
            bi = i;
            bj = j;
          }
        }
      }
    }
    if (bi < 0) break;  // optimal

    // Tree path from column node bj back to row node bi; with the entering
    // cell it closes the unique pivot cycle.
    std::fill(visited.begin(), visited.end(), 0);
    const int start = static_cast<int>(m + bj);
    const int goal = static_cast<int>(bi);
    visited[start] = 1;
    parent[start] = -1;
    queue.clear();
    queue.push_back(start);
    while (!queue.empty()) {
      const int node = queue.front();
      queue.pop_front();
      if (node == goal) break;
      if (node < m) {
        for (const int j : row_adj[node]) {
          const int next = static_cast<int>(m) + j;
          if (!visited[next]) {
            visited[next] = 1;
            parent[next] = node;
            queue.push_back(next);
          }
        }
      } else {
        const int j = node - static_cast<int>(m);
        for (const int i : col_adj[j]) {
          if (!visited[i]) {
            visited[i] = 1;
            parent[i] = node;
            queue.push_back(i);
          }
        }
      }
    }
    if (!visited[goal]) {
      throw NumericalError("solve_ot: basis lost spanning-tree structure");
    }

    // Node path goal -> start, then edges in cycle order from the entering
    // cell: signs alternate -, +, -, ... along the path.
    std::vector<int> path_nodes;
    for (int node = goal; node != -1; node = parent[node]) {
      path_nodes.push_back(node);
    }
    std::reverse(path_nodes.begin(), path_nodes.end());  // start ... goal

    struct CycleCell {
      Eigen::Index i, j;
      int sign;
    };
    std::vector<CycleCell> cycle;
    for (std::size_t k = 0; k + 1 < path_nodes.size(); ++k) {
      const int a = path_nodes[k];
      const int b = path_nodes[k + 1];
      const Eigen::Index row = static_cast<Eigen::Index>(a < m ? a : b);
      const Eigen::Index col = static_cast<Eigen::Index>((a < m ? b : a) - m);
      cycle.push_back({row, col, (k % 2 == 0) ? -1 : +1});
    }

    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave_idx = 0;
    for (std::size_t k = 0; k < cycle.size(); ++k) {
      if (cycle[k].sign < 0 && plan(cycle[k].i, cycle[k].j) < theta) {
        theta = plan(cycle[k].i, cycle[k].j);
        leave_idx = k;
      }
    }

    plan(bi, bj) += theta;
    for (const CycleCell& cell : cycle) {
      plan(cell.i, cell.j) += cell.sign * theta;
      if (plan(cell.i, cell.j) < 0.0) plan(cell.i, cell.j) = 0.0;
    }
    plan(cycle[leave_idx].i, cycle[leave_idx].j) = 0.0;
    drop_basic(cycle[leave_idx].i, cycle[leave_idx].j);
    add_basic(bi, bj);
  }
  if (iter == iteration_cap) {
    throw NumericalError("solve_ot: iteration cap " + std::to_string(iteration_cap) +
                         " exceeded on a " + std::to_string(m) + "x" +
                         std::to_string(n) + " instance");
  }

  CouplingPlan out;
  out.plan = std::move(plan);
  out.objective = (out.plan.array() * cost.array()).sum();
  out.dual_u = std::move(u);
  out.dual_v = std::move(v);
  return out;
}

/// Squared Euclidean distances between the rows of a and the rows of b.
inline Eigen::MatrixXd pairwise_sq_dist(const Eigen::MatrixXd& a,
                                        const Eigen::MatrixXd& b) {
  Eigen::MatrixXd d(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      d(i, j) = (a.row(i) - b.row(j)).squaredNorm();
    }
  }
  return d;
}

namespace detail {

inline MetricReport oracle_report(Metric metric, double value, const DiscreteJoint& a,
                                  const DiscreteJoint& b) {
  MetricReport r;
  r.metric = metric;
  r.value = std::max(value, 0.0);
  r.n_samples = a.size() + b.size();
  r.dim_x = a.dim_x();
  r.dim_y = a.dim_y();
  return r;
}

// Support points of the shared x marginal, canonicalized with a 1e-12 merge
// tolerance and sorted lexicographically so per-x sums run in a fixed order.
struct SharedXGroups {
  std::vector<Eigen::RowVectorXd> points;
  std::vector<std::vector<Eigen::Index>> a_rows;
  std::vector<std::vector<Eigen::Index>> b_rows;
  std::vector<double> a_mass;
  std::vector<double> b_mass;
};

inline constexpr double kXMergeTol = 1e-12;
inline constexpr double kXMarginalTol = 1e-9;

inline SharedXGroups group_by_shared_x(const DiscreteJoint& a, const DiscreteJoint& b,
                                       const char* op) {
  if (a.dim_x() != b.dim_x()) {
    throw InputError(std::string(op) + ": x dimensions differ");
  }
  std::vector<Eigen::RowVectorXd> points;
  const auto find_or_add = [&](const Eigen::RowVectorXd& pt, bool allow_add) {
    for (std::size_t g = 0; g < points.size(); ++g) {
      if ((points[g] - pt).cwiseAbs().maxCoeff() <= kXMergeTol) {
        return static_cast<std::ptrdiff_t>(g);
      }
    }
    if (!allow_add) return static_cast<std::ptrdiff_t>(-1);
    points.push_back(pt);
    return static_cast<std::ptrdiff_t>(points.size() - 1);
  };

  std::vector<std::ptrdiff_t> a_group(a.size()), b_group(b.size());
  for (Eigen::Index r = 0; r < a.size(); ++r) {
    a_group[r] = find_or_add(a.x.row(r), true);
  }
  for (Eigen::Index r = 0; r < b.size(); ++r) {
    b_group[r] = find_or_add(b.x.row(r), true);
  }

  // Canonical order: lexicographic over coordinates.
  std::vector<std::size_t> order(points.size());
  for (std::size_t g = 0; g < order.size(); ++g) order[g] = g;
  std::sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
    const Eigen::RowVectorXd& pl = points[lhs];
    const Eigen::RowVectorXd& pr = points[rhs];
    for (Eigen::Index c = 0; c < pl.size(); ++c) {
      if (pl(c) != pr(c)) return pl(c) < pr(c);
    }
    return false;
  });
  std::vector<std::size_t> rank(points.size());
  for (std::size_t k = 0; k < order.size(); ++k) rank[order[k]] = k;

  SharedXGroups groups;
  groups.points.resize(points.size());
  groups.a_rows.resize(points.size());
  groups.b_rows.resize(points.size());
  groups.a_mass.assign(points.size(), 0.0);
  groups.b_mass.assign(points.size(), 0.0);
  for (std::size_t g = 0; g < points.size(); ++g) {
    groups.points[rank[g]] = points[g];
  }
  for (Eigen::Index r = 0; r < a.size(); ++r) {
    const std::size_t g = rank[static_cast<std::size_t>(a_group[r])];
    groups.a_rows[g].push_back(r);
    groups.a_mass[g] += a.w(r);
  }
  for (Eigen::Index r = 0; r < b.size(); ++r) {
    const std::size_t g = rank[static_cast<std::size_t>(b_group[r])];
    groups.b_rows[g].push_back(r);
    groups.b_mass[g] += b.w(r);
  }

  for (std::size_t g = 0; g < groups.points.size(); ++g) {
    if (std::abs(groups.a_mass[g] - groups.b_mass[g]) > kXMarginalTol) {
      throw InputError(std::string(op) +
                       ": the two joints do not share an x marginal (mass " +
                       std::to_string(groups.a_mass[g]) + " vs " +
                       std::to_string(groups.b_mass[g]) + " at one support point)");
    }
  }
  return groups;
}

}  // namespace detail

/// Marginal distance: exact OT between the y marginals, cost ||y - yhat||^2.
inline MetricReport mwd_discrete(const DiscreteJoint& a, const DiscreteJoint& b) {
  a.validate();
  b.validate();
  if (a.dim_y() != b.dim_y()) {
    throw InputError("mwd_discrete: y dimensions differ");
  }
  const CouplingPlan cp = solve_ot(pairwise_sq_dist(a.y, b.y), a.w, b.w);
  return detail::oracle_report(Metric::MWD, cp.objective, a, b);
}

/// Restricted distance: exact OT between the full joints with cost
/// ||y - yhat||^2 + ||x - xhat||^2.
inline MetricReport rwd_discrete(const DiscreteJoint& a, const DiscreteJoint& b) {
  a.validate();
  b.validate();
  if (a.dim_x() != b.dim_x() || a.dim_y() != b.dim_y()) {
    throw InputError("rwd_discrete: point dimensions differ");
  }
  const Eigen::MatrixXd cost = pairwise_sq_dist(a.y, b.y) + pairwise_sq_dist(a.x, b.x);
  const CouplingPlan cp = solve_ot(cost, a.w, b.w);
  return detail::oracle_report(Metric::RWD, cp.objective, a, b);
}

/// Three-variable restricted distance: coupling over (y, yhat, x) with both
/// joint marginals prescribed and cost on the outputs only. The constraints
/// decouple across distinct x values, so it is solved per x support point on
/// the unnormalized conditional masses and summed in canonical x order.
/// Requires the two joints to share their x marginal.
inline MetricReport rwd3_discrete(const DiscreteJoint& a, const DiscreteJoint& b) {
  a.validate();
  b.validate();
  if (a.dim_y() != b.dim_y()) {
    throw InputError("rwd3_discrete: y dimensions differ");
  }
  const detail::SharedXGroups groups = detail::group_by_shared_x(a, b, "rwd3_discrete");
  double total = 0.0;
  for (std::size_t g = 0; g < groups.points.size(); ++g) {
    const auto& ra = groups.a_rows[g];
    const auto& rb = groups.b_rows[g];
    // One-sided or negligible groups carry mass below the marginal tolerance.
    if (ra.empty() || rb.empty() ||
        std::max(groups.a_mass[g], groups.b_mass[g]) <= 1e-15) {
      continue;
    }
    Eigen::MatrixXd cost(ra.size(), rb.size());
    Eigen::VectorXd p(ra.size()), q(rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) {
      p(static_cast<Eigen::Index>(i)) = a.w(ra[i]);
      for (std::size_t j = 0; j < rb.size(); ++j) {
        cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            (a.y.row(ra[i]) - b.y.row(rb[j])).squaredNorm();
      }
    }
    for (std::size_t j = 0; j < rb.size(); ++j) {
      q(static_cast<Eigen::Index>(j)) = b.w(rb[j]);
    }
    total += solve_ot(cost, p, q).objective;
  }
  return detail::oracle_report(Metric::RWD3, total, a, b);
}

/// Conditional distance: the x-marginal-weighted sum of exact OT distances
/// between the normalized conditionals given each shared x support point.
inline MetricReport cwd_discrete(const DiscreteJoint& a, const DiscreteJoint& b) {
  a.validate();
  b.validate();
  if (a.dim_y() != b.dim_y()) {
    throw InputError("cwd_discrete: y dimensions differ");
  }
  const detail::SharedXGroups groups = detail::group_by_shared_x(a, b, "cwd_discrete");
  double total = 0.0;
  for (std::size_t g = 0; g < groups.points.size(); ++g) {
    const double mass = 0.5 * (groups.a_mass[g] + groups.b_mass[g]);
    const auto& ra = groups.a_rows[g];
    const auto& rb = groups.b_rows[g];
    if (ra.empty() || rb.empty() || groups.a_mass[g] <= 1e-15 ||
        groups.b_mass[g] <= 1e-15) {
      continue;
    }
    Eigen::MatrixXd cost(ra.size(), rb.size());
    Eigen::VectorXd p(ra.size()), q(rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) {
      p(static_cast<Eigen::Index>(i)) = a.w(ra[i]) / groups.a_mass[g];
      for (std::size_t j = 0; j < rb.size(); ++j) {
        cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            (a.y.row(ra[i]) - b.y.row(rb[j])).squaredNorm();
      }
    }
    for (std::size_t j = 0; j < rb.size(); ++j) {
      q(static_cast<Eigen::Index>(j)) = b.w(rb[j]) / groups.b_mass[g];
    }
    total += mass * solve_ot(cost, p, q).objective;
  }
  return detail::oracle_report(Metric::CWD, total, a, b);
}

/// Exact squared W2 between two equal-size empirical measures on the line:
/// the optimal coupling is the sorted one, so the value is the mean of
/// squared order-statistic differences. Independent 1-D oracle.
inline double quantile_w2_1d(const std::vector<double>& samples_a,
                             const std::vector<double>& samples_b) {
  if (samples_a.size() != samples_b.size() || samples_a.empty()) {
    throw InputError("quantile_w2_1d: needs two equal-size non-empty sample sets");
  }
  for (std::size_t i = 1; i < samples_a.size(); ++i) {
    if (samples_a[i] < samples_a[i - 1] || samples_b[i] < samples_b[i - 1]) {
      throw InputError("quantile_w2_1d: samples must be sorted ascending");
    }
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < samples_a.size(); ++i) {
    const double d = samples_a[i] - samples_b[i];
    sum += d * d;
  }
  return sum / static_cast<double>(samples_a.size());
}

}  // namespace cfrechet
