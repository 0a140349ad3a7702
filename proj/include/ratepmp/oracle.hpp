#pragma once

/**
 * Brute-force reference solver: enumerates control sequences on a
 * componentwise grid over each control set and rolls the dynamics
 * forward, keeping the cheapest sequence that satisfies the state,
 * control, and rate constraints. Exponential in the horizon, so it is
 * only meant to cross-check the QP path on tiny problems; the total
 * number of leaf combinations is capped.
 *
 * Tie-breaking is deterministic: candidates are enumerated in
 * lexicographic order (time-major, then component-major, values
 * ascending) and only a strictly better cost replaces the incumbent,
 * so among equal-cost optima the lexicographically smallest control
 * sequence wins.
 */

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ratepmp/defaults.hpp"
#include "ratepmp/ocp.hpp"

namespace ratepmp {

struct OracleResult {
  Trajectory trajectory;       ///< best feasible trajectory found (valid iff feasible)
  double cost = std::numeric_limits<double>::infinity();
  bool feasible = false;       ///< true when at least one grid sequence is feasible
  long long nodes = 0;         ///< candidate evaluations performed
};

/// Grid-search the control space. Requires a fixed initial state and
/// bounded Box or Singleton control sets. `points_per_dim >= 2` grid
/// points are placed per control component (Singletons contribute one
/// candidate). Throws when the total number of control-sequence
/// combinations exceeds `max_combinations`.
inline OracleResult brute_force_oracle(const OcpSpec& spec, int points_per_dim,
                                       double max_combinations = 1e7) {
  spec.validate();
  if (!spec.x0.has_value())
    throw std::invalid_argument("brute_force_oracle: initial state must be fixed");
  if (points_per_dim < 2)
    throw std::invalid_argument("brute_force_oracle: points_per_dim must be >= 2");

  const int T = spec.T, m = spec.m;
  const double rate_tol = 1e-12;

  // Candidate controls per step, in lexicographic order.
  std::vector<std::vector<Vec>> candidates(static_cast<std::size_t>(T));
  double combinations = 1.0;
  for (int t = 0; t < T; ++t) {
    const ConvexSet& U = spec.control_set(t);
    std::vector<Vec>& cand = candidates[static_cast<std::size_t>(t)];
    if (U.kind() == ConvexSet::Kind::Singleton) {
      cand.push_back(U.point());
    } else if (U.kind() == ConvexSet::Kind::Box) {
      if (!U.is_bounded())
        throw std::invalid_argument(
            "brute_force_oracle: control set at t=" + std::to_string(t) +
            " is unbounded");
      std::vector<int> idx(static_cast<std::size_t>(m), 0);
      while (true) {
        Vec u(m);
        for (int i = 0; i < m; ++i) {
          const double lo = U.lower()[i], hi = U.upper()[i];
          u[i] = lo + (hi - lo) * idx[static_cast<std::size_t>(i)] /
                          (points_per_dim - 1);
        }
        cand.push_back(u);
        int j = m - 1;  // increment last component fastest
        while (j >= 0 && ++idx[static_cast<std::size_t>(j)] == points_per_dim) {
          idx[static_cast<std::size_t>(j)] = 0;
          --j;
        }
        if (j < 0) break;
      }
    } else {
      throw std::invalid_argument(
          "brute_force_oracle: control set at t=" + std::to_string(t) +
          " must be a box or a singleton");
    }
    combinations *= static_cast<double>(cand.size());
  }
  if (combinations > max_combinations)
    throw std::invalid_argument(
        "brute_force_oracle: grid has " + std::to_string(combinations) +
        " control sequences, above the cap of " + std::to_string(max_combinations));

  OracleResult best;
  std::vector<Vec> x_stack(static_cast<std::size_t>(T) + 1);
  std::vector<Vec> u_stack(static_cast<std::size_t>(T));
  x_stack[0] = *spec.x0;
  if (!spec.state_set(0).contains(x_stack[0], kSetTol)) return best;

  std::function<void(int, double)> visit = [&](int t, double acc) {
    if (t == T) {
      const double total = acc + spec.cost.terminal(x_stack[static_cast<std::size_t>(T)]);
      if (total < best.cost) {
        best.cost = total;
        best.feasible = true;
        best.trajectory.x = x_stack;
        best.trajectory.u = u_stack;
      }
      return;
    }
    const Vec& x = x_stack[static_cast<std::size_t>(t)];
    for (const Vec& u : candidates[static_cast<std::size_t>(t)]) {
      ++best.nodes;
      if (t >= 1) {
        const double r = spec.rate_bound(t - 1);
        if (std::isfinite(r)) {
          const Vec delta = u - u_stack[static_cast<std::size_t>(t - 1)];
          const double rate = spec.rate_norm == Norm::Inf
                                  ? delta.lpNorm<Eigen::Infinity>()
                                  : delta.norm();
          if (rate > r + rate_tol) continue;
        }
      }
      Vec x_next = spec.dynamics.value(t, x, u);
      if (!spec.state_set(t + 1).contains(x_next, kSetTol)) continue;
      u_stack[static_cast<std::size_t>(t)] = u;
      x_stack[static_cast<std::size_t>(t + 1)] = std::move(x_next);
      visit(t + 1, acc + spec.cost.stage(t, x, u));
    }
  };
  visit(0, 0.0);
  return best;
}

}  // namespace ratepmp
