#pragma once

/**
 * Rate-constrained discrete-time optimal control problem:
 *
 *   minimize    sum_{t=0}^{T-1} c(t, x(t), u(t)) + c_F(x(T))
 *   subject to  x(t+1) = f(t, x(t), u(t)),      t = 0..T-1,
 *               x(t) in M(t),                   t = 0..T,
 *               u(t) in U(t),                   t = 0..T-1,
 *               ||u(t+1) - u(t)|| <= R(t),      t = 0..T-2,
 *
 * minimized over the controls and, unless x0 is fixed, over x(0) as
 * well. The rate norm is the max norm by default (componentwise bound,
 * which keeps the transcription polyhedral); the Euclidean norm is
 * accepted for feasibility and certificate checking.
 */

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ratepmp/convex_set.hpp"
#include "ratepmp/cost.hpp"
#include "ratepmp/defaults.hpp"
#include "ratepmp/dynamics.hpp"

namespace ratepmp {

struct Trajectory {
  std::vector<Vec> x;  // T+1 states
  std::vector<Vec> u;  // T controls
};

struct OcpSpec {
  int T = 0;  // horizon, >= 2
  int d = 0;  // state dimension
  int m = 0;  // control dimension

  Dynamics dynamics;
  Cost cost;

  // Each sequence holds either one entry (applied at every time) or the
  // exact count: T+1 state sets, T control sets, T-1 rate bounds.
  std::vector<ConvexSet> state_sets;
  std::vector<ConvexSet> control_sets;
  std::vector<double> rate_bounds;  // entries > 0; +infinity disables a bound
  Norm rate_norm = Norm::Inf;

  // Fixed initial state; disengaged means x(0) is a free decision
  // variable constrained only by M(0).
  std::optional<Vec> x0;

  const ConvexSet& state_set(int t) const {
    return pick(state_sets, t, T + 1, "state_sets");
  }
  const ConvexSet& control_set(int t) const {
    return pick(control_sets, t, T, "control_sets");
  }
  double rate_bound(int k) const {
    if (rate_bounds.size() == 1) return rate_bounds.front();
    if (k < 0 || k >= T - 1)
      throw std::out_of_range("OcpSpec::rate_bound: index out of range");
    return rate_bounds[static_cast<std::size_t>(k)];
  }

  /// The set effectively constraining x(0): the singleton {x0} when the
  /// initial state is fixed, M(0) otherwise.
  ConvexSet effective_initial_set() const {
    if (x0.has_value()) return ConvexSet::singleton(*x0);
    return state_set(0);
  }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const {
    if (T < 2) throw std::invalid_argument("OcpSpec: horizon T must be >= 2");
    if (d <= 0) throw std::invalid_argument("OcpSpec: state dimension d must be positive");
    if (m <= 0) throw std::invalid_argument("OcpSpec: control dimension m must be positive");
    if (!dynamics.valid()) throw std::invalid_argument("OcpSpec: dynamics not set");
    if (!cost.valid()) throw std::invalid_argument("OcpSpec: cost not set");
    if (dynamics.state_dim() != d || dynamics.control_dim() != m)
      throw std::invalid_argument("OcpSpec: dynamics dimensions disagree with d/m");
    if (cost.state_dim() != d || cost.control_dim() != m)
      throw std::invalid_argument("OcpSpec: cost dimensions disagree with d/m");
    check_count(state_sets.size(), static_cast<std::size_t>(T) + 1, "state_sets");
    check_count(control_sets.size(), static_cast<std::size_t>(T), "control_sets");
    check_count(rate_bounds.size(), static_cast<std::size_t>(T) - 1, "rate_bounds");
    for (const ConvexSet& s : state_sets)
      if (s.dim() != d)
        throw std::invalid_argument("OcpSpec: state_sets entry has dimension != d");
    for (const ConvexSet& s : control_sets)
      if (s.dim() != m)
        throw std::invalid_argument("OcpSpec: control_sets entry has dimension != m");
    for (double r : rate_bounds)
      if (!(r > 0.0))
        throw std::invalid_argument("OcpSpec: rate_bounds entries must be positive");
    if (x0.has_value()) {
      if (x0->size() != d)
        throw std::invalid_argument("OcpSpec: x0 has dimension != d");
      if (!state_set(0).contains(*x0, kSetTol))
        throw std::invalid_argument("OcpSpec: x0 is not a member of M(0)");
    }
  }

 private:
  static void check_count(std::size_t got, std::size_t want, const char* field) {
    if (got != want && got != 1)
      throw std::invalid_argument(std::string("OcpSpec: ") + field + " must have " +
                                  std::to_string(want) + " entries (or 1 to broadcast), got " +
                                  std::to_string(got));
  }

  const ConvexSet& pick(const std::vector<ConvexSet>& v, int t, int count,
                        const char* field) const {
    if (v.size() == 1) return v.front();
    if (t < 0 || t >= count || static_cast<std::size_t>(t) >= v.size())
      throw std::out_of_range(std::string("OcpSpec::") + field + ": index out of range");
    return v[static_cast<std::size_t>(t)];
  }
};

/// Forward simulation of the dynamics from x0 under the given controls.
inline Trajectory rollout(const OcpSpec& spec, const Vec& x0,
                          const std::vector<Vec>& u) {
  if (x0.size() != spec.d)
    throw std::invalid_argument("rollout: x0 has dimension != d");
  if (u.size() != static_cast<std::size_t>(spec.T))
    throw std::invalid_argument("rollout: expected T controls");
  Trajectory traj;
  traj.x.reserve(static_cast<std::size_t>(spec.T) + 1);
  traj.u = u;
  traj.x.push_back(x0);
  for (int t = 0; t < spec.T; ++t) {
    if (u[static_cast<std::size_t>(t)].size() != spec.m)
      throw std::invalid_argument("rollout: control has dimension != m");
    traj.x.push_back(spec.dynamics.value(t, traj.x.back(),
                                         u[static_cast<std::size_t>(t)]));
  }
  return traj;
}

/// Objective value of a trajectory.
inline double total_cost(const OcpSpec& spec, const Trajectory& traj) {
  if (traj.x.size() != static_cast<std::size_t>(spec.T) + 1 ||
      traj.u.size() != static_cast<std::size_t>(spec.T))
    throw std::invalid_argument("total_cost: trajectory length mismatch");
  double J = 0.0;
  for (int t = 0; t < spec.T; ++t)
    J += spec.cost.stage(t, traj.x[static_cast<std::size_t>(t)],
                         traj.u[static_cast<std::size_t>(t)]);
  return J + spec.cost.terminal(traj.x.back());
}

/// Per-step control rate magnitudes ||u(t+1) - u(t)||, t = 0..T-2.
inline std::vector<double> control_rates(const Trajectory& traj,
                                         Norm norm = Norm::Inf) {
  std::vector<double> rates;
  if (traj.u.size() < 2) return rates;
  rates.reserve(traj.u.size() - 1);
  for (std::size_t t = 0; t + 1 < traj.u.size(); ++t) {
    const Vec delta = traj.u[t + 1] - traj.u[t];
    rates.push_back(norm == Norm::Two ? delta.norm()
                                      : delta.lpNorm<Eigen::Infinity>());
  }
  return rates;
}

/// Largest constraint violation of a trajectory: dynamics defects, set
/// distances (in the max norm, via Euclidean projection), rate-bound
/// exceedances, and the x0 mismatch when the initial state is fixed.
inline double max_violation(const OcpSpec& spec, const Trajectory& traj) {
  if (traj.x.size() != static_cast<std::size_t>(spec.T) + 1 ||
      traj.u.size() != static_cast<std::size_t>(spec.T))
    throw std::invalid_argument("max_violation: trajectory length mismatch");
  double v = 0.0;
  auto set_dist = [](const ConvexSet& s, const Vec& p) {
    return (p - s.project(p)).lpNorm<Eigen::Infinity>();
  };
  for (int t = 0; t < spec.T; ++t) {
    const Vec pred = spec.dynamics.value(t, traj.x[static_cast<std::size_t>(t)],
                                         traj.u[static_cast<std::size_t>(t)]);
    v = std::max(v, (traj.x[static_cast<std::size_t>(t) + 1] - pred)
                        .lpNorm<Eigen::Infinity>());
    v = std::max(v, set_dist(spec.control_set(t), traj.u[static_cast<std::size_t>(t)]));
  }
  for (int t = 0; t <= spec.T; ++t)
    v = std::max(v, set_dist(spec.state_set(t), traj.x[static_cast<std::size_t>(t)]));
  if (spec.x0.has_value())
    v = std::max(v, (traj.x.front() - *spec.x0).lpNorm<Eigen::Infinity>());
  const std::vector<double> rates = control_rates(traj, spec.rate_norm);
  for (int k = 0; k + 1 < spec.T; ++k)
    v = std::max(v, rates[static_cast<std::size_t>(k)] - spec.rate_bound(k));
  return v;
}

/// True when max_violation(spec, traj) <= tol.
inline bool is_feasible(const OcpSpec& spec, const Trajectory& traj,
                        double tol = kFeasTol) {
  return max_violation(spec, traj) <= tol;
}

}  // namespace ratepmp
