#pragma once

/**
 * State lifting that turns per-step control-rate bounds into pointwise
 * state constraints.
 *
 * For each k = 0..T-2 an auxiliary state y_k accumulates the difference
 * u(k+1) - u(k):
 *
 *   y_k(t) = 0 for t <= k,   y_k(k+1) = -u(k),
 *   y_k(k+2) = y_k(k+1) + u(k+1),   y_k(t) = y_k(t-1) afterwards,
 *
 * so y_k(t) = u(k+1) - u(k) for every t >= k+2, and the bound
 * ||u(k+1) - u(k)|| <= R(k) becomes "y_k(t) lies in the radius-R(k)
 * ball" from t = k+2 on. The extended state w(t) = (x(t), y_0(t), ...,
 * y_{T-2}(t)) lives in R^q with q = d + (T-1) m, and the lifted problem
 * constrains w(t) to the product set W(t) = M(t) x Y_t^0 x ... x Y_t^{T-2}.
 *
 * The per-step recursion is linear and invertible: stacking y_k(0..T)
 * gives a unit-lower-triangular system A_k y = rhs(u) with determinant
 * one, which yields exact round-trip maps between original and lifted
 * trajectories (f12 lifts, f21 projects back after a consistency check).
 *
 * The window set Y_{k+1}^k constrains y_k(k+1) = -u(k); since u(k) has
 * to lie in U(k), the consistent choice is the reflection -U(k), used by
 * default. A literal alternative reading that places U(k+1) there is
 * available behind ControlWindowReading::LiteralNext for comparison.
 */

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ratepmp/ocp.hpp"

namespace ratepmp {

enum class ControlWindowReading { ReflectedPrev, LiteralNext };

/// The set {-v : v in s}.
inline ConvexSet reflected(const ConvexSet& s) {
  switch (s.kind()) {
    case ConvexSet::Kind::Box:
      return ConvexSet::box(-s.upper(), -s.lower());
    case ConvexSet::Kind::NormBall:
      return ConvexSet::norm_ball(-s.center(), s.radius(), s.ball_norm());
    case ConvexSet::Kind::Singleton:
      return ConvexSet::singleton(-s.point());
    case ConvexSet::Kind::Whole:
      return s;
  }
  return s;  // unreachable
}

/// Constraint set Y_t^k for the auxiliary state y_k at time t.
inline ConvexSet rate_window_set(
    const OcpSpec& spec, int k, int t,
    ControlWindowReading reading = ControlWindowReading::ReflectedPrev) {
  if (k < 0 || k > spec.T - 2)
    throw std::out_of_range("rate_window_set: k out of range");
  if (t < 0 || t > spec.T)
    throw std::out_of_range("rate_window_set: t out of range");
  if (t <= k) return ConvexSet::singleton(Vec::Zero(spec.m));
  if (t == k + 1)
    return reading == ControlWindowReading::ReflectedPrev
               ? reflected(spec.control_set(k))
               : spec.control_set(k + 1);
  const double radius = spec.rate_bound(k);
  if (!std::isfinite(radius)) return ConvexSet::whole(spec.m);
  return ConvexSet::norm_ball(Vec::Zero(spec.m), radius, spec.rate_norm);
}

/// One step of the auxiliary-state dynamics: the value of y_k(t+1)
/// given y = y_k(t) and u = u(t).
inline Vec g_step(int k, int t, const Vec& y, const Vec& u) {
  if (k < 0 || t < 0) throw std::out_of_range("g_step: negative index");
  if (y.size() != u.size())
    throw std::invalid_argument("g_step: y and u dimensions differ");
  if (t == k) return -u;
  if (t == k + 1) return y + u;
  return y;
}

struct ExtendedTrajectory {
  std::vector<Vec> x;               // T+1 states
  std::vector<std::vector<Vec>> y;  // y[k][t], k = 0..T-2, t = 0..T
  std::vector<Vec> u;               // T controls
};

/// Lift a trajectory by iterating g_step from y_k(0) = 0.
inline ExtendedTrajectory lift_trajectory(const OcpSpec& spec,
                                          const Trajectory& traj) {
  if (traj.u.size() != static_cast<std::size_t>(spec.T))
    throw std::invalid_argument("lift_trajectory: expected T controls");
  ExtendedTrajectory ext;
  ext.x = traj.x;
  ext.u = traj.u;
  ext.y.resize(static_cast<std::size_t>(spec.T - 1));
  for (int k = 0; k <= spec.T - 2; ++k) {
    auto& yk = ext.y[static_cast<std::size_t>(k)];
    yk.resize(static_cast<std::size_t>(spec.T) + 1);
    yk[0] = Vec::Zero(spec.m);
    for (int t = 0; t < spec.T; ++t)
      yk[static_cast<std::size_t>(t) + 1] =
          g_step(k, t, yk[static_cast<std::size_t>(t)],
                 traj.u[static_cast<std::size_t>(t)]);
  }
  return ext;
}

/// Stacked linear system encoding the y_k recursion: a unit lower
/// triangular matrix of size (T+1)m with block rows
///   row 0:    y(0) = 0,
///   row k+1:  y(k+1) = -u(k)            (identity block only),
///   row t:    y(t) - y(t-1) = rhs(t)    otherwise.
inline Mat build_rate_matrix(int k, int T, int m) {
  if (k < 0 || k > T - 2) throw std::out_of_range("build_rate_matrix: k out of range");
  if (m <= 0) throw std::invalid_argument("build_rate_matrix: m must be positive");
  const int N = (T + 1) * m;
  Mat A = Mat::Zero(N, N);
  const Mat I = Mat::Identity(m, m);
  for (int t = 0; t <= T; ++t) {
    A.block(t * m, t * m, m, m) = I;
    if (t != 0 && t != k + 1) A.block(t * m, (t - 1) * m, m, m) = -I;
  }
  return A;
}

/// Right-hand side matching build_rate_matrix: -u(k) in block k+1,
/// +u(k+1) in block k+2, zeros elsewhere. Solving A_k y = rhs gives the
/// stacked sequence y_k(0..T).
inline Vec build_rate_rhs(int k, int T, const std::vector<Vec>& u) {
  if (k < 0 || k > T - 2) throw std::out_of_range("build_rate_rhs: k out of range");
  if (u.size() != static_cast<std::size_t>(T))
    throw std::invalid_argument("build_rate_rhs: expected T controls");
  const Eigen::Index m = u.front().size();
  Vec rhs = Vec::Zero((T + 1) * m);
  rhs.segment((k + 1) * m, m) = -u[static_cast<std::size_t>(k)];
  rhs.segment((k + 2) * m, m) = u[static_cast<std::size_t>(k) + 1];
  return rhs;
}

/// Lift: identical to lift_trajectory, named for its round-trip role.
inline ExtendedTrajectory f12(const OcpSpec& spec, const Trajectory& traj) {
  return lift_trajectory(spec, traj);
}

/// Project an extended trajectory back to (x, u), first verifying that
/// every y block satisfies the lifting recursion to 1e-9 (a violation
/// signals a corrupted lift and throws).
inline Trajectory f21(const OcpSpec& spec, const ExtendedTrajectory& ext) {
  if (ext.y.size() != static_cast<std::size_t>(spec.T - 1))
    throw std::invalid_argument("f21: expected T-1 auxiliary state sequences");
  const ExtendedTrajectory fresh = lift_trajectory(spec, Trajectory{ext.x, ext.u});
  for (int k = 0; k <= spec.T - 2; ++k) {
    const auto& yk = ext.y[static_cast<std::size_t>(k)];
    if (yk.size() != static_cast<std::size_t>(spec.T) + 1)
      throw std::invalid_argument("f21: auxiliary sequence k=" + std::to_string(k) +
                                  " has wrong length");
    for (int t = 0; t <= spec.T; ++t) {
      const Vec& got = yk[static_cast<std::size_t>(t)];
      const Vec& want = fresh.y[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)];
      if (got.size() != want.size() ||
          (got - want).lpNorm<Eigen::Infinity>() > 1e-9)
        throw std::invalid_argument(
            "f21: auxiliary state violates the lifting recursion at k=" +
            std::to_string(k) + ", t=" + std::to_string(t));
    }
  }
  return Trajectory{ext.x, ext.u};
}

/// (J over the original variables, J over the lifted variables). The
/// lifted objective ignores the auxiliary states, so the two values are
/// equal by construction; returned separately for auditing.
inline std::pair<double, double> lifted_cost_equivalence(const OcpSpec& spec,
                                                         const Trajectory& traj) {
  const double original = total_cost(spec, traj);
  const ExtendedTrajectory ext = f12(spec, traj);
  double lifted = 0.0;
  for (int t = 0; t < spec.T; ++t)
    lifted += spec.cost.stage(t, ext.x[static_cast<std::size_t>(t)],
                              ext.u[static_cast<std::size_t>(t)]);
  lifted += spec.cost.terminal(ext.x.back());
  return {original, lifted};
}

/// The lifted problem: base data plus the extended-state geometry.
struct LiftedProblem {
  OcpSpec base;
  int q = 0;  // extended state dimension d + (T-1) m
  ControlWindowReading reading = ControlWindowReading::ReflectedPrev;

  ConvexSet y_set(int k, int t) const { return rate_window_set(base, k, t, reading); }

  /// Factors of W(t) = M(t) x Y_t^0 x ... x Y_t^{T-2}, in that order.
  std::vector<ConvexSet> extended_set_factors(int t) const {
    std::vector<ConvexSet> factors;
    factors.reserve(static_cast<std::size_t>(base.T));
    factors.push_back(base.state_set(t));
    for (int k = 0; k <= base.T - 2; ++k) factors.push_back(y_set(k, t));
    return factors;
  }

  /// Auxiliary-state dynamics of block k at time t.
  Vec g_dynamics(int k, int t, const Vec& y, const Vec& u) const {
    if (k > base.T - 2) throw std::out_of_range("LiftedProblem::g_dynamics: k out of range");
    if (t > base.T - 1) throw std::out_of_range("LiftedProblem::g_dynamics: t out of range");
    return g_step(k, t, y, u);
  }
};

inline LiftedProblem build_lifted(
    const OcpSpec& spec,
    ControlWindowReading reading = ControlWindowReading::ReflectedPrev) {
  spec.validate();
  LiftedProblem lifted;
  lifted.base = spec;
  lifted.q = spec.d + (spec.T - 1) * spec.m;
  lifted.reading = reading;
  return lifted;
}

}  // namespace ratepmp
