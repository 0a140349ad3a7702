#pragma once

/**
 * The worked example and its counter-experiment.
 *
 * example_problem builds a rotation-plus-integrator system (planar
 * rotation by a fixed angle with a third integrator state, single
 * input entering the second and third states) under quadratic costs,
 * box state/control constraints, and a constant rate bound:
 *
 *   minimize  sum_t 1/2 (<x,Qx> + <u,Ru>) + |x(T)|^2
 *   s.t.      x in [-8,8] x [-8,8] x [-0.2,8],  |u| <= 1,
 *             |u(t+1) - u(t)| <= 0.75,  T = 30.
 *
 * The default initial state (2,2,1) is a documented choice (the
 * problem statement leaves it open); it drives the optimal command
 * onto the rate bound so the qualitative claims can be exercised.
 * Larger starts (e.g. (4,4,2)) also saturate the control magnitude.
 *
 * naive_clip models an actuator that saturates a pre-designed command
 * in magnitude and then in slew rate; run_naive_experiment designs a
 * control ignoring the input bounds, pushes it through that actuator,
 * and compares the realized cost against the rate-aware design.
 */

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ratepmp/certificate.hpp"
#include "ratepmp/ocp.hpp"
#include "ratepmp/transcription.hpp"

namespace ratepmp {

/// The worked-example problem; `angle` is the planar rotation per step.
inline OcpSpec example_problem(Vec x0 = (Vec(3) << 2.0, 2.0, 1.0).finished(),
                               double angle = M_PI / 4.0, int T = 30) {
  OcpSpec spec;
  spec.T = T;
  spec.d = 3;
  spec.m = 1;
  Mat A(3, 3);
  A << std::cos(angle), -std::sin(angle), 0.0,  //
      std::sin(angle), std::cos(angle), 0.0,    //
      0.0, 0.0, 1.0;
  Mat B(3, 1);
  B << 0.0, 1.0, 1.0;
  spec.dynamics = Dynamics::lti(A, B);
  spec.cost = Cost::lq(Mat::Identity(3, 3), 0.5 * Mat::Identity(1, 1),
                       2.0 * Mat::Identity(3, 3));
  spec.state_sets = {ConvexSet::box((Vec(3) << -8.0, -8.0, -0.2).finished(),
                                    (Vec(3) << 8.0, 8.0, 8.0).finished())};
  spec.control_sets = {ConvexSet::box(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0))};
  spec.rate_bounds = {0.75};
  spec.x0 = std::move(x0);
  spec.validate();
  return spec;
}

enum class ClipOrder { MagnitudeThenRate, RateThenMagnitude };

/// Sequential actuator model: each raw command is clamped to the
/// control set, then to a +-R window around the previously issued
/// command (order selectable). The output satisfies both bounds by
/// construction.
inline std::vector<Vec> naive_clip(const std::vector<Vec>& u_raw, const ConvexSet& u_set,
                                   double rate_bound, const Vec& u_prev_init,
                                   ClipOrder order = ClipOrder::MagnitudeThenRate) {
  if (u_set.kind() != ConvexSet::Kind::Box)
    throw std::invalid_argument("naive_clip: control set must be a box");
  if (u_prev_init.size() != u_set.dim())
    throw std::invalid_argument("naive_clip: u_prev_init dimension mismatch");
  auto clamp_rate = [&](const Vec& v, const Vec& prev) -> Vec {
    const Vec lo = prev.array() - rate_bound;
    const Vec hi = prev.array() + rate_bound;
    return v.cwiseMax(lo).cwiseMin(hi);
  };
  std::vector<Vec> out;
  out.reserve(u_raw.size());
  Vec prev = u_prev_init;
  for (const Vec& raw : u_raw) {
    if (raw.size() != u_set.dim())
      throw std::invalid_argument("naive_clip: command dimension mismatch");
    Vec clipped;
    if (order == ClipOrder::MagnitudeThenRate)
      clipped = clamp_rate(u_set.project(raw), prev);
    else
      clipped = u_set.project(clamp_rate(raw, prev));
    out.push_back(clipped);
    prev = std::move(clipped);
  }
  return out;
}

struct ExperimentRecord {
  OcpSpec spec;                       ///< the rate-aware problem that was solved
  Trajectory designed;                ///< rate-aware optimal trajectory
  double designed_cost = 0.0;
  std::optional<Trajectory> naive;    ///< clipped-command rollout, when run
  std::optional<double> naive_cost;
  std::vector<double> rate_magnitudes;  ///< |u(t+1)-u(t)| recomputed from designed.u
  std::vector<bool> rate_active;        ///< rate bound within 1e-3 of saturation
  std::vector<bool> control_active;     ///< control at a box face within 1e-6
  ResidualReport report;                ///< certificate check of the designed solution
  double max_violation = 0.0;           ///< designed-trajectory constraint violation
  double exact_max_gap = 0.0;           ///< sampled Hamiltonian maximization gap
  double solve_seconds = 0.0;
  std::string x0_note;                  ///< where the initial state came from (default or flag)
};

namespace detail {

inline void fill_activity(const OcpSpec& spec, const Trajectory& traj,
                          ExperimentRecord& rec) {
  rec.rate_magnitudes = control_rates(traj, spec.rate_norm);
  rec.rate_active.clear();
  for (int k = 0; k <= spec.T - 2; ++k)
    rec.rate_active.push_back(
        std::isfinite(spec.rate_bound(k)) &&
        rec.rate_magnitudes[static_cast<std::size_t>(k)] >= spec.rate_bound(k) - 1e-3);
  rec.control_active.clear();
  for (int t = 0; t < spec.T; ++t) {
    const ConvexSet& U = spec.control_set(t);
    bool active = false;
    if (U.kind() == ConvexSet::Kind::Box) {
      const Vec& u = traj.u[static_cast<std::size_t>(t)];
      for (int i = 0; i < spec.m && !active; ++i)
        active = u[i] >= U.upper()[i] - 1e-6 || u[i] <= U.lower()[i] + 1e-6;
    }
    rec.control_active.push_back(active);
  }
}

}  // namespace detail

/// Solve the worked example, recover multipliers, and certify. Throws
/// unless the solver reports optimal, the solution is feasible, the
/// rate bound is active at least once, and the certificate passes.
inline ExperimentRecord run_benchmark(const OcpSpec& spec, const QpSettings& cfg = {},
                                          int max_check_samples = 1000,
                                          unsigned seed = 0) {
  ExperimentRecord rec;
  rec.spec = spec;
  const auto start = std::chrono::steady_clock::now();
  OcpSolveResult solved = solve_ocp(spec, cfg);
  rec.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                          .count();
  if (solved.solution.status != QpStatus::Optimal)
    throw std::runtime_error(std::string("run_benchmark: solver returned ") +
                             to_string(solved.solution.status));
  rec.designed = solved.trajectory;
  rec.designed_cost = total_cost(spec, rec.designed);
  rec.max_violation = max_violation(spec, rec.designed);
  if (rec.max_violation > kFeasTol)
    throw std::runtime_error("run_benchmark: solution violates constraints by " +
                             std::to_string(rec.max_violation));
  detail::fill_activity(spec, rec.designed, rec);
  bool any_rate_active = false;
  for (bool a : rec.rate_active) any_rate_active = any_rate_active || a;
  if (!any_rate_active)
    throw std::runtime_error(
        "run_benchmark: rate bound never active; the instance does not "
        "exercise the rate constraint");
  const PmpCertificate cert =
      recover_multipliers(spec, solved.transcription, solved.solution);
  rec.report = check_certificate(spec, rec.designed, cert);
  if (!rec.report.pass)
    throw std::runtime_error("run_benchmark: certificate check failed:\n" +
                             rec.report.to_text());
  rec.exact_max_gap = exact_max_check(spec, rec.designed, cert, max_check_samples, seed);
  return rec;
}

/// Relax the input-side constraints (control sets and rate bounds) of
/// a problem, keeping dynamics, costs, and state sets.
inline OcpSpec relax_input_constraints(const OcpSpec& spec) {
  OcpSpec relaxed = spec;
  relaxed.control_sets = {ConvexSet::whole(spec.m)};
  relaxed.rate_bounds = {std::numeric_limits<double>::infinity()};
  return relaxed;
}

/// Design a control ignoring the input constraints, clip it through
/// the actuator model, roll it out, and compare costs against the
/// rate-aware design. Throws if the rate-aware design fails to solve
/// or the cost ordering J_naive >= J_designed - 1e-8 is violated.
inline ExperimentRecord run_naive_experiment(const OcpSpec& spec,
                                             const QpSettings& cfg = {},
                                             ClipOrder order = ClipOrder::MagnitudeThenRate) {
  if (!spec.x0.has_value())
    throw std::invalid_argument("run_naive_experiment: initial state must be fixed");

  ExperimentRecord rec;
  rec.spec = spec;
  const auto start = std::chrono::steady_clock::now();
  OcpSolveResult designed = solve_ocp(spec, cfg);
  if (designed.solution.status != QpStatus::Optimal)
    throw std::runtime_error(std::string("run_naive_experiment: rate-aware solve: ") +
                             to_string(designed.solution.status));
  rec.designed = designed.trajectory;
  rec.designed_cost = total_cost(spec, rec.designed);
  rec.max_violation = max_violation(spec, rec.designed);
  detail::fill_activity(spec, rec.designed, rec);
  const PmpCertificate cert =
      recover_multipliers(spec, designed.transcription, designed.solution);
  rec.report = check_certificate(spec, rec.designed, cert);

  OcpSolveResult unconstrained = solve_ocp(relax_input_constraints(spec), cfg);
  if (unconstrained.solution.status != QpStatus::Optimal)
    throw std::runtime_error(std::string("run_naive_experiment: unconstrained solve: ") +
                             to_string(unconstrained.solution.status));

  double rate_bound = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= spec.T - 2; ++k)
    rate_bound = std::min(rate_bound, spec.rate_bound(k));
  const std::vector<Vec> clipped =
      naive_clip(unconstrained.trajectory.u, spec.control_set(0), rate_bound,
                 Vec::Zero(spec.m), order);
  Trajectory naive = rollout(spec, *spec.x0, clipped);
  rec.naive_cost = total_cost(spec, naive);
  rec.naive = std::move(naive);
  rec.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                          .count();

  if (*rec.naive_cost < rec.designed_cost - 1e-8)
    throw std::runtime_error(
        "run_naive_experiment: clipped rollout cost " + std::to_string(*rec.naive_cost) +
        " undercuts the rate-aware design cost " + std::to_string(rec.designed_cost) +
        ", which contradicts optimality of the design");
  return rec;
}

}  // namespace ratepmp
