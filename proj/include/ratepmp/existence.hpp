#pragma once

/**
 * Structural existence diagnostics for the constrained OCP.
 *
 * Two sufficient routes are screened, mirroring the classical
 * Weierstrass argument for finite-horizon problems:
 *
 *  route A (compactness): the effective initial-state set and every
 *    control set are nonempty and compact; all state sets are closed;
 *    dynamics continuous and costs lower semicontinuous.
 *
 *  route B (coercivity): initial-state/control sets merely closed,
 *    the same continuity requirements, and the first stage cost is
 *    weakly coercive — certified structurally when it is quadratic
 *    with Q and R positive definite (smallest eigenvalue > 1e-10).
 *
 * Verdicts are {pass, fail, assumed, not-established}. "assumed" marks
 * routes that hold only if user-supplied smooth callables are in fact
 * continuous, which a structural inspection cannot decide. This is a
 * sufficient-condition checker: a failing route is never a proof of
 * nonexistence. Rate bounds only intersect extra closed sets into the
 * feasible region and never affect either route.
 */

#include <Eigen/Eigenvalues>

#include <string>
#include <vector>

#include "ratepmp/ocp.hpp"

namespace ratepmp {

enum class ExistenceVerdict { Pass, Fail, Assumed, NotEstablished };

inline const char* to_string(ExistenceVerdict v) {
  switch (v) {
    case ExistenceVerdict::Pass: return "pass";
    case ExistenceVerdict::Fail: return "fail";
    case ExistenceVerdict::Assumed: return "assumed";
    case ExistenceVerdict::NotEstablished: return "not-established";
  }
  return "?";
}

struct ExistenceReport {
  ExistenceVerdict route_a = ExistenceVerdict::NotEstablished;
  ExistenceVerdict route_b = ExistenceVerdict::NotEstablished;
  // Ingredients, for reporting.
  ExistenceVerdict compact_sets = ExistenceVerdict::NotEstablished;   // route A (a)
  ExistenceVerdict closed_sets = ExistenceVerdict::Pass;              // (b): all variants closed
  ExistenceVerdict continuity = ExistenceVerdict::NotEstablished;     // (c)-(d)
  ExistenceVerdict coercivity = ExistenceVerdict::NotEstablished;     // route B extra
  std::vector<std::string> notes;
};

namespace detail {

inline bool positive_definite(const Mat& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
  return es.info() == Eigen::Success && es.eigenvalues().minCoeff() > 1e-10;
}

}  // namespace detail

inline ExistenceReport check_existence(const OcpSpec& spec) {
  ExistenceReport report;

  // (a) compactness of the effective initial-state set and all control
  // sets. All representable sets are closed, so bounded <=> compact.
  bool compact = spec.effective_initial_set().is_bounded();
  if (!compact)
    report.notes.push_back("initial-state set is unbounded");
  for (int t = 0; t < spec.T && compact; ++t) {
    if (!spec.control_set(t).is_bounded()) {
      compact = false;
      report.notes.push_back("control set at t=" + std::to_string(t) +
                             " is unbounded");
    }
  }
  report.compact_sets = compact ? ExistenceVerdict::Pass : ExistenceVerdict::Fail;

  // (b) closedness holds for every representable set variant.
  report.closed_sets = ExistenceVerdict::Pass;

  // (c)-(d) continuity of f and lower semicontinuity of the costs:
  // structural for linear/control-affine dynamics and quadratic costs,
  // assumed (not verifiable) for user-supplied smooth callables.
  const bool opaque_dynamics = spec.dynamics.kind() == Dynamics::Kind::Smooth;
  const bool opaque_cost = spec.cost.kind() == Cost::Kind::Smooth;
  if (opaque_dynamics)
    report.notes.push_back("continuity of user-supplied dynamics is assumed");
  if (opaque_cost)
    report.notes.push_back("lower semicontinuity of user-supplied cost is assumed");
  report.continuity = (opaque_dynamics || opaque_cost)
                          ? ExistenceVerdict::Assumed
                          : ExistenceVerdict::Pass;

  // Relative-interior caveat: singleton control sets technically
  // violate the nonempty-relative-interior requirement of the problem
  // class; permitted, but flagged.
  for (int t = 0; t < spec.T; ++t) {
    if (spec.control_set(t).kind() == ConvexSet::Kind::Singleton) {
      report.notes.push_back(
          "control set at t=" + std::to_string(t) +
          " is a singleton (relative-interior assumption not met)");
      break;
    }
  }

  // Route A verdict.
  if (report.compact_sets == ExistenceVerdict::Fail)
    report.route_a = ExistenceVerdict::Fail;
  else
    report.route_a = report.continuity;  // Pass or Assumed

  // Route B: closedness always holds; coercivity of the first stage
  // cost is certified for positive-definite quadratics only.
  if (spec.cost.is_quadratic() && detail::positive_definite(spec.cost.Q(0)) &&
      detail::positive_definite(spec.cost.R(0)))
    report.coercivity = ExistenceVerdict::Pass;
  else
    report.coercivity = ExistenceVerdict::NotEstablished;
  if (report.coercivity != ExistenceVerdict::Pass)
    report.route_b = ExistenceVerdict::NotEstablished;
  else
    report.route_b = report.continuity;  // Pass or Assumed

  return report;
}

}  // namespace ratepmp
