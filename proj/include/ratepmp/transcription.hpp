#pragma once

/**
 * Direct transcription of the rate-constrained OCP (linear dynamics,
 * quadratic costs, box-like sets, componentwise rate bounds) into one
 * dense QP over the stacked decision vector
 *
 *   z = [ x(0); ...; x(T); u(0); ...; u(T-1) ].
 *
 * Rows are emitted in a fixed order and tagged so multipliers can be
 * routed back to the constraint they price:
 *
 *   dynamics(t):     x(t+1) - A_t x(t) - B_t u(t) = c_t   (equalities)
 *   state-box(t,i):  bounds on x_i(t); when x0 is fixed the t=0 rows
 *                    become equalities pinning x(0) = x0
 *   control-box(t,i) bounds on u_i(t)
 *   rate(k,i):       -R(k) <= u_i(k+1) - u_i(k) <= R(k)
 *
 * Rows whose bounds are both infinite are skipped (Whole sets, infinite
 * rate bounds), which lets relaxed problem variants flow through the
 * same path.
 *
 * transcribe_lifted builds the same problem over the extended state
 * w(t) = (x(t), y_0(t), ..., y_{T-2}(t)) with the rate bounds expressed
 * as window-set rows on the auxiliary states instead of rate rows; it
 * exists to let tests confirm that both formulations optimize to the
 * same value.
 */

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ratepmp/lifting.hpp"
#include "ratepmp/ocp.hpp"
#include "ratepmp/qp.hpp"

namespace ratepmp {

struct VariableLayout {
  int T = 0, d = 0, m = 0;
  Eigen::Index x_offset(int t) const { return static_cast<Eigen::Index>(t) * d; }
  Eigen::Index u_offset(int t) const {
    return static_cast<Eigen::Index>(T + 1) * d + static_cast<Eigen::Index>(t) * m;
  }
  Eigen::Index size() const {
    return static_cast<Eigen::Index>(T + 1) * d + static_cast<Eigen::Index>(T) * m;
  }
};

struct RowTag {
  enum class Kind { Dynamics, StateBox, ControlBox, Rate };
  Kind kind = Kind::Dynamics;
  int t = 0;  // time index (the step k for rate rows)
  int i = 0;  // component within the block
};

inline const char* to_string(RowTag::Kind k) {
  switch (k) {
    case RowTag::Kind::Dynamics: return "dynamics";
    case RowTag::Kind::StateBox: return "state-box";
    case RowTag::Kind::ControlBox: return "control-box";
    case RowTag::Kind::Rate: return "rate";
  }
  return "?";
}

struct RateOcpQp {
  OcpSpec spec;
  QpProblem qp;
  VariableLayout layout;
  std::vector<RowTag> row_tags;  // one per row of qp.A
};

namespace detail {

/// Componentwise bounds of a set, for row emission. Throws when the
/// set cannot be represented by independent interval bounds.
inline void set_bounds(const ConvexSet& s, Vec& lo, Vec& hi, const char* what) {
  const double inf = std::numeric_limits<double>::infinity();
  switch (s.kind()) {
    case ConvexSet::Kind::Box:
      lo = s.lower();
      hi = s.upper();
      return;
    case ConvexSet::Kind::Singleton:
      lo = s.point();
      hi = s.point();
      return;
    case ConvexSet::Kind::Whole:
      lo = Vec::Constant(s.dim(), -inf);
      hi = Vec::Constant(s.dim(), inf);
      return;
    case ConvexSet::Kind::NormBall:
      if (s.ball_norm() == Norm::Inf || s.dim() == 1) {
        lo = s.center().array() - s.radius();
        hi = s.center().array() + s.radius();
        return;
      }
      break;
  }
  throw std::invalid_argument(std::string("transcribe: ") + what +
                              " must be box-representable (Euclidean balls in "
                              "dimension > 1 are not)");
}

}  // namespace detail

/// Build the stacked QP. Requires linear dynamics, quadratic costs,
/// box-representable sets, and componentwise (max-norm) rate bounds
/// whenever m > 1.
inline RateOcpQp transcribe(const OcpSpec& spec) {
  spec.validate();
  if (!spec.dynamics.is_ltv())
    throw std::invalid_argument("transcribe: dynamics must be linear time-varying");
  if (!spec.cost.is_quadratic())
    throw std::invalid_argument("transcribe: costs must be quadratic");
  if (spec.rate_norm != Norm::Inf && spec.m > 1)
    throw std::invalid_argument(
        "transcribe: Euclidean rate bounds with m > 1 are not polyhedral");

  const int T = spec.T, d = spec.d, m = spec.m;
  RateOcpQp out;
  out.spec = spec;
  out.layout = VariableLayout{T, d, m};
  const Eigen::Index n = out.layout.size();

  // Objective.
  Mat P = Mat::Zero(n, n);
  Vec q = Vec::Zero(n);
  double offset = 0.0;
  for (int t = 0; t < T; ++t) {
    P.block(out.layout.x_offset(t), out.layout.x_offset(t), d, d) = spec.cost.Q(t);
    P.block(out.layout.u_offset(t), out.layout.u_offset(t), m, m) = spec.cost.R(t);
    q.segment(out.layout.x_offset(t), d) = spec.cost.q(t);
    q.segment(out.layout.u_offset(t), m) = spec.cost.r(t);
    offset += spec.cost.offset(t);
  }
  P.block(out.layout.x_offset(T), out.layout.x_offset(T), d, d) = spec.cost.Qf();
  q.segment(out.layout.x_offset(T), d) = spec.cost.qf();
  offset += spec.cost.terminal_offset();

  // Count rows, then fill.
  struct Row {
    RowTag tag;
    double lo, hi;
  };
  std::vector<Row> rows;

  // Pass 1: row census with bounds; pass 2 writes coefficients.
  Vec lo, hi;
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < d; ++i)
      rows.push_back({{RowTag::Kind::Dynamics, t, i}, 0.0, 0.0});  // bounds set below
  for (int t = 0; t <= T; ++t) {
    if (t == 0 && spec.x0.has_value()) {
      for (int i = 0; i < d; ++i)
        rows.push_back({{RowTag::Kind::StateBox, 0, i}, (*spec.x0)[i], (*spec.x0)[i]});
      continue;
    }
    detail::set_bounds(spec.state_set(t), lo, hi, "state set");
    for (int i = 0; i < d; ++i)
      if (std::isfinite(lo[i]) || std::isfinite(hi[i]))
        rows.push_back({{RowTag::Kind::StateBox, t, i}, lo[i], hi[i]});
  }
  for (int t = 0; t < T; ++t) {
    detail::set_bounds(spec.control_set(t), lo, hi, "control set");
    for (int i = 0; i < m; ++i)
      if (std::isfinite(lo[i]) || std::isfinite(hi[i]))
        rows.push_back({{RowTag::Kind::ControlBox, t, i}, lo[i], hi[i]});
  }
  for (int k = 0; k <= T - 2; ++k) {
    const double r = spec.rate_bound(k);
    if (!std::isfinite(r)) continue;
    for (int i = 0; i < m; ++i)
      rows.push_back({{RowTag::Kind::Rate, k, i}, -r, r});
  }

  const Eigen::Index p = static_cast<Eigen::Index>(rows.size());
  Mat A = Mat::Zero(p, n);
  Vec lower(p), upper(p);
  out.row_tags.reserve(rows.size());
  for (Eigen::Index r = 0; r < p; ++r) {
    const Row& row = rows[static_cast<std::size_t>(r)];
    const int t = row.tag.t, i = row.tag.i;
    switch (row.tag.kind) {
      case RowTag::Kind::Dynamics: {
        A.row(r).segment(out.layout.x_offset(t + 1), d).setZero();
        A(r, out.layout.x_offset(t + 1) + i) = 1.0;
        A.row(r).segment(out.layout.x_offset(t), d) = -spec.dynamics.A(t).row(i);
        A.row(r).segment(out.layout.u_offset(t), m) = -spec.dynamics.B(t).row(i);
        lower[r] = upper[r] = spec.dynamics.c(t)[i];
        break;
      }
      case RowTag::Kind::StateBox:
        A(r, out.layout.x_offset(t) + i) = 1.0;
        lower[r] = row.lo;
        upper[r] = row.hi;
        break;
      case RowTag::Kind::ControlBox:
        A(r, out.layout.u_offset(t) + i) = 1.0;
        lower[r] = row.lo;
        upper[r] = row.hi;
        break;
      case RowTag::Kind::Rate:
        A(r, out.layout.u_offset(t + 1) + i) = 1.0;
        A(r, out.layout.u_offset(t) + i) = -1.0;
        lower[r] = row.lo;
        upper[r] = row.hi;
        break;
    }
    out.row_tags.push_back(row.tag);
  }

  out.qp.P = std::move(P);
  out.qp.q = std::move(q);
  out.qp.A = std::move(A);
  out.qp.lower = std::move(lower);
  out.qp.upper = std::move(upper);
  out.qp.offset = offset;
  return out;
}

/// Extract the trajectory stored in a stacked decision vector.
inline Trajectory unpack(const VariableLayout& layout, const Vec& z) {
  if (z.size() != layout.size())
    throw std::invalid_argument("unpack: decision vector size mismatch");
  Trajectory traj;
  traj.x.reserve(static_cast<std::size_t>(layout.T) + 1);
  traj.u.reserve(static_cast<std::size_t>(layout.T));
  for (int t = 0; t <= layout.T; ++t)
    traj.x.push_back(z.segment(layout.x_offset(t), layout.d));
  for (int t = 0; t < layout.T; ++t)
    traj.u.push_back(z.segment(layout.u_offset(t), layout.m));
  return traj;
}

struct OcpSolveResult {
  Trajectory trajectory;
  QpSolution solution;
  RateOcpQp transcription;
};

/// Transcribe, solve, and unpack. On an optimal status the unpacked
/// trajectory is verified to satisfy the dynamics and all constraints
/// to solver accuracy; a non-optimal status is passed through for the
/// caller to handle.
inline OcpSolveResult solve_ocp(const OcpSpec& spec, const QpSettings& cfg = {}) {
  OcpSolveResult result;
  result.transcription = transcribe(spec);
  result.solution = solve(result.transcription.qp, cfg);
  result.trajectory = unpack(result.transcription.layout, result.solution.z);
  if (result.solution.status == QpStatus::Optimal) {
    const double viol = max_violation(spec, result.trajectory);
    if (viol > kFeasTol)
      throw std::runtime_error(
          "solve_ocp: optimal QP solution violates constraints by " +
          std::to_string(viol));
  }
  return result;
}

/// Layout of the explicitly-lifted QP over w(t) = (x(t), y_k(t)_k).
struct LiftedLayout {
  int T = 0, d = 0, m = 0, q = 0;  // q = d + (T-1) m
  Eigen::Index w_offset(int t) const { return static_cast<Eigen::Index>(t) * q; }
  Eigen::Index x_offset(int t) const { return w_offset(t); }
  Eigen::Index y_offset(int t, int k) const {
    return w_offset(t) + d + static_cast<Eigen::Index>(k) * m;
  }
  Eigen::Index u_offset(int t) const {
    return static_cast<Eigen::Index>(T + 1) * q + static_cast<Eigen::Index>(t) * m;
  }
  Eigen::Index size() const {
    return static_cast<Eigen::Index>(T + 1) * q + static_cast<Eigen::Index>(T) * m;
  }
};

struct LiftedQp {
  QpProblem qp;
  LiftedLayout layout;
};

/// Build the QP over the extended state, with the auxiliary-state
/// dynamics as equalities and every window set Y_t^k emitted as rows.
inline LiftedQp transcribe_lifted(const LiftedProblem& lifted) {
  const OcpSpec& spec = lifted.base;
  if (!spec.dynamics.is_ltv())
    throw std::invalid_argument("transcribe_lifted: dynamics must be linear time-varying");
  if (!spec.cost.is_quadratic())
    throw std::invalid_argument("transcribe_lifted: costs must be quadratic");

  const int T = spec.T, d = spec.d, m = spec.m;
  LiftedQp out;
  out.layout = LiftedLayout{T, d, m, lifted.q};
  const Eigen::Index n = out.layout.size();

  Mat P = Mat::Zero(n, n);
  Vec q = Vec::Zero(n);
  double offset = 0.0;
  for (int t = 0; t < T; ++t) {
    P.block(out.layout.x_offset(t), out.layout.x_offset(t), d, d) = spec.cost.Q(t);
    P.block(out.layout.u_offset(t), out.layout.u_offset(t), m, m) = spec.cost.R(t);
    q.segment(out.layout.x_offset(t), d) = spec.cost.q(t);
    q.segment(out.layout.u_offset(t), m) = spec.cost.r(t);
    offset += spec.cost.offset(t);
  }
  P.block(out.layout.x_offset(T), out.layout.x_offset(T), d, d) = spec.cost.Qf();
  q.segment(out.layout.x_offset(T), d) = spec.cost.qf();
  offset += spec.cost.terminal_offset();

  std::vector<Eigen::RowVectorXd> coeff;
  std::vector<double> lows, highs;
  auto push_row = [&](const Eigen::RowVectorXd& row, double lo, double hi) {
    coeff.push_back(row);
    lows.push_back(lo);
    highs.push_back(hi);
  };

  // Extended dynamics w(t+1) = F(t, w(t), u(t)).
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < d; ++i) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
      row[out.layout.x_offset(t + 1) + i] = 1.0;
      row.segment(out.layout.x_offset(t), d) = -spec.dynamics.A(t).row(i);
      row.segment(out.layout.u_offset(t), m) = -spec.dynamics.B(t).row(i);
      push_row(row, spec.dynamics.c(t)[i], spec.dynamics.c(t)[i]);
    }
    for (int k = 0; k <= T - 2; ++k) {
      for (int i = 0; i < m; ++i) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
        row[out.layout.y_offset(t + 1, k) + i] = 1.0;
        if (t == k) {
          row[out.layout.u_offset(t) + i] = 1.0;  // y(k+1) = -u(k)
        } else if (t == k + 1) {
          row[out.layout.y_offset(t, k) + i] = -1.0;
          row[out.layout.u_offset(t) + i] = -1.0;  // y(k+2) = y(k+1) + u(k+1)
        } else {
          row[out.layout.y_offset(t, k) + i] = -1.0;  // constant otherwise
        }
        push_row(row, 0.0, 0.0);
      }
    }
  }

  // Extended-state membership rows W(t) = M(t) x prod_k Y_t^k.
  Vec lo, hi;
  for (int t = 0; t <= T; ++t) {
    if (t == 0 && spec.x0.has_value()) {
      lo = *spec.x0;
      hi = *spec.x0;
    } else {
      detail::set_bounds(spec.state_set(t), lo, hi, "state set");
    }
    for (int i = 0; i < d; ++i) {
      if (!std::isfinite(lo[i]) && !std::isfinite(hi[i])) continue;
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
      row[out.layout.x_offset(t) + i] = 1.0;
      push_row(row, lo[i], hi[i]);
    }
    for (int k = 0; k <= T - 2; ++k) {
      detail::set_bounds(lifted.y_set(k, t), lo, hi, "window set");
      for (int i = 0; i < m; ++i) {
        if (!std::isfinite(lo[i]) && !std::isfinite(hi[i])) continue;
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
        row[out.layout.y_offset(t, k) + i] = 1.0;
        push_row(row, lo[i], hi[i]);
      }
    }
  }

  // Control membership rows.
  for (int t = 0; t < T; ++t) {
    detail::set_bounds(spec.control_set(t), lo, hi, "control set");
    for (int i = 0; i < m; ++i) {
      if (!std::isfinite(lo[i]) && !std::isfinite(hi[i])) continue;
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
      row[out.layout.u_offset(t) + i] = 1.0;
      push_row(row, lo[i], hi[i]);
    }
  }

  const Eigen::Index p = static_cast<Eigen::Index>(coeff.size());
  Mat A(p, n);
  Vec lower(p), upper(p);
  for (Eigen::Index r = 0; r < p; ++r) {
    A.row(r) = coeff[static_cast<std::size_t>(r)];
    lower[r] = lows[static_cast<std::size_t>(r)];
    upper[r] = highs[static_cast<std::size_t>(r)];
  }

  out.qp.P = std::move(P);
  out.qp.q = std::move(q);
  out.qp.A = std::move(A);
  out.qp.lower = std::move(lower);
  out.qp.upper = std::move(upper);
  out.qp.offset = offset;
  return out;
}

/// Extract the extended trajectory stored in a lifted decision vector.
inline ExtendedTrajectory unpack_lifted(const LiftedLayout& layout, const Vec& z) {
  if (z.size() != layout.size())
    throw std::invalid_argument("unpack_lifted: decision vector size mismatch");
  ExtendedTrajectory ext;
  for (int t = 0; t <= layout.T; ++t)
    ext.x.push_back(z.segment(layout.x_offset(t), layout.d));
  ext.y.resize(static_cast<std::size_t>(layout.T - 1));
  for (int k = 0; k <= layout.T - 2; ++k)
    for (int t = 0; t <= layout.T; ++t)
      ext.y[static_cast<std::size_t>(k)].push_back(
          z.segment(layout.y_offset(t, k), layout.m));
  for (int t = 0; t < layout.T; ++t)
    ext.u.push_back(z.segment(layout.u_offset(t), layout.m));
  return ext;
}

}  // namespace ratepmp
