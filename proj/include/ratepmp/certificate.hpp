#pragma once

/**
 * First-order optimality certificates for the rate-constrained problem.
 *
 * A certificate bundles the cost multiplier psi0 with four multiplier
 * families: eta_f (dynamics), eta_x (state sets), eta_g (auxiliary
 * dynamics), and eta_y (rate window sets). check_certificate evaluates
 * every stationarity condition numerically and reports one residual per
 * condition family; recover_multipliers builds a certificate from the
 * dual vector of a solved transcription.
 *
 * Index conventions (T = horizon):
 *   eta_f[s]    = eta_f(s-1)   for s = 0..T, so eta_f(-1) is stored at 0
 *   eta_x[t]    = eta_x(t)     for t = 0..T
 *   eta_g[k][s] = eta_g^k(s-1) for k = 0..T-2, s = 0..T
 *   eta_y[k][t] = eta_y^k(t)   for k = 0..T-2, t = 0..T
 *
 * All residuals are max-norm based. The Hamiltonian at time t is
 *
 *   H(t) = <eta_f(t), f(t,x,u)> + <eta_g^{t-1}(t) - eta_g^t(t), u>
 *          - psi0 c(t,x,u),
 *
 * with eta_g indices outside 0..T-2 read as zero.
 *
 * Sign conventions (fixed, pinned by the regression tests):
 *   - eta_f(t) equals the dynamics-row dual of the transcription,
 *   - eta_x(t) equals minus the state-box dual,
 *   - eta_y^k is supported at t = k+2 with value minus the rate-row
 *     dual (sigma = -1); the chain recursion then yields
 *     eta_g^k(t) = -mu_k on t in {k, k+1} and zero elsewhere.
 * Under these choices the u-gradient of H equals the control-box dual,
 * so the maximization condition holds with equality at box faces.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "ratepmp/convex_set.hpp"
#include "ratepmp/defaults.hpp"
#include "ratepmp/lifting.hpp"
#include "ratepmp/ocp.hpp"
#include "ratepmp/qp.hpp"
#include "ratepmp/transcription.hpp"

namespace ratepmp {

struct PmpCertificate {
  double psi0 = 1.0;
  std::vector<Vec> eta_f;               ///< size T+1; [s] holds eta_f(s-1)
  std::vector<Vec> eta_x;               ///< size T+1; [t] holds eta_x(t)
  std::vector<std::vector<Vec>> eta_g;  ///< (T-1) x (T+1); [k][s] holds eta_g^k(s-1)
  std::vector<std::vector<Vec>> eta_y;  ///< (T-1) x (T+1); [k][t] holds eta_y^k(t)

  int horizon() const { return static_cast<int>(eta_f.size()) - 1; }

  const Vec& eta_f_at(int t) const { return eta_f.at(static_cast<std::size_t>(t + 1)); }
  const Vec& eta_x_at(int t) const { return eta_x.at(static_cast<std::size_t>(t)); }
  const Vec& eta_y_at(int k, int t) const {
    return eta_y.at(static_cast<std::size_t>(k)).at(static_cast<std::size_t>(t));
  }
  /// eta_g^k(t); returns zero for block indices outside 0..T-2.
  Vec eta_g_at(int k, int t) const {
    const int T = horizon();
    if (k < 0 || k > T - 2) {
      const int m = eta_g.empty() || eta_g.front().empty()
                        ? 0
                        : static_cast<int>(eta_g.front().front().size());
      return Vec::Zero(m);
    }
    return eta_g.at(static_cast<std::size_t>(k)).at(static_cast<std::size_t>(t + 1));
  }

  /// Shape check against problem dimensions; throws on mismatch.
  void validate(int T, int d, int m) const {
    auto fail = [](const std::string& what) {
      throw std::invalid_argument("PmpCertificate: " + what);
    };
    if (!(psi0 >= 0.0)) fail("psi0 must be >= 0");
    if (static_cast<int>(eta_f.size()) != T + 1) fail("eta_f must have T+1 entries");
    if (static_cast<int>(eta_x.size()) != T + 1) fail("eta_x must have T+1 entries");
    if (static_cast<int>(eta_g.size()) != T - 1) fail("eta_g must have T-1 blocks");
    if (static_cast<int>(eta_y.size()) != T - 1) fail("eta_y must have T-1 blocks");
    for (const Vec& v : eta_f)
      if (v.size() != d) fail("eta_f entries must have dimension d");
    for (const Vec& v : eta_x)
      if (v.size() != d) fail("eta_x entries must have dimension d");
    for (const auto& block : eta_g) {
      if (static_cast<int>(block.size()) != T + 1) fail("eta_g blocks must have T+1 entries");
      for (const Vec& v : block)
        if (v.size() != m) fail("eta_g entries must have dimension m");
    }
    for (const auto& block : eta_y) {
      if (static_cast<int>(block.size()) != T + 1) fail("eta_y blocks must have T+1 entries");
      for (const Vec& v : block)
        if (v.size() != m) fail("eta_y entries must have dimension m");
    }
  }
};

/// H(t, x, u) for one time step given the multipliers that touch it.
/// `eta_g_prev_t` is eta_g^{t-1}(t) and `eta_g_cur_t` is eta_g^t(t);
/// pass zero vectors when the block index falls outside 0..T-2.
inline double hamiltonian(const OcpSpec& spec, int t, double psi0, const Vec& eta_f_t,
                          const Vec& eta_g_prev_t, const Vec& eta_g_cur_t, const Vec& x,
                          const Vec& u) {
  return eta_f_t.dot(spec.dynamics.value(t, x, u)) + (eta_g_prev_t - eta_g_cur_t).dot(u) -
         psi0 * spec.cost.stage(t, x, u);
}

/// Analytic u-gradient of the Hamiltonian.
inline Vec hamiltonian_grad_u(const OcpSpec& spec, int t, double psi0, const Vec& eta_f_t,
                              const Vec& eta_g_prev_t, const Vec& eta_g_cur_t, const Vec& x,
                              const Vec& u) {
  return spec.dynamics.jac_u(t, x, u).transpose() * eta_f_t + (eta_g_prev_t - eta_g_cur_t) -
         psi0 * spec.cost.stage_grad_u(t, x, u);
}

/// Analytic x-gradient of the Hamiltonian.
inline Vec hamiltonian_grad_x(const OcpSpec& spec, int t, double psi0, const Vec& eta_f_t,
                              const Vec& /*eta_g_prev_t*/, const Vec& /*eta_g_cur_t*/,
                              const Vec& x, const Vec& u) {
  return spec.dynamics.jac_x(t, x, u).transpose() * eta_f_t -
         psi0 * spec.cost.stage_grad_x(t, x, u);
}

/// Max violation of the recursion coupling eta_g to eta_y:
///   eta_g^k(T-1) = eta_y^k(T),
///   eta_g^k(t-1) = eta_y^k(t)              at t = k,
///   eta_g^k(t-1) = eta_g^k(t) + eta_y^k(t) at t != k,   t = 0..T-1.
inline double chain_residual(const PmpCertificate& cert,
                             std::vector<double>* by_block = nullptr) {
  const int T = cert.horizon();
  double worst = 0.0;
  if (by_block) by_block->assign(static_cast<std::size_t>(std::max(T - 1, 0)), 0.0);
  for (int k = 0; k <= T - 2; ++k) {
    double v = (cert.eta_g_at(k, T - 1) - cert.eta_y_at(k, T)).lpNorm<Eigen::Infinity>();
    for (int t = 0; t <= T - 1; ++t) {
      Vec target = cert.eta_y_at(k, t);
      if (t != k) target += cert.eta_g_at(k, t);
      v = std::max(v, (cert.eta_g_at(k, t - 1) - target).lpNorm<Eigen::Infinity>());
    }
    if (by_block) (*by_block)[static_cast<std::size_t>(k)] = v;
    worst = std::max(worst, v);
  }
  return worst;
}

struct ResidualReport {
  int T = 0;
  double eps = kCertTol;

  // Verdict residuals: pass iff every one is <= eps.
  double r_state_dyn = 0.0;       ///< max_t |x(t+1) - f(t, x(t), u(t))|
  double r_adjoint = 0.0;         ///< max_t |eta_f(t-1) - dH/dx(t) - eta_x(t)|
  double r_chain = 0.0;           ///< recursion coupling eta_g to eta_y
  double r_transversality = 0.0;  ///< boundary conditions + multiplier sign conditions
  double r_hmax = 0.0;            ///< stationarity of H over the control set
  double r_sign = 0.0;            ///< max(0, -psi0)
  double r_nontriv = 0.0;         ///< 0 if (psi0, eta_f) not identically zero, else 1
  bool pass = false;

  // Per-time / per-block breakdown.
  std::vector<double> state_dyn_by_t;  ///< size T
  std::vector<double> adjoint_by_t;    ///< size T (condition indexed by t)
  std::vector<double> hmax_by_t;       ///< size T
  std::vector<double> chain_by_k;      ///< size T-1
  std::vector<double> sign_x_by_t;     ///< size T+1: polar-cone gap of eta_x(t)
  std::vector<double> sign_y_by_k;     ///< size T-1: max_t polar-cone gap of eta_y^k(t)

  // Transversality breakdown (each contributes to r_transversality).
  double trans_eta_f_initial = 0.0;  ///< |eta_f(-1)|
  double trans_grad_initial = 0.0;   ///< |dH/dx(0) + eta_x(0)|
  double trans_eta_x_terminal = 0.0; ///< |eta_x(T) - eta_x(T-1)|
  double trans_sign = 0.0;           ///< max over sign_x_by_t and sign_y_by_k

  // Informational lines, excluded from the verdict.
  double h_terminal = 0.0;           ///< |H(T)| under the time-T convention
  double terminal_adjoint_gap = 0.0; ///< |eta_f(T-1) + psi0 grad c_F(x(T)) - eta_x(T)|

  std::vector<std::string> notes;

  std::string to_text() const;
};

namespace detail {

inline void append_line(std::string& out, const char* fmt, ...)
#if defined(__GNUC__)
    __attribute__((format(printf, 2, 3)))
#endif
    ;
inline void append_line(std::string& out, const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  out += buf;
  out += '\n';
}

}  // namespace detail

inline std::string ResidualReport::to_text() const {
  std::string out;
  detail::append_line(out, "certificate check (tolerance %.3g)", eps);
  detail::append_line(out, "  %-18s %12.5e", "r_state_dyn", r_state_dyn);
  detail::append_line(out, "  %-18s %12.5e", "r_adjoint", r_adjoint);
  detail::append_line(out, "  %-18s %12.5e", "r_chain", r_chain);
  detail::append_line(out, "  %-18s %12.5e", "r_transversality", r_transversality);
  detail::append_line(out, "  %-18s %12.5e", "r_hmax", r_hmax);
  detail::append_line(out, "  %-18s %12.5e", "r_sign", r_sign);
  detail::append_line(out, "  %-18s %12.5e", "r_nontriv", r_nontriv);
  detail::append_line(out, "  verdict: %s", pass ? "PASS" : "FAIL");
  detail::append_line(out, "  transversality breakdown:");
  detail::append_line(out, "    %-24s %12.5e", "initial-adjoint |eta_f(-1)|",
                      trans_eta_f_initial);
  detail::append_line(out, "    %-24s %12.5e", "initial-gradient", trans_grad_initial);
  detail::append_line(out, "    %-24s %12.5e", "terminal eta_x gap", trans_eta_x_terminal);
  detail::append_line(out, "    %-24s %12.5e", "multiplier sign gap", trans_sign);
  detail::append_line(out,
                      "  informational (convention-dependent, not part of the verdict):");
  detail::append_line(out, "    %-24s %12.5e", "|H(T)| (time-T convention)", h_terminal);
  detail::append_line(out, "    %-24s %12.5e", "terminal adjoint tie", terminal_adjoint_gap);
  if (!state_dyn_by_t.empty()) {
    detail::append_line(out, "  per-step residuals:");
    detail::append_line(out, "    %4s %12s %12s %12s %12s", "t", "state_dyn", "adjoint",
                        "hmax", "sign_x");
    for (std::size_t t = 0; t < state_dyn_by_t.size(); ++t)
      detail::append_line(out, "    %4zu %12.5e %12.5e %12.5e %12.5e", t, state_dyn_by_t[t],
                          adjoint_by_t[t], hmax_by_t[t], sign_x_by_t[t]);
    if (sign_x_by_t.size() > state_dyn_by_t.size())
      detail::append_line(out, "    %4zu %12s %12s %12s %12.5e", state_dyn_by_t.size(), "-",
                          "-", "-", sign_x_by_t.back());
  }
  if (!chain_by_k.empty()) {
    detail::append_line(out, "  per-block residuals:");
    detail::append_line(out, "    %4s %12s %12s", "k", "chain", "sign_y");
    for (std::size_t k = 0; k < chain_by_k.size(); ++k)
      detail::append_line(out, "    %4zu %12.5e %12.5e", k, chain_by_k[k], sign_y_by_k[k]);
  }
  for (const std::string& n : notes) detail::append_line(out, "  note: %s", n.c_str());
  return out;
}

namespace detail {

/// Evaluation point for cone tests: the trajectory point when it lies
/// in the set, otherwise its projection (infeasibility is already
/// captured by the primal residuals).
inline Vec cone_point(const ConvexSet& set, const Vec& p, bool& projected) {
  if (set.contains(p, kFeasTol)) return p;
  projected = true;
  return set.project(p);
}

}  // namespace detail

/// Evaluate every certificate condition on (traj, cert) and collect the
/// residuals. `control_tents`, when given, supplies one explicit cone
/// per time step to use in place of the control set's supporting cone
/// for the maximization residual.
inline ResidualReport check_certificate(const OcpSpec& spec, const Trajectory& traj,
                                        const PmpCertificate& cert,
                                        const std::vector<ConvexSet>* control_tents = nullptr,
                                        double eps = kCertTol) {
  spec.validate();
  const int T = spec.T, d = spec.d, m = spec.m;
  cert.validate(T, d, m);
  if (static_cast<int>(traj.x.size()) != T + 1 || static_cast<int>(traj.u.size()) != T)
    throw std::invalid_argument("check_certificate: trajectory shape mismatch");
  if (control_tents && static_cast<int>(control_tents->size()) != T)
    throw std::invalid_argument("check_certificate: control_tents must have T entries");

  ResidualReport rep;
  rep.T = T;
  rep.eps = eps;
  rep.state_dyn_by_t.assign(static_cast<std::size_t>(T), 0.0);
  rep.adjoint_by_t.assign(static_cast<std::size_t>(T), 0.0);
  rep.hmax_by_t.assign(static_cast<std::size_t>(T), 0.0);
  rep.sign_x_by_t.assign(static_cast<std::size_t>(T) + 1, 0.0);
  rep.sign_y_by_k.assign(static_cast<std::size_t>(T - 1), 0.0);

  bool projected = false;

  // (c) state dynamics.
  int argmax_dyn = 0;
  for (int t = 0; t < T; ++t) {
    const double v = (traj.x[static_cast<std::size_t>(t) + 1] -
                      spec.dynamics.value(t, traj.x[static_cast<std::size_t>(t)],
                                          traj.u[static_cast<std::size_t>(t)]))
                         .lpNorm<Eigen::Infinity>();
    rep.state_dyn_by_t[static_cast<std::size_t>(t)] = v;
    if (v > rep.r_state_dyn) {
      rep.r_state_dyn = v;
      argmax_dyn = t;
    }
  }
  if (rep.r_state_dyn > eps)
    rep.notes.push_back("state-dynamics residual attains its maximum at t=" +
                        std::to_string(argmax_dyn));

  // (d) adjoint recursion eta_f(t-1) = dH/dx(t) + eta_x(t), t = 0..T-1.
  for (int t = 0; t < T; ++t) {
    const Vec grad =
        hamiltonian_grad_x(spec, t, cert.psi0, cert.eta_f_at(t), cert.eta_g_at(t - 1, t),
                           cert.eta_g_at(t, t), traj.x[static_cast<std::size_t>(t)],
                           traj.u[static_cast<std::size_t>(t)]);
    const double v =
        (cert.eta_f_at(t - 1) - grad - cert.eta_x_at(t)).lpNorm<Eigen::Infinity>();
    rep.adjoint_by_t[static_cast<std::size_t>(t)] = v;
    rep.r_adjoint = std::max(rep.r_adjoint, v);
  }

  // Chain recursion coupling eta_g to eta_y.
  rep.r_chain = chain_residual(cert, &rep.chain_by_k);

  // (f) Hamiltonian stationarity over the control set (or tents).
  for (int t = 0; t < T; ++t) {
    const Vec grad =
        hamiltonian_grad_u(spec, t, cert.psi0, cert.eta_f_at(t), cert.eta_g_at(t - 1, t),
                           cert.eta_g_at(t, t), traj.x[static_cast<std::size_t>(t)],
                           traj.u[static_cast<std::size_t>(t)]);
    const ConvexSet& tent =
        control_tents ? (*control_tents)[static_cast<std::size_t>(t)] : spec.control_set(t);
    const Vec point = detail::cone_point(tent, traj.u[static_cast<std::size_t>(t)], projected);
    const double v = tent.normal_cone_residual(point, grad, kFeasTol);
    rep.hmax_by_t[static_cast<std::size_t>(t)] = v;
    rep.r_hmax = std::max(rep.r_hmax, v);
  }

  // Multiplier sign conditions: eta_x(t) against M(t) at x(t), eta_y^k(t)
  // against the window set at y_k(t). With a fixed initial state the
  // t = 0 set is the singleton {x0}, making that condition vacuous.
  for (int t = 0; t <= T; ++t) {
    const ConvexSet& set = (t == 0) ? spec.effective_initial_set() : spec.state_set(t);
    const Vec point = detail::cone_point(set, traj.x[static_cast<std::size_t>(t)], projected);
    rep.sign_x_by_t[static_cast<std::size_t>(t)] =
        set.polar_cone_violation(point, cert.eta_x_at(t), kFeasTol);
  }
  const ExtendedTrajectory ext = lift_trajectory(spec, traj);
  for (int k = 0; k <= T - 2; ++k) {
    double worst = 0.0;
    for (int t = 0; t <= T; ++t) {
      const ConvexSet set = rate_window_set(spec, k, t);
      const Vec point = detail::cone_point(
          set, ext.y[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)], projected);
      worst = std::max(worst, set.polar_cone_violation(point, cert.eta_y_at(k, t), kFeasTol));
    }
    rep.sign_y_by_k[static_cast<std::size_t>(k)] = worst;
  }
  rep.trans_sign = 0.0;
  for (double v : rep.sign_x_by_t) rep.trans_sign = std::max(rep.trans_sign, v);
  for (double v : rep.sign_y_by_k) rep.trans_sign = std::max(rep.trans_sign, v);

  // (e) transversality: the three boundary identities plus the sign
  // conditions above. |H(T)| is evaluated with the substitution
  // eta_f(T) := eta_x(T), u(T) := u(T-1) and reported separately; it
  // never enters the verdict.
  rep.trans_eta_f_initial = cert.eta_f_at(-1).lpNorm<Eigen::Infinity>();
  {
    const Vec grad0 =
        hamiltonian_grad_x(spec, 0, cert.psi0, cert.eta_f_at(0), cert.eta_g_at(-1, 0),
                           cert.eta_g_at(0, 0), traj.x[0], traj.u[0]);
    rep.trans_grad_initial = (grad0 + cert.eta_x_at(0)).lpNorm<Eigen::Infinity>();
  }
  rep.trans_eta_x_terminal =
      (cert.eta_x_at(T) - cert.eta_x_at(T - 1)).lpNorm<Eigen::Infinity>();
  rep.r_transversality = std::max({rep.trans_eta_f_initial, rep.trans_grad_initial,
                                   rep.trans_eta_x_terminal, rep.trans_sign});

  rep.h_terminal = std::abs(
      hamiltonian(spec, T - 1, cert.psi0, cert.eta_x_at(T), cert.eta_g_at(T - 2, T - 1),
                  cert.eta_g_at(T - 1, T - 1), traj.x[static_cast<std::size_t>(T)],
                  traj.u[static_cast<std::size_t>(T) - 1]));
  rep.terminal_adjoint_gap =
      (cert.eta_f_at(T - 1) +
       cert.psi0 * spec.cost.terminal_grad(traj.x[static_cast<std::size_t>(T)]) -
       cert.eta_x_at(T))
          .lpNorm<Eigen::Infinity>();

  // (a), (b): non-negativity and nontriviality of (psi0, eta_f).
  rep.r_sign = std::max(0.0, -cert.psi0);
  double lift_magnitude = cert.psi0;
  for (const Vec& v : cert.eta_f)
    lift_magnitude = std::max(lift_magnitude, v.lpNorm<Eigen::Infinity>());
  rep.r_nontriv = lift_magnitude > 0.0 ? 0.0 : 1.0;

  if (projected)
    rep.notes.push_back(
        "some trajectory points lay outside their sets; cone conditions were "
        "evaluated at the projections");

  rep.pass = rep.r_state_dyn <= eps && rep.r_adjoint <= eps && rep.r_chain <= eps &&
             rep.r_transversality <= eps && rep.r_hmax <= eps && rep.r_sign <= eps &&
             rep.r_nontriv <= eps;
  return rep;
}

/// Build a certificate from the dual vector of a solved transcription.
/// psi0 is fixed to 1 (normal lift). Throws unless the solution status
/// is optimal.
inline PmpCertificate recover_multipliers(const OcpSpec& spec, const RateOcpQp& rateqp,
                                          const QpSolution& sol) {
  if (sol.status != QpStatus::Optimal)
    throw std::invalid_argument("recover_multipliers: solution status must be optimal, got " +
                                std::string(to_string(sol.status)));
  const int T = spec.T, d = spec.d, m = spec.m;
  if (sol.dual.size() != rateqp.qp.p())
    throw std::invalid_argument("recover_multipliers: dual size mismatch");

  // Route row duals to their constraint families.
  std::vector<Vec> dyn_dual(static_cast<std::size_t>(T), Vec::Zero(d));
  std::vector<Vec> state_dual(static_cast<std::size_t>(T) + 1, Vec::Zero(d));
  std::vector<Vec> rate_dual(static_cast<std::size_t>(std::max(T - 1, 0)), Vec::Zero(m));
  for (Eigen::Index r = 0; r < rateqp.qp.p(); ++r) {
    const RowTag& tag = rateqp.row_tags[static_cast<std::size_t>(r)];
    switch (tag.kind) {
      case RowTag::Kind::Dynamics:
        dyn_dual[static_cast<std::size_t>(tag.t)][tag.i] = sol.dual[r];
        break;
      case RowTag::Kind::StateBox:
        state_dual[static_cast<std::size_t>(tag.t)][tag.i] = sol.dual[r];
        break;
      case RowTag::Kind::Rate:
        rate_dual[static_cast<std::size_t>(tag.t)][tag.i] = sol.dual[r];
        break;
      case RowTag::Kind::ControlBox:
        break;  // absorbed by the maximization condition
    }
  }

  PmpCertificate cert;
  cert.psi0 = 1.0;
  cert.eta_f.assign(static_cast<std::size_t>(T) + 1, Vec::Zero(d));
  cert.eta_x.assign(static_cast<std::size_t>(T) + 1, Vec::Zero(d));
  cert.eta_g.assign(static_cast<std::size_t>(T - 1),
                    std::vector<Vec>(static_cast<std::size_t>(T) + 1, Vec::Zero(m)));
  cert.eta_y = cert.eta_g;

  for (int t = 0; t < T; ++t)
    cert.eta_f[static_cast<std::size_t>(t) + 1] = dyn_dual[static_cast<std::size_t>(t)];
  for (int t = 0; t <= T; ++t)
    cert.eta_x[static_cast<std::size_t>(t)] = -state_dual[static_cast<std::size_t>(t)];

  // eta_y^k is supported at the first instant the window set can bind
  // (t = k+2); the chain recursion below then determines eta_g^k.
  for (int k = 0; k <= T - 2; ++k)
    cert.eta_y[static_cast<std::size_t>(k)][static_cast<std::size_t>(k) + 2] =
        -rate_dual[static_cast<std::size_t>(k)];
  for (int k = 0; k <= T - 2; ++k) {
    auto& g = cert.eta_g[static_cast<std::size_t>(k)];
    const auto& y = cert.eta_y[static_cast<std::size_t>(k)];
    g[static_cast<std::size_t>(T - 1) + 1] = y[static_cast<std::size_t>(T)];
    for (int t = T - 1; t >= 0; --t) {
      Vec value = y[static_cast<std::size_t>(t)];
      if (t != k) value += g[static_cast<std::size_t>(t) + 1];
      g[static_cast<std::size_t>(t - 1) + 1] = value;
    }
  }
  return cert;
}

namespace detail {

/// Element `index` (1-based) of the van der Corput sequence in `base`.
inline double halton(long long index, int base) {
  double f = 1.0, value = 0.0;
  while (index > 0) {
    f /= base;
    value += f * static_cast<double>(index % base);
    index /= base;
  }
  return value;
}

inline int nth_prime(int n) {
  static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                               31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
  if (n < 0 || n >= static_cast<int>(sizeof(primes) / sizeof(primes[0])))
    throw std::invalid_argument("halton dimension too large");
  return primes[n];
}

/// Deterministic candidate controls inside `U`: the box vertices plus
/// `n_samples` low-discrepancy interior points (projected into the set
/// for Euclidean balls).
inline std::vector<Vec> max_check_samples(const ConvexSet& U, int n_samples,
                                          long long offset) {
  std::vector<Vec> pts;
  const int m = U.dim();
  if (U.kind() == ConvexSet::Kind::Singleton) {
    pts.push_back(U.point());
    return pts;
  }
  if (!U.is_bounded())
    throw std::invalid_argument("exact_max_check: control set must be compact");

  Vec lo(m), hi(m);
  if (U.kind() == ConvexSet::Kind::Box) {
    lo = U.lower();
    hi = U.upper();
  } else {  // NormBall
    lo = U.center().array() - U.radius();
    hi = U.center().array() + U.radius();
  }
  if (m <= 20) {
    for (long long mask = 0; mask < (1LL << m); ++mask) {
      Vec v(m);
      for (int i = 0; i < m; ++i) v[i] = (mask >> i) & 1 ? hi[i] : lo[i];
      pts.push_back(U.kind() == ConvexSet::Kind::Box ? v : U.project(v));
    }
  }
  for (long long s = 0; s < n_samples; ++s) {
    Vec v(m);
    for (int i = 0; i < m; ++i) {
      const double z = halton(offset + s + 1, nth_prime(i));
      v[i] = lo[i] + (hi[i] - lo[i]) * z;
    }
    pts.push_back(U.kind() == ConvexSet::Kind::Box ? v : U.project(v));
  }
  return pts;
}

}  // namespace detail

/// Largest positive gap max_u H(t, x*(t), u) - H(t, x*(t), u*(t)) found
/// by deterministic sampling of each control set (low-discrepancy
/// points plus box vertices). Requires linear or control-affine
/// dynamics, stage costs convex in u, and compact convex control sets;
/// `seed` shifts the sampling offset for reproducibility studies.
inline double exact_max_check(const OcpSpec& spec, const Trajectory& traj,
                              const PmpCertificate& cert, int n_samples,
                              unsigned seed = 0) {
  spec.validate();
  cert.validate(spec.T, spec.d, spec.m);
  if (spec.dynamics.kind() == Dynamics::Kind::Smooth)
    throw std::invalid_argument(
        "exact_max_check: requires linear or control-affine dynamics");
  if (!spec.cost.is_quadratic())
    throw std::invalid_argument("exact_max_check: requires quadratic stage costs");
  for (int t = 0; t < spec.T; ++t) {
    Eigen::SelfAdjointEigenSolver<Mat> es(spec.cost.R(t));
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw std::invalid_argument(
          "exact_max_check: stage cost must be convex in the control");
  }

  double gap = 0.0;
  for (int t = 0; t < spec.T; ++t) {
    const Vec& x = traj.x[static_cast<std::size_t>(t)];
    const Vec& u_star = traj.u[static_cast<std::size_t>(t)];
    const Vec eta_f_t = cert.eta_f_at(t);
    const Vec lam_prev = cert.eta_g_at(t - 1, t);
    const Vec lam_cur = cert.eta_g_at(t, t);
    const double h_star =
        hamiltonian(spec, t, cert.psi0, eta_f_t, lam_prev, lam_cur, x, u_star);
    const std::vector<Vec> samples = detail::max_check_samples(
        spec.control_set(t), n_samples, static_cast<long long>(seed) * 7919);
    for (const Vec& u : samples) {
      const double h = hamiltonian(spec, t, cert.psi0, eta_f_t, lam_prev, lam_cur, x, u);
      gap = std::max(gap, h - h_star);
    }
  }
  return gap;
}

}  // namespace ratepmp
