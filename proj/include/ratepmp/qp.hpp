#pragma once

/**
 * Dense convex QP solver with dual extraction:
 *
 *   minimize    1/2 z'Pz + q'z            (+ constant offset)
 *   subject to  l <= Az <= u              (rows with l = u are equalities)
 *
 * The solver is an over-relaxed operator-splitting (ADMM) iteration on
 * the condensed system K = P + sigma*I + A' diag(rho) A, with per-row
 * penalties (equality rows are weighted 1e3 heavier), residual-balanced
 * adaptation of the penalty within a clamped range, and an active-set
 * polish step that solves the KKT equality system (with tiny
 * regularization plus iterative refinement) and is accepted only when
 * it reduces the measured residuals.
 *
 * Dual convention: the reported multipliers satisfy
 *     L = 1/2 z'Pz + q'z + dual'(Az - active bound),
 * so stationarity reads Pz + q + A'dual = 0, dual_i >= 0 at active
 * upper bounds, dual_i <= 0 at active lower bounds, and dual_i = 0 on
 * inactive rows.
 *
 * Problems of the size this library produces (a few hundred variables)
 * are solved in milliseconds; everything is deterministic: fixed
 * iteration order, no randomization, no threads.
 */

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "ratepmp/convex_set.hpp"
#include "ratepmp/defaults.hpp"
#include "ratepmp/log.hpp"

namespace ratepmp {

struct QpProblem {
  Mat P;       // n x n symmetric positive semidefinite
  Vec q;       // n
  Mat A;       // p x n (p may be zero)
  Vec lower;   // p, entries may be -inf
  Vec upper;   // p, entries may be +inf
  double offset = 0.0;  // constant term of the objective

  Eigen::Index n() const { return P.rows(); }
  Eigen::Index p() const { return A.rows(); }

  double objective(const Vec& z) const {
    return 0.5 * z.dot(P * z) + q.dot(z) + offset;
  }

  /// Throws std::invalid_argument on structural defects. The PSD check
  /// uses the smallest eigenvalue with tolerance -1e-9.
  void validate() const {
    if (P.rows() != P.cols())
      throw std::invalid_argument("QpProblem: P must be square");
    if (q.size() != P.rows())
      throw std::invalid_argument("QpProblem: q size mismatch");
    if (A.size() > 0 && A.cols() != P.rows())
      throw std::invalid_argument("QpProblem: A column count mismatch");
    if (lower.size() != A.rows() || upper.size() != A.rows())
      throw std::invalid_argument("QpProblem: bound size mismatch");
    if ((P - P.transpose()).lpNorm<Eigen::Infinity>() > 1e-9)
      throw std::invalid_argument("QpProblem: P is not symmetric");
    for (Eigen::Index i = 0; i < lower.size(); ++i)
      if (!(lower[i] <= upper[i]))
        throw std::invalid_argument("QpProblem: lower > upper in row " +
                                    std::to_string(i));
    Eigen::SelfAdjointEigenSolver<Mat> es(P, Eigen::EigenvaluesOnly);
    if (es.info() == Eigen::Success && P.rows() > 0 &&
        es.eigenvalues().minCoeff() < -1e-9)
      throw std::invalid_argument("QpProblem: P is not positive semidefinite");
  }
};

enum class QpStatus { Optimal, MaxIter, InfeasibleCertificate };

inline const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::MaxIter: return "max-iter";
    case QpStatus::InfeasibleCertificate: return "infeasible-certificate";
  }
  return "?";
}

struct QpSettings {
  double eps = kQpTol;      // terminate when max(residuals) <= eps
  int max_iter = 200000;
  double rho0 = 0.1;        // base penalty
  double sigma = 1e-6;      // proximal regularization
  double alpha = 1.6;       // over-relaxation
  double eq_weight = 1e3;   // extra penalty factor on equality rows
  double rho_min_ratio = 1e-4;  // penalty adaptation clamp (relative to rho0)
  double rho_max_ratio = 1e4;
  int adapt_every = 50;     // iterations between penalty adaptations
  int polish_every = 250;   // iterations between speculative polish attempts
  int stall_iters = 5000;   // no-progress window for the divergence test
  double polish_reg = 1e-9;      // KKT regularization for the polish solve
  double active_tol = 1e-6;      // active when slack <= tol * (1 + |bound|)
};

struct QpSolution {
  Vec z;          // primal
  Vec dual;       // one multiplier per row (see convention above)
  QpStatus status = QpStatus::MaxIter;
  double primal_residual = std::numeric_limits<double>::infinity();
  double dual_residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool polished = false;
  double objective = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline double inf_norm(const Vec& v) {
  return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

/// Distance of Az to the constraint slab, componentwise max.
inline double slab_violation(const Vec& az, const Vec& l, const Vec& u) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < az.size(); ++i) {
    v = std::max(v, l[i] - az[i]);
    v = std::max(v, az[i] - u[i]);
  }
  return std::max(v, 0.0);
}

struct PolishResult {
  Vec z, dual;
  double primal_residual = std::numeric_limits<double>::infinity();
  double dual_residual = std::numeric_limits<double>::infinity();
  bool ok = false;
};

/// Solve the KKT equality system on the detected active set.
inline PolishResult polish(const QpProblem& qp, const Vec& z,
                           const QpSettings& cfg) {
  PolishResult out;
  const Eigen::Index n = qp.n();
  const Eigen::Index p = qp.p();
  const Vec az = p > 0 ? Vec(qp.A * z) : Vec(Vec::Zero(0));

  // Detect active rows. Equality rows are always active on both sides.
  std::vector<Eigen::Index> active;
  std::vector<double> bound;
  active.reserve(static_cast<std::size_t>(p));
  for (Eigen::Index i = 0; i < p; ++i) {
    const double l = qp.lower[i], u = qp.upper[i];
    if (l == u) {
      active.push_back(i);
      bound.push_back(l);
      continue;
    }
    const bool lo = std::isfinite(l) && az[i] - l <= cfg.active_tol * (1.0 + std::abs(l));
    const bool hi = std::isfinite(u) && u - az[i] <= cfg.active_tol * (1.0 + std::abs(u));
    if (lo && !hi) {
      active.push_back(i);
      bound.push_back(l);
    } else if (hi && !lo) {
      active.push_back(i);
      bound.push_back(u);
    } else if (lo && hi) {
      // Degenerate slab; pin to the nearer side (dual sign free anyway).
      active.push_back(i);
      bound.push_back(std::abs(az[i] - l) <= std::abs(az[i] - u) ? l : u);
    }
  }
  const Eigen::Index na = static_cast<Eigen::Index>(active.size());

  Mat G(na, n);
  Vec b(na);
  for (Eigen::Index j = 0; j < na; ++j) {
    G.row(j) = qp.A.row(active[static_cast<std::size_t>(j)]);
    b[j] = bound[static_cast<std::size_t>(j)];
  }

  // Regularized KKT matrix, factorized once; iterative refinement then
  // drives the unregularized residual down.
  Mat K = Mat::Zero(n + na, n + na);
  K.topLeftCorner(n, n) = qp.P + cfg.polish_reg * Mat::Identity(n, n);
  if (na > 0) {
    K.topRightCorner(n, na) = G.transpose();
    K.bottomLeftCorner(na, n) = G;
    K.bottomRightCorner(na, na) = -cfg.polish_reg * Mat::Identity(na, na);
  }
  Eigen::LDLT<Mat> ldlt(K);
  if (ldlt.info() != Eigen::Success) return out;

  Vec rhs(n + na);
  rhs.head(n) = -qp.q;
  rhs.tail(na) = b;
  Vec sol = ldlt.solve(rhs);
  for (int round = 0; round < 3; ++round) {
    Vec resid(n + na);
    resid.head(n) = -qp.q - qp.P * sol.head(n);
    if (na > 0) resid.head(n) -= G.transpose() * sol.tail(na);
    if (na > 0) resid.tail(na) = b - G * sol.head(n);
    sol += ldlt.solve(resid);
  }

  out.z = sol.head(n);
  out.dual = Vec::Zero(p);
  for (Eigen::Index j = 0; j < na; ++j)
    out.dual[active[static_cast<std::size_t>(j)]] = sol[n + j];
  const Vec az_pol = p > 0 ? Vec(qp.A * out.z) : Vec(Vec::Zero(0));
  out.primal_residual = slab_violation(az_pol, qp.lower, qp.upper);
  out.dual_residual =
      inf_norm(qp.P * out.z + qp.q +
               (p > 0 ? Vec(qp.A.transpose() * out.dual) : Vec(Vec::Zero(n))));
  out.ok = out.z.allFinite() && out.dual.allFinite();
  return out;
}

}  // namespace detail

/// Solve the QP. Never throws on numerical trouble; inspect status.
inline QpSolution solve(const QpProblem& qp, const QpSettings& cfg = {}) {
  qp.validate();
  const Eigen::Index n = qp.n();
  const Eigen::Index p = qp.p();

  QpSolution best;
  best.z = Vec::Zero(n);
  best.dual = Vec::Zero(p);

  // Per-row penalties; rho_hat is the adaptable base value.
  double rho_hat = cfg.rho0;
  const double rho_lo = cfg.rho0 * cfg.rho_min_ratio;
  const double rho_hi = cfg.rho0 * cfg.rho_max_ratio;
  Vec rho(p), rho_inv(p);
  auto fill_rho = [&] {
    for (Eigen::Index i = 0; i < p; ++i) {
      const bool eq = qp.lower[i] == qp.upper[i];
      rho[i] = rho_hat * (eq ? cfg.eq_weight : 1.0);
      rho_inv[i] = 1.0 / rho[i];
    }
  };
  fill_rho();

  Eigen::LLT<Mat> llt;
  auto factorize = [&] {
    Mat K = qp.P + cfg.sigma * Mat::Identity(n, n);
    if (p > 0) K += qp.A.transpose() * rho.asDiagonal() * qp.A;
    llt.compute(K);
    return llt.info() == Eigen::Success;
  };
  if (!factorize()) {
    // P not even PSD numerically; report divergence.
    best.status = QpStatus::InfeasibleCertificate;
    best.objective = qp.objective(best.z);
    return best;
  }

  Vec z = Vec::Zero(n);            // primal iterate
  Vec zeta = Vec::Zero(p);         // constraint-space iterate, always in [l,u]
  for (Eigen::Index i = 0; i < p; ++i)
    zeta[i] = std::clamp(0.0, qp.lower[i], qp.upper[i]);
  Vec y = Vec::Zero(p);            // dual iterate

  double best_max_resid = std::numeric_limits<double>::infinity();
  int best_iter = 0;
  int iter = 0;

  auto measure = [&](double& rp, double& rd) {
    rp = p > 0 ? detail::inf_norm(qp.A * z - zeta) : 0.0;
    Vec grad = qp.P * z + qp.q;
    if (p > 0) grad += qp.A.transpose() * y;
    rd = detail::inf_norm(grad);
  };

  auto finish = [&](QpStatus status, double rp, double rd, bool polished) {
    best.z = z;
    best.dual = y;
    best.status = status;
    best.primal_residual = rp;
    best.dual_residual = rd;
    best.iterations = iter;
    best.polished = polished;
    best.objective = qp.objective(best.z);
    return best;
  };

  auto adopt = [&](const detail::PolishResult& pol) {
    z = pol.z;
    y = pol.dual;
    if (p > 0) zeta = (qp.A * z).cwiseMax(qp.lower).cwiseMin(qp.upper);
  };

  // Final-answer polish: adopt whenever it does not worsen the
  // residuals. Returns true if the (possibly upgraded) point meets the
  // tolerance.
  auto final_polish = [&](double rp, double rd) {
    const detail::PolishResult pol = detail::polish(qp, z, cfg);
    const double cur = std::max(rp, rd);
    const double now = std::max(pol.primal_residual, pol.dual_residual);
    if (pol.ok && now <= cur) {
      adopt(pol);
      return std::make_pair(true, now <= cfg.eps);
    }
    return std::make_pair(false, cur <= cfg.eps);
  };

  // Speculative mid-run polish: adopted only when it fully converges,
  // so a wrong active-set guess cannot disturb the iteration.
  auto speculative_polish = [&] {
    const detail::PolishResult pol = detail::polish(qp, z, cfg);
    const double now = std::max(pol.primal_residual, pol.dual_residual);
    if (pol.ok && now <= cfg.eps) {
      adopt(pol);
      return true;
    }
    return false;
  };

  double rp = 0.0, rd = 0.0;
  for (iter = 1; iter <= cfg.max_iter; ++iter) {
    // x-update on the condensed system.
    Vec rhs = cfg.sigma * z - qp.q;
    if (p > 0) rhs += qp.A.transpose() * (rho.cwiseProduct(zeta) - y);
    const Vec z_tilde = llt.solve(rhs);
    const Vec az_tilde = p > 0 ? Vec(qp.A * z_tilde) : Vec(Vec::Zero(0));

    // Over-relaxed updates.
    z = cfg.alpha * z_tilde + (1.0 - cfg.alpha) * z;
    if (p > 0) {
      const Vec zrel = cfg.alpha * az_tilde + (1.0 - cfg.alpha) * zeta;
      const Vec v = zrel + rho_inv.cwiseProduct(y);
      const Vec zeta_next = v.cwiseMax(qp.lower).cwiseMin(qp.upper);
      y += rho.cwiseProduct(zrel - zeta_next);
      zeta = zeta_next;
    }

    measure(rp, rd);
    const double mr = std::max(rp, rd);
    if (mr < best_max_resid * (1.0 - 1e-12)) {
      best_max_resid = mr;
      best_iter = iter;
    }

    if (mr <= cfg.eps) {
      const bool refined = final_polish(rp, rd).first;
      measure(rp, rd);
      return finish(QpStatus::Optimal, rp, rd, refined);
    }

    if (cfg.polish_every > 0 && iter % cfg.polish_every == 0) {
      if (speculative_polish()) {
        measure(rp, rd);
        return finish(QpStatus::Optimal, rp, rd, true);
      }
    }

    if (iter - best_iter >= cfg.stall_iters) {
      log::debug("qp: stalled for %d iterations at residual %.3e", cfg.stall_iters,
                 best_max_resid);
      return finish(QpStatus::InfeasibleCertificate, rp, rd, false);
    }

    if (cfg.adapt_every > 0 && iter % cfg.adapt_every == 0 && p > 0) {
      // Residual balancing, clamped relative to rho0.
      const double prim_scale =
          std::max({1.0, detail::inf_norm(qp.A * z), detail::inf_norm(zeta)});
      const double dual_scale =
          std::max({1.0, detail::inf_norm(qp.P * z), detail::inf_norm(qp.q),
                    detail::inf_norm(qp.A.transpose() * y)});
      const double ratio = std::sqrt((rp / prim_scale) / std::max(rd / dual_scale, 1e-16));
      if (std::isfinite(ratio) && (ratio > 5.0 || ratio < 0.2)) {
        const double next = std::clamp(rho_hat * ratio, rho_lo, rho_hi);
        if (next != rho_hat) {
          rho_hat = next;
          fill_rho();
          if (!factorize()) return finish(QpStatus::InfeasibleCertificate, rp, rd, false);
          log::debug("qp: iter %d, rho -> %.3e (rp=%.3e rd=%.3e)", iter, rho_hat, rp, rd);
        }
      }
    }
  }
  iter = cfg.max_iter;

  // Last-chance polish before conceding.
  const auto [adopted, converged] = final_polish(rp, rd);
  measure(rp, rd);
  return finish(converged ? QpStatus::Optimal : QpStatus::MaxIter, rp, rd, adopted);
}

/// Plain-text triplet export (row col value per line) of P, q, A, and
/// the bounds, for cross-checking against external solvers.
inline void export_triplets(const QpProblem& qp, std::ostream& os) {
  char buf[64];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "# qp n=" << qp.n() << " p=" << qp.p() << "\n";
  os << "# P row col value\n";
  for (Eigen::Index i = 0; i < qp.P.rows(); ++i)
    for (Eigen::Index j = 0; j < qp.P.cols(); ++j)
      if (qp.P(i, j) != 0.0)
        os << i << " " << j << " " << fmt(qp.P(i, j)) << "\n";
  os << "# q index value\n";
  for (Eigen::Index i = 0; i < qp.q.size(); ++i)
    if (qp.q[i] != 0.0) os << i << " " << fmt(qp.q[i]) << "\n";
  os << "# A row col value\n";
  for (Eigen::Index i = 0; i < qp.A.rows(); ++i)
    for (Eigen::Index j = 0; j < qp.A.cols(); ++j)
      if (qp.A(i, j) != 0.0)
        os << i << " " << j << " " << fmt(qp.A(i, j)) << "\n";
  os << "# bounds row lower upper\n";
  for (Eigen::Index i = 0; i < qp.lower.size(); ++i)
    os << i << " " << fmt(qp.lower[i]) << " " << fmt(qp.upper[i]) << "\n";
  os << "# offset " << fmt(qp.offset) << "\n";
}

}  // namespace ratepmp
