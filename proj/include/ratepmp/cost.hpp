#pragma once

/**
 * Objective J = sum_{t=0}^{T-1} c(t, x(t), u(t)) + c_F(x(T)).
 *
 * Quadratic stage costs use the convention
 *   c(t,x,u) = 1/2 x'Q_t x + q_t'x + 1/2 u'R_t u + r_t'u + offset_t,
 * and the terminal cost 1/2 x'Qf x + qf'x + offset_F. Q/R/Qf must be
 * symmetric (to 1e-12); definiteness is checked where it matters
 * (existence diagnostics, QP assembly), not at construction.
 *
 * General smooth costs supply value and gradient callables.
 */

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ratepmp/convex_set.hpp"

namespace ratepmp {

class Cost {
 public:
  enum class Kind { Unset, Quadratic, Smooth };

  using StageFn = std::function<double(int, const Vec&, const Vec&)>;
  using StageGradFn = std::function<Vec(int, const Vec&, const Vec&)>;
  using TerminalFn = std::function<double(const Vec&)>;
  using TerminalGradFn = std::function<Vec(const Vec&)>;

  Cost() = default;

  /// Fully general quadratic data. Stage vectors hold either one entry
  /// (broadcast) or one entry per stage.
  static Cost quadratic(std::vector<Mat> Q, std::vector<Vec> q,
                        std::vector<Mat> R, std::vector<Vec> r,
                        std::vector<double> offset, Mat Qf, Vec qf,
                        double terminal_offset = 0.0) {
    if (Q.empty() || R.empty())
      throw std::invalid_argument("Cost::quadratic: Q and R must be nonempty");
    const Eigen::Index d = Q.front().rows();
    const Eigen::Index m = R.front().rows();
    for (const Mat& Qt : Q) check_symmetric(Qt, d, "Q");
    for (const Mat& Rt : R) check_symmetric(Rt, m, "R");
    check_symmetric(Qf, d, "Qf");
    if (q.empty()) q.push_back(Vec::Zero(d));
    if (r.empty()) r.push_back(Vec::Zero(m));
    if (offset.empty()) offset.push_back(0.0);
    for (const Vec& qt : q)
      if (qt.size() != d) throw std::invalid_argument("Cost::quadratic: bad q size");
    for (const Vec& rt : r)
      if (rt.size() != m) throw std::invalid_argument("Cost::quadratic: bad r size");
    if (qf.size() == 0) qf = Vec::Zero(d);
    if (qf.size() != d) throw std::invalid_argument("Cost::quadratic: bad qf size");
    Cost cost;
    cost.kind_ = Kind::Quadratic;
    cost.d_ = d;
    cost.m_ = m;
    cost.Q_ = std::move(Q);
    cost.q_ = std::move(q);
    cost.R_ = std::move(R);
    cost.r_ = std::move(r);
    cost.offset_ = std::move(offset);
    cost.Qf_ = std::move(Qf);
    cost.qf_ = std::move(qf);
    cost.terminal_offset_ = terminal_offset;
    return cost;
  }

  /// Time-invariant LQ cost 1/2(x'Qx + u'Ru) per stage, 1/2 x'Qf x terminal.
  static Cost lq(Mat Q, Mat R, Mat Qf) {
    return quadratic({std::move(Q)}, {}, {std::move(R)}, {}, {},
                     std::move(Qf), Vec());
  }

  static Cost smooth(Eigen::Index d, Eigen::Index m, StageFn value,
                     StageGradFn grad_x, StageGradFn grad_u,
                     TerminalFn terminal, TerminalGradFn terminal_grad) {
    if (d <= 0 || m <= 0)
      throw std::invalid_argument("Cost::smooth: bad dimensions");
    Cost cost;
    cost.kind_ = Kind::Smooth;
    cost.d_ = d;
    cost.m_ = m;
    cost.stage_fn_ = std::move(value);
    cost.grad_x_fn_ = std::move(grad_x);
    cost.grad_u_fn_ = std::move(grad_u);
    cost.terminal_fn_ = std::move(terminal);
    cost.terminal_grad_fn_ = std::move(terminal_grad);
    return cost;
  }

  Kind kind() const { return kind_; }
  bool valid() const { return kind_ != Kind::Unset; }
  bool is_quadratic() const { return kind_ == Kind::Quadratic; }
  Eigen::Index state_dim() const { return d_; }
  Eigen::Index control_dim() const { return m_; }

  double stage(int t, const Vec& x, const Vec& u) const {
    switch (kind_) {
      case Kind::Quadratic:
        return 0.5 * x.dot(Q(t) * x) + q(t).dot(x) + 0.5 * u.dot(R(t) * u) +
               r(t).dot(u) + offset(t);
      case Kind::Smooth:
        return stage_fn_(t, x, u);
      case Kind::Unset: break;
    }
    throw std::logic_error("Cost::stage: unset cost");
  }

  Vec stage_grad_x(int t, const Vec& x, const Vec& u) const {
    switch (kind_) {
      case Kind::Quadratic: return Q(t) * x + q(t);
      case Kind::Smooth: return grad_x_fn_(t, x, u);
      case Kind::Unset: break;
    }
    throw std::logic_error("Cost::stage_grad_x: unset cost");
  }

  Vec stage_grad_u(int t, const Vec& x, const Vec& u) const {
    switch (kind_) {
      case Kind::Quadratic: return R(t) * u + r(t);
      case Kind::Smooth: return grad_u_fn_(t, x, u);
      case Kind::Unset: break;
    }
    throw std::logic_error("Cost::stage_grad_u: unset cost");
  }

  double terminal(const Vec& x) const {
    switch (kind_) {
      case Kind::Quadratic:
        return 0.5 * x.dot(Qf_ * x) + qf_.dot(x) + terminal_offset_;
      case Kind::Smooth:
        return terminal_fn_(x);
      case Kind::Unset: break;
    }
    throw std::logic_error("Cost::terminal: unset cost");
  }

  Vec terminal_grad(const Vec& x) const {
    switch (kind_) {
      case Kind::Quadratic: return Qf_ * x + qf_;
      case Kind::Smooth: return terminal_grad_fn_(x);
      case Kind::Unset: break;
    }
    throw std::logic_error("Cost::terminal_grad: unset cost");
  }

  // Quadratic accessors (broadcast a single entry across all stages).
  const Mat& Q(int t) const { return pick(Q_, t, "Q"); }
  const Vec& q(int t) const { return pick(q_, t, "q"); }
  const Mat& R(int t) const { return pick(R_, t, "R"); }
  const Vec& r(int t) const { return pick(r_, t, "r"); }
  double offset(int t) const { return pick(offset_, t, "offset"); }
  const Mat& Qf() const { require_quadratic("Qf"); return Qf_; }
  const Vec& qf() const { require_quadratic("qf"); return qf_; }
  double terminal_offset() const {
    require_quadratic("terminal_offset");
    return terminal_offset_;
  }

 private:
  static void check_symmetric(const Mat& M, Eigen::Index n, const char* what) {
    if (M.rows() != n || M.cols() != n)
      throw std::invalid_argument(std::string("Cost: ") + what +
                                  " has wrong dimensions");
    if ((M - M.transpose()).lpNorm<Eigen::Infinity>() > 1e-12)
      throw std::invalid_argument(std::string("Cost: ") + what +
                                  " is not symmetric");
  }

  void require_quadratic(const char* what) const {
    if (kind_ != Kind::Quadratic)
      throw std::logic_error(std::string("Cost::") + what +
                             ": not a quadratic cost");
  }

  template <typename T>
  const T& pick(const std::vector<T>& v, int t, const char* what) const {
    require_quadratic(what);
    if (v.size() == 1) return v.front();
    if (t < 0 || static_cast<std::size_t>(t) >= v.size())
      throw std::out_of_range(std::string("Cost::") + what +
                              ": stage index out of range");
    return v[static_cast<std::size_t>(t)];
  }

  Kind kind_ = Kind::Unset;
  Eigen::Index d_ = 0, m_ = 0;
  std::vector<Mat> Q_, R_;
  std::vector<Vec> q_, r_;
  std::vector<double> offset_;
  Mat Qf_;
  Vec qf_;
  double terminal_offset_ = 0.0;
  StageFn stage_fn_;
  StageGradFn grad_x_fn_, grad_u_fn_;
  TerminalFn terminal_fn_;
  TerminalGradFn terminal_grad_fn_;
};

}  // namespace ratepmp
