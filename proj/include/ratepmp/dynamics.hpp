#pragma once

/**
 * Stage dynamics x(t+1) = f(t, x(t), u(t)) over a fixed horizon.
 *
 * Three representations share one interface:
 *  - linear time-varying:  f(t,x,u) = A_t x + B_t u + c_t,
 *  - control-affine:       f(x,u)   = f0(x) + G(x) u,
 *  - general smooth:       user callables with analytic Jacobians.
 *
 * The LTV data is exposed directly (A(t), B(t), c(t)) because the QP
 * transcription consumes it; the other variants are evaluated through
 * value/jac_x/jac_u only.
 */

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ratepmp/convex_set.hpp"

namespace ratepmp {

class Dynamics {
 public:
  enum class Kind { Unset, Ltv, ControlAffine, Smooth };

  using VecFn = std::function<Vec(const Vec&)>;
  using MatFn = std::function<Mat(const Vec&)>;
  using VecVecFn = std::function<Mat(const Vec&, const Vec&)>;
  using TimeVecFn = std::function<Vec(int, const Vec&, const Vec&)>;
  using TimeMatFn = std::function<Mat(int, const Vec&, const Vec&)>;

  Dynamics() = default;

  /// Linear time-varying dynamics. Each vector holds either one entry
  /// (applied at every stage) or one entry per stage t = 0..T-1.
  static Dynamics ltv(std::vector<Mat> A, std::vector<Mat> B,
                      std::vector<Vec> c) {
    if (A.empty() || B.empty())
      throw std::invalid_argument("Dynamics::ltv: A and B must be nonempty");
    const Eigen::Index d = A.front().rows();
    const Eigen::Index m = B.front().cols();
    for (const Mat& At : A)
      if (At.rows() != d || At.cols() != d)
        throw std::invalid_argument("Dynamics::ltv: A must be d x d");
    for (const Mat& Bt : B)
      if (Bt.rows() != d || Bt.cols() != m)
        throw std::invalid_argument("Dynamics::ltv: B must be d x m");
    if (c.empty()) c.push_back(Vec::Zero(d));
    for (const Vec& ct : c)
      if (ct.size() != d)
        throw std::invalid_argument("Dynamics::ltv: c must be a d-vector");
    Dynamics dyn;
    dyn.kind_ = Kind::Ltv;
    dyn.A_ = std::move(A);
    dyn.B_ = std::move(B);
    dyn.c_ = std::move(c);
    dyn.d_ = d;
    dyn.m_ = m;
    return dyn;
  }

  /// Time-invariant linear dynamics x(t+1) = A x + B u + c.
  static Dynamics lti(Mat A, Mat B, Vec c = Vec()) {
    std::vector<Vec> cs;
    if (c.size() > 0) cs.push_back(std::move(c));
    return ltv({std::move(A)}, {std::move(B)}, std::move(cs));
  }

  /// Control-affine dynamics f0(x) + G(x) u.
  /// `input_jac(x, u)` must return the d x d Jacobian of x -> G(x) u.
  static Dynamics control_affine(Eigen::Index d, Eigen::Index m, VecFn drift,
                                 MatFn drift_jac, MatFn input,
                                 VecVecFn input_jac) {
    if (d <= 0 || m <= 0)
      throw std::invalid_argument("Dynamics::control_affine: bad dimensions");
    Dynamics dyn;
    dyn.kind_ = Kind::ControlAffine;
    dyn.d_ = d;
    dyn.m_ = m;
    dyn.drift_ = std::move(drift);
    dyn.drift_jac_ = std::move(drift_jac);
    dyn.input_ = std::move(input);
    dyn.input_jac_ = std::move(input_jac);
    return dyn;
  }

  /// Fully general smooth dynamics with analytic Jacobians.
  static Dynamics smooth(Eigen::Index d, Eigen::Index m, TimeVecFn value,
                         TimeMatFn jac_x, TimeMatFn jac_u) {
    if (d <= 0 || m <= 0)
      throw std::invalid_argument("Dynamics::smooth: bad dimensions");
    Dynamics dyn;
    dyn.kind_ = Kind::Smooth;
    dyn.d_ = d;
    dyn.m_ = m;
    dyn.value_ = std::move(value);
    dyn.jac_x_ = std::move(jac_x);
    dyn.jac_u_ = std::move(jac_u);
    return dyn;
  }

  Kind kind() const { return kind_; }
  bool valid() const { return kind_ != Kind::Unset; }
  Eigen::Index state_dim() const { return d_; }
  Eigen::Index control_dim() const { return m_; }

  Vec value(int t, const Vec& x, const Vec& u) const {
    switch (kind_) {
      case Kind::Ltv: return A(t) * x + B(t) * u + c(t);
      case Kind::ControlAffine: return drift_(x) + input_(x) * u;
      case Kind::Smooth: return value_(t, x, u);
      case Kind::Unset: break;
    }
    throw std::logic_error("Dynamics::value: unset dynamics");
  }

  Mat jac_x(int t, const Vec& x, const Vec& u) const {
    switch (kind_) {
      case Kind::Ltv: return A(t);
      case Kind::ControlAffine: return drift_jac_(x) + input_jac_(x, u);
      case Kind::Smooth: return jac_x_(t, x, u);
      case Kind::Unset: break;
    }
    throw std::logic_error("Dynamics::jac_x: unset dynamics");
  }

  Mat jac_u(int t, const Vec& x, const Vec& u) const {
    switch (kind_) {
      case Kind::Ltv: return B(t);
      case Kind::ControlAffine: return input_(x);
      case Kind::Smooth: return jac_u_(t, x, u);
      case Kind::Unset: break;
    }
    throw std::logic_error("Dynamics::jac_u: unset dynamics");
  }

  bool is_ltv() const { return kind_ == Kind::Ltv; }

  // LTV accessors (broadcast a single entry across all stages).
  const Mat& A(int t) const { return pick(A_, t, "A"); }
  const Mat& B(int t) const { return pick(B_, t, "B"); }
  const Vec& c(int t) const { return pick(c_, t, "c"); }

  /// Number of stored stages (1 means time-invariant broadcast).
  std::size_t ltv_stages() const { return std::max(A_.size(), B_.size()); }

 private:
  template <typename T>
  const T& pick(const std::vector<T>& v, int t, const char* what) const {
    if (kind_ != Kind::Ltv)
      throw std::logic_error(std::string("Dynamics::") + what +
                             ": not linear time-varying");
    if (v.size() == 1) return v.front();
    if (t < 0 || static_cast<std::size_t>(t) >= v.size())
      throw std::out_of_range(std::string("Dynamics::") + what +
                              ": stage index out of range");
    return v[static_cast<std::size_t>(t)];
  }

  Kind kind_ = Kind::Unset;
  Eigen::Index d_ = 0, m_ = 0;
  std::vector<Mat> A_, B_;
  std::vector<Vec> c_;
  VecFn drift_;
  MatFn drift_jac_, input_;
  VecVecFn input_jac_;
  TimeVecFn value_;
  TimeMatFn jac_x_, jac_u_;
};

}  // namespace ratepmp
