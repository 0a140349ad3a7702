#pragma once

/**
 * Convex sets used as state/control constraint sets.
 *
 * A small closed-convex-set vocabulary (boxes, norm balls, singletons,
 * the whole space) with the three geometric queries the rest of the
 * library needs:
 *
 *  - membership up to a tolerance,
 *  - Euclidean projection,
 *  - first-order optimality residuals at a point (projection of a
 *    gradient onto the cone of feasible directions, and distance of a
 *    multiplier from the dual of that cone).
 *
 * All sets are immutable after construction.
 */

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>

#include "ratepmp/defaults.hpp"

namespace ratepmp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Which norm a ball (or a rate bound) is measured in.
enum class Norm { Inf, Two };

class ConvexSet {
 public:
  enum class Kind { Box, NormBall, Singleton, Whole };

  /// Axis-aligned box {p : lower <= p <= upper}. Entries may be
  /// +/-infinity; lower[i] == upper[i] pins a coordinate.
  static ConvexSet box(Vec lower, Vec upper) {
    if (lower.size() != upper.size())
      throw std::invalid_argument("ConvexSet::box: lower/upper size mismatch");
    if (lower.size() == 0)
      throw std::invalid_argument("ConvexSet::box: empty dimension");
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
      if (std::isnan(lower[i]) || std::isnan(upper[i]))
        throw std::invalid_argument("ConvexSet::box: NaN bound");
      if (lower[i] > upper[i])
        throw std::invalid_argument(
            "ConvexSet::box: lower > upper in coordinate " + std::to_string(i));
    }
    ConvexSet s;
    s.kind_ = Kind::Box;
    s.lower_ = std::move(lower);
    s.upper_ = std::move(upper);
    return s;
  }

  /// Norm ball {p : ||p - center|| <= radius} in the given norm.
  static ConvexSet norm_ball(Vec center, double radius, Norm norm) {
    if (center.size() == 0)
      throw std::invalid_argument("ConvexSet::norm_ball: empty dimension");
    if (!(radius >= 0.0) || !std::isfinite(radius))
      throw std::invalid_argument("ConvexSet::norm_ball: radius must be finite and >= 0");
    ConvexSet s;
    s.kind_ = Kind::NormBall;
    s.center_ = std::move(center);
    s.radius_ = radius;
    s.norm_ = norm;
    return s;
  }

  /// One-point set {point}.
  static ConvexSet singleton(Vec point) {
    if (point.size() == 0)
      throw std::invalid_argument("ConvexSet::singleton: empty dimension");
    ConvexSet s;
    s.kind_ = Kind::Singleton;
    s.center_ = std::move(point);
    return s;
  }

  /// All of R^dim (no constraint).
  static ConvexSet whole(Eigen::Index dim) {
    if (dim <= 0) throw std::invalid_argument("ConvexSet::whole: dim must be positive");
    ConvexSet s;
    s.kind_ = Kind::Whole;
    s.dim_ = dim;
    return s;
  }

  Kind kind() const { return kind_; }

  Eigen::Index dim() const {
    switch (kind_) {
      case Kind::Box: return lower_.size();
      case Kind::NormBall:
      case Kind::Singleton: return center_.size();
      case Kind::Whole: return dim_;
    }
    return 0;  // unreachable
  }

  bool is_bounded() const {
    switch (kind_) {
      case Kind::Box:
        return lower_.allFinite() && upper_.allFinite();
      case Kind::NormBall:
      case Kind::Singleton:
        return true;
      case Kind::Whole:
        return false;
    }
    return false;  // unreachable
  }

  // Accessors for shape-specific data; throw if the shape does not match.
  const Vec& lower() const { require(Kind::Box, "lower"); return lower_; }
  const Vec& upper() const { require(Kind::Box, "upper"); return upper_; }
  const Vec& center() const {
    if (kind_ != Kind::NormBall && kind_ != Kind::Singleton)
      throw std::logic_error("ConvexSet: center() on incompatible shape");
    return center_;
  }
  double radius() const { require(Kind::NormBall, "radius"); return radius_; }
  Norm ball_norm() const { require(Kind::NormBall, "ball_norm"); return norm_; }
  const Vec& point() const { require(Kind::Singleton, "point"); return center_; }

  /// Membership test with absolute tolerance.
  bool contains(const Vec& p, double tol = kSetTol) const {
    check_dim(p, "contains");
    switch (kind_) {
      case Kind::Box:
        for (Eigen::Index i = 0; i < p.size(); ++i)
          if (p[i] < lower_[i] - tol || p[i] > upper_[i] + tol) return false;
        return true;
      case Kind::NormBall:
        return ball_dist(p) <= radius_ + tol;
      case Kind::Singleton:
        return (p - center_).lpNorm<Eigen::Infinity>() <= tol;
      case Kind::Whole:
        return true;
    }
    return false;  // unreachable
  }

  /// Euclidean projection onto the set.
  Vec project(const Vec& p) const {
    check_dim(p, "project");
    switch (kind_) {
      case Kind::Box:
        return p.cwiseMax(lower_).cwiseMin(upper_);
      case Kind::NormBall: {
        if (norm_ == Norm::Inf) {
          const Vec lo = center_.array() - radius_;
          const Vec hi = center_.array() + radius_;
          return p.cwiseMax(lo).cwiseMin(hi);
        }
        const Vec delta = p - center_;
        const double n = delta.norm();
        if (n <= radius_) return p;
        return center_ + delta * (radius_ / n);
      }
      case Kind::Singleton:
        return center_;
      case Kind::Whole:
        return p;
    }
    return p;  // unreachable
  }

  /**
   * Projection of `grad` onto the cone of feasible directions of the set
   * at `point`, returned as a Euclidean norm.
   *
   * A zero result certifies first-order stationarity of `point` for
   * maximizing a function whose gradient at `point` is `grad`: no
   * feasible direction has positive directional derivative. At a box
   * coordinate clamped at its upper bound a positive gradient component
   * is fine (the maximizer is pushing into the bound) while a negative
   * one is a violation, and symmetrically at a lower bound; interior
   * coordinates contribute their full gradient component.
   *
   * `active_tol` decides which constraints count as active at `point`.
   * Throws if `point` is not in the set within `active_tol`.
   */
  double normal_cone_residual(const Vec& point, const Vec& grad,
                              double active_tol = kFeasTol) const {
    check_dim(point, "normal_cone_residual");
    check_dim(grad, "normal_cone_residual");
    if (!contains(point, active_tol))
      throw std::invalid_argument("ConvexSet::normal_cone_residual: point not in set");
    switch (kind_) {
      case Kind::Box:
        return box_cone_residual(lower_, upper_, point, grad, active_tol);
      case Kind::NormBall: {
        if (norm_ == Norm::Inf) {
          return box_cone_residual(Vec(center_.array() - radius_),
                                   Vec(center_.array() + radius_), point, grad,
                                   active_tol);
        }
        const Vec delta = point - center_;
        const double n = delta.norm();
        if (n < radius_ - active_tol) return grad.norm();  // interior
        if (radius_ <= active_tol) return 0.0;             // degenerate ball
        // Boundary: feasible directions form the half-space with outward
        // normal delta/n; remove the outward component of the gradient.
        const Vec nrm = delta / n;
        const double outward = grad.dot(nrm);
        return (grad - std::max(outward, 0.0) * nrm).norm();
      }
      case Kind::Singleton:
        return 0.0;  // no feasible directions
      case Kind::Whole:
        return grad.norm();
    }
    return 0.0;  // unreachable
  }

  /**
   * Distance of `eta` from the dual cone of the feasible directions of
   * the set at `point` (the cone of vectors pairing nonnegatively with
   * every feasible direction). A zero result certifies the sign
   * condition a transversality multiplier has to satisfy at `point`.
   *
   * Throws if `point` is not in the set within `active_tol`.
   */
  double polar_cone_violation(const Vec& point, const Vec& eta,
                              double active_tol = kFeasTol) const {
    check_dim(point, "polar_cone_violation");
    check_dim(eta, "polar_cone_violation");
    if (!contains(point, active_tol))
      throw std::invalid_argument("ConvexSet::polar_cone_violation: point not in set");
    switch (kind_) {
      case Kind::Box:
        return box_dual_violation(lower_, upper_, point, eta, active_tol);
      case Kind::NormBall: {
        if (norm_ == Norm::Inf) {
          return box_dual_violation(Vec(center_.array() - radius_),
                                    Vec(center_.array() + radius_), point, eta,
                                    active_tol);
        }
        const Vec delta = point - center_;
        const double n = delta.norm();
        if (n < radius_ - active_tol) return eta.norm();  // interior: dual cone is {0}
        if (radius_ <= active_tol) return 0.0;            // degenerate ball: any eta
        // Boundary: dual cone of the half-space {d : <d, nrm> <= 0} is the
        // ray {-s nrm : s >= 0}; report the distance to that ray.
        const Vec nrm = delta / n;
        const double s = std::max(0.0, -eta.dot(nrm));
        return (eta + s * nrm).norm();
      }
      case Kind::Singleton:
        return 0.0;  // dual cone is the whole space
      case Kind::Whole:
        return eta.norm();
    }
    return 0.0;  // unreachable
  }

 private:
  ConvexSet() = default;

  void require(Kind k, const char* what) const {
    if (kind_ != k)
      throw std::logic_error(std::string("ConvexSet: ") + what +
                             "() on incompatible shape");
  }

  void check_dim(const Vec& p, const char* op) const {
    if (p.size() != dim())
      throw std::invalid_argument(std::string("ConvexSet::") + op +
                                  ": dimension mismatch");
  }

  double ball_dist(const Vec& p) const {
    const Vec delta = p - center_;
    return norm_ == Norm::Two ? delta.norm() : delta.lpNorm<Eigen::Infinity>();
  }

  static double box_cone_residual(const Vec& lo, const Vec& hi, const Vec& p,
                                  const Vec& grad, double tol) {
    double sq = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const bool at_lo = p[i] <= lo[i] + tol;
      const bool at_hi = p[i] >= hi[i] - tol;
      double r = 0.0;
      if (at_lo && at_hi) r = 0.0;                       // pinned coordinate
      else if (at_hi) r = std::min(grad[i], 0.0);        // may only decrease
      else if (at_lo) r = std::max(grad[i], 0.0);        // may only increase
      else r = grad[i];                                  // interior
      sq += r * r;
    }
    return std::sqrt(sq);
  }

  static double box_dual_violation(const Vec& lo, const Vec& hi, const Vec& p,
                                   const Vec& eta, double tol) {
    // Feasible direction cone is a product of {0}, [0,inf), (-inf,0], R per
    // coordinate; its dual is the product of the duals, so the distance is
    // computed coordinate-wise.
    double sq = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const bool at_lo = p[i] <= lo[i] + tol;
      const bool at_hi = p[i] >= hi[i] - tol;
      double r = 0.0;
      if (at_lo && at_hi) r = 0.0;                       // dual is R
      else if (at_hi) r = std::max(eta[i], 0.0);         // dual is (-inf,0]
      else if (at_lo) r = std::max(-eta[i], 0.0);        // dual is [0,inf)
      else r = std::abs(eta[i]);                         // dual is {0}
      sq += r * r;
    }
    return std::sqrt(sq);
  }

  Kind kind_ = Kind::Whole;
  Vec lower_, upper_;   // Box
  Vec center_;          // NormBall / Singleton
  double radius_ = 0.0; // NormBall
  Norm norm_ = Norm::Inf;
  Eigen::Index dim_ = 0;  // Whole
};

}  // namespace ratepmp
