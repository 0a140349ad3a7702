#pragma once

/**
 * Central finite-difference oracles for validating analytic gradients
 * and Jacobians. Used by the test-suite and by the certificate checker's
 * self-diagnostics; never on the hot path.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>

namespace ratepmp::fd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kDefaultStep = 1e-5;

/// Central-difference gradient of a scalar function.
inline Vec gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                    double step = kDefaultStep) {
  Vec g(x.size());
  Vec p = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    p[i] = xi + step;
    const double fp = f(p);
    p[i] = xi - step;
    const double fm = f(p);
    p[i] = xi;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

/// Central-difference Jacobian of a vector function.
inline Mat jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x,
                    double step = kDefaultStep) {
  Vec p = x;
  const Vec f0 = f(x);
  Mat J(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    p[i] = xi + step;
    const Vec fp = f(p);
    p[i] = xi - step;
    const Vec fm = f(p);
    p[i] = xi;
    J.col(i) = (fp - fm) / (2.0 * step);
  }
  return J;
}

/// Relative error between an analytic derivative and its
/// finite-difference estimate: ||a - b|| / max(1, ||a||, ||b||).
inline double relative_error(const Mat& analytic, const Mat& numeric) {
  const double scale =
      std::max({1.0, analytic.norm(), numeric.norm()});
  return (analytic - numeric).norm() / scale;
}

inline double relative_error(const Vec& analytic, const Vec& numeric) {
  const double scale =
      std::max({1.0, analytic.norm(), numeric.norm()});
  return (analytic - numeric).norm() / scale;
}

}  // namespace ratepmp::fd
