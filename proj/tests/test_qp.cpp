#include "ratepmp/qp.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <random>
#include <sstream>

namespace ratepmp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

QpProblem scalar_qp(double P, double q, double lower, double upper) {
  QpProblem qp;
  qp.P = Mat::Constant(1, 1, P);
  qp.q = Vec::Constant(1, q);
  qp.A = Mat::Identity(1, 1);
  qp.lower = Vec::Constant(1, lower);
  qp.upper = Vec::Constant(1, upper);
  return qp;
}

double stationarity(const QpProblem& qp, const QpSolution& sol) {
  Vec grad = qp.P * sol.z + qp.q;
  if (qp.p() > 0) grad += qp.A.transpose() * sol.dual;
  return grad.lpNorm<Eigen::Infinity>();
}

TEST(Qp, ActiveUpperBoundHandKkt) {
  // min (z-1)^2 s.t. z <= 1/2: optimum pinned at the bound with a
  // positive multiplier, 2z - 2 + dual = 0 => dual = 1.
  QpProblem qp = scalar_qp(2.0, -2.0, -kInf, 0.5);
  qp.offset = 1.0;
  const QpSolution sol = solve(qp);
  ASSERT_EQ(sol.status, QpStatus::Optimal);
  EXPECT_NEAR(sol.z[0], 0.5, 1e-6);
  EXPECT_NEAR(sol.dual[0], 1.0, 1e-6);
  EXPECT_NEAR(sol.objective, 0.25, 1e-6);
  EXPECT_LE(stationarity(qp, sol), 1e-6);
}

TEST(Qp, ActiveLowerBoundDualIsNegative) {
  // min z s.t. 0 <= z <= 1: z* = 0 and 0 + 1 + dual = 0 => dual = -1.
  const QpProblem qp = scalar_qp(0.0, 1.0, 0.0, 1.0);
  const QpSolution sol = solve(qp);
  ASSERT_EQ(sol.status, QpStatus::Optimal);
  EXPECT_NEAR(sol.z[0], 0.0, 1e-6);
  EXPECT_NEAR(sol.dual[0], -1.0, 1e-6);
  EXPECT_LE(stationarity(qp, sol), 1e-6);
}

TEST(Qp, UnconstrainedAndEqualityRows) {
  QpProblem qp;
  qp.P = Mat::Constant(1, 1, 2.0);
  qp.q = Vec::Constant(1, -2.0);
  qp.A = Mat::Zero(0, 1);
  qp.lower = Vec::Zero(0);
  qp.upper = Vec::Zero(0);
  const QpSolution unconstrained = solve(qp);
  ASSERT_EQ(unconstrained.status, QpStatus::Optimal);
  EXPECT_NEAR(unconstrained.z[0], 1.0, 1e-6);

  // min 1/2 z^2 s.t. z = 3: stationarity 3 + dual = 0.
  QpProblem eq = scalar_qp(1.0, 0.0, 3.0, 3.0);
  const QpSolution pinned = solve(eq);
  ASSERT_EQ(pinned.status, QpStatus::Optimal);
  EXPECT_NEAR(pinned.z[0], 3.0, 1e-6);
  EXPECT_NEAR(pinned.dual[0], -3.0, 1e-6);
}

TEST(Qp, TwoDimensionalHalfspace) {
  // min 1/2 ||z||^2 s.t. z1 + z2 >= 2: z* = (1,1), dual = -1 on the
  // active lower bound.
  QpProblem qp;
  qp.P = Mat::Identity(2, 2);
  qp.q = Vec::Zero(2);
  qp.A = Mat::Ones(1, 2);
  qp.lower = Vec::Constant(1, 2.0);
  qp.upper = Vec::Constant(1, kInf);
  const QpSolution sol = solve(qp);
  ASSERT_EQ(sol.status, QpStatus::Optimal);
  EXPECT_NEAR(sol.z[0], 1.0, 1e-6);
  EXPECT_NEAR(sol.z[1], 1.0, 1e-6);
  EXPECT_NEAR(sol.dual[0], -1.0, 1e-6);
  EXPECT_LE(stationarity(qp, sol), 1e-6);
  EXPECT_NEAR(sol.objective, 1.0, 1e-6);
}

TEST(Qp, ObjectiveScalingScalesDuals) {
  QpProblem qp = scalar_qp(2.0, -2.0, -kInf, 0.5);
  QpProblem scaled = qp;
  scaled.P *= 5.0;
  scaled.q *= 5.0;
  const QpSolution a = solve(qp);
  const QpSolution b = solve(scaled);
  ASSERT_EQ(a.status, QpStatus::Optimal);
  ASSERT_EQ(b.status, QpStatus::Optimal);
  EXPECT_NEAR(a.z[0], b.z[0], 1e-6);
  EXPECT_NEAR(b.dual[0], 5.0 * a.dual[0], 5e-6);
}

TEST(Qp, TighterToleranceNeverWorsensResiduals) {
  QpProblem qp;
  qp.P = (Mat(2, 2) << 4.0, 1.0, 1.0, 3.0).finished();
  qp.q = (Vec(2) << -1.0, 2.0).finished();
  qp.A = (Mat(3, 2) << 1.0, 0.0, 0.0, 1.0, 1.0, 1.0).finished();
  qp.lower = (Vec(3) << -1.0, -1.0, -kInf).finished();
  qp.upper = (Vec(3) << 1.0, 1.0, 1.5).finished();

  QpSettings loose;
  loose.eps = 1e-4;
  QpSettings tight;
  tight.eps = 1e-9;
  const QpSolution a = solve(qp, loose);
  const QpSolution b = solve(qp, tight);
  ASSERT_EQ(a.status, QpStatus::Optimal);
  ASSERT_EQ(b.status, QpStatus::Optimal);
  const double ra = std::max(a.primal_residual, a.dual_residual);
  const double rb = std::max(b.primal_residual, b.dual_residual);
  EXPECT_LE(ra, loose.eps);
  EXPECT_LE(rb, tight.eps);
  EXPECT_LE(rb, ra + 1e-15);
  EXPECT_LE(b.objective, a.objective + 1e-9);
}

TEST(Qp, ContradictoryRowsYieldInfeasibleCertificate) {
  QpProblem qp;
  qp.P = Mat::Identity(1, 1);
  qp.q = Vec::Zero(1);
  qp.A = Mat::Ones(2, 1);
  qp.lower = (Vec(2) << -kInf, 1.0).finished();
  qp.upper = (Vec(2) << -1.0, kInf).finished();
  QpSettings cfg;
  cfg.stall_iters = 500;
  cfg.max_iter = 20000;
  const QpSolution sol = solve(qp, cfg);
  EXPECT_EQ(sol.status, QpStatus::InfeasibleCertificate);
}

TEST(Qp, RandomStrictlyConvexProblemsSatisfyKkt) {
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const int p = static_cast<int>(rng() % 9);
    Mat M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = dist(rng);
    QpProblem qp;
    qp.P = M.transpose() * M + 0.1 * Mat::Identity(n, n);
    qp.q = Vec::NullaryExpr(n, [&](Eigen::Index) { return dist(rng); });
    qp.A = Mat::NullaryExpr(p, n, [&](Eigen::Index, Eigen::Index) { return dist(rng); });
    qp.lower = Vec(p);
    qp.upper = Vec(p);
    // Anchor the bounds around the image of a reference point so every
    // instance is feasible by construction.
    const Vec z0 = Vec::NullaryExpr(n, [&](Eigen::Index) { return dist(rng); });
    const Vec az0 = p > 0 ? Vec(qp.A * z0) : Vec(Vec::Zero(0));
    for (int i = 0; i < p; ++i) {
      const double a = std::abs(dist(rng)), b = std::abs(dist(rng));
      switch (rng() % 4) {
        case 0:  // two-sided
          qp.lower[i] = az0[i] - a;
          qp.upper[i] = az0[i] + b;
          break;
        case 1:  // equality
          qp.lower[i] = qp.upper[i] = az0[i];
          break;
        case 2:  // upper only
          qp.lower[i] = -kInf;
          qp.upper[i] = az0[i] + a;
          break;
        default:  // lower only
          qp.lower[i] = az0[i] - a;
          qp.upper[i] = kInf;
      }
    }
    const QpSolution sol = solve(qp);
    ASSERT_EQ(sol.status, QpStatus::Optimal) << "trial " << trial;
    EXPECT_LE(stationarity(qp, sol), 1e-5) << "trial " << trial;
    if (p > 0) {
      const Vec az = qp.A * sol.z;
      EXPECT_LE(detail::slab_violation(az, qp.lower, qp.upper), 1e-6)
          << "trial " << trial;
      for (int i = 0; i < p; ++i) {
        if (qp.lower[i] == qp.upper[i]) continue;  // equality rows: free sign
        if (sol.dual[i] > 1e-7) {
          EXPECT_NEAR(az[i], qp.upper[i], 1e-5 * (1.0 + std::abs(qp.upper[i])))
              << "trial " << trial << " row " << i;
        }
        if (sol.dual[i] < -1e-7) {
          EXPECT_NEAR(az[i], qp.lower[i], 1e-5 * (1.0 + std::abs(qp.lower[i])))
              << "trial " << trial << " row " << i;
        }
      }
    }
  }
}

TEST(Qp, ReportedObjectiveMatchesEvaluation) {
  QpProblem qp = scalar_qp(2.0, -2.0, -kInf, 0.5);
  qp.offset = 1.0;
  const QpSolution sol = solve(qp);
  EXPECT_DOUBLE_EQ(sol.objective, qp.objective(sol.z));
}

TEST(Qp, ValidationRejectsMalformedProblems) {
  QpProblem qp = scalar_qp(1.0, 0.0, 0.0, 1.0);
  qp.P = (Mat(2, 2) << 1.0, 0.5, 0.0, 1.0).finished();  // wrong size + asymmetric
  EXPECT_THROW(solve(qp), std::invalid_argument);

  qp = scalar_qp(-1.0, 0.0, 0.0, 1.0);  // indefinite
  EXPECT_THROW(solve(qp), std::invalid_argument);

  qp = scalar_qp(1.0, 0.0, 2.0, 1.0);  // lower > upper
  EXPECT_THROW(solve(qp), std::invalid_argument);
}

TEST(Qp, TripletExportListsNonzeros) {
  QpProblem qp = scalar_qp(2.0, -2.0, -kInf, 0.5);
  std::ostringstream os;
  export_triplets(qp, os);
  const std::string text = os.str();
  EXPECT_NE(text.find("# qp n=1 p=1"), std::string::npos);
  EXPECT_NE(text.find("0 0 2"), std::string::npos);
  EXPECT_NE(text.find("-2"), std::string::npos);
  EXPECT_NE(text.find("-inf"), std::string::npos);
}

}  // namespace
}  // namespace ratepmp
