#include "ratepmp/ocp.hpp"

#include <gtest/gtest.h>

#include <limits>

namespace ratepmp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

OcpSpec scalar_spec(int T = 3) {
  OcpSpec spec;
  spec.T = T;
  spec.d = 1;
  spec.m = 1;
  spec.dynamics = Dynamics::lti(Mat::Constant(1, 1, 0.5), Mat::Identity(1, 1));
  spec.cost = Cost::lq(Mat::Identity(1, 1), Mat::Identity(1, 1), Mat::Identity(1, 1));
  spec.state_sets = {ConvexSet::box(Vec::Constant(1, -10.0), Vec::Constant(1, 10.0))};
  spec.control_sets = {ConvexSet::box(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0))};
  spec.rate_bounds = {0.5};
  spec.x0 = Vec::Constant(1, 1.0);
  return spec;
}

TEST(OcpSpec, ValidationNamesOffendingFields) {
  OcpSpec spec = scalar_spec();
  spec.T = 1;
  try {
    spec.validate();
    FAIL() << "expected validation failure";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("T"), std::string::npos);
  }

  spec = scalar_spec();
  spec.state_sets = {spec.state_sets[0], spec.state_sets[0]};  // neither 1 nor T+1
  try {
    spec.validate();
    FAIL() << "expected validation failure";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("state_sets"), std::string::npos);
  }

  spec = scalar_spec();
  spec.rate_bounds = {0.5, -0.1};  // nonpositive entry
  try {
    spec.validate();
    FAIL() << "expected validation failure";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("rate_bounds"), std::string::npos);
  }

  spec = scalar_spec();
  spec.x0 = Vec::Constant(1, 99.0);  // outside the state box
  try {
    spec.validate();
    FAIL() << "expected validation failure";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("x0"), std::string::npos);
  }

  // Infinite rate bounds are allowed.
  spec = scalar_spec();
  spec.rate_bounds = {kInf, kInf};
  EXPECT_NO_THROW(spec.validate());
}

TEST(OcpSpec, BroadcastAccessorsAndEffectiveInitialSet) {
  OcpSpec spec = scalar_spec(4);
  EXPECT_EQ(spec.state_set(4).kind(), ConvexSet::Kind::Box);
  EXPECT_DOUBLE_EQ(spec.rate_bound(2), 0.5);
  EXPECT_EQ(spec.effective_initial_set().kind(), ConvexSet::Kind::Singleton);
  spec.x0.reset();
  EXPECT_EQ(spec.effective_initial_set().kind(), ConvexSet::Kind::Box);
}

TEST(Trajectory, RolloutCostAndRates) {
  const OcpSpec spec = scalar_spec(2);
  const std::vector<Vec> u = {Vec::Constant(1, 1.0), Vec::Constant(1, 0.5)};
  const Trajectory traj = rollout(spec, *spec.x0, u);
  ASSERT_EQ(traj.x.size(), 3u);
  EXPECT_DOUBLE_EQ(traj.x[1][0], 1.5);
  EXPECT_DOUBLE_EQ(traj.x[2][0], 1.25);
  // Stage costs 1/2(x^2 + u^2): t=0: 1/2(1+1)=1; t=1: 1/2(2.25+0.25)=1.25;
  // terminal 1/2 * 1.25^2 = 0.78125.
  EXPECT_DOUBLE_EQ(total_cost(spec, traj), 1.0 + 1.25 + 0.78125);
  const std::vector<double> rates = control_rates(traj, Norm::Inf);
  ASSERT_EQ(rates.size(), 1u);
  EXPECT_DOUBLE_EQ(rates[0], 0.5);
}

TEST(Trajectory, MaxViolationDetectsEachConstraintClass) {
  const OcpSpec spec = scalar_spec(2);
  Trajectory traj = rollout(spec, *spec.x0, {Vec::Constant(1, 1.0), Vec::Constant(1, 0.5)});
  EXPECT_LE(max_violation(spec, traj), 1e-15);
  EXPECT_TRUE(is_feasible(spec, traj));

  Trajectory broken = traj;
  broken.x[1][0] += 0.25;  // dynamics defect
  EXPECT_NEAR(max_violation(spec, broken), 0.25, 1e-12);

  broken = traj;
  broken.u[1][0] = 1.8;  // control bound (0.8) and rate bound (|1.8-1|=0.8 > 0.5)
  const double v = max_violation(spec, broken);
  EXPECT_GE(v, 0.8 - 1e-12);
  EXPECT_FALSE(is_feasible(spec, broken));

  broken = traj;
  broken.x[0][0] = 2.0;  // initial-state mismatch
  EXPECT_GE(max_violation(spec, broken), 1.0 - 1e-12);

  // Rate violation alone.
  broken = traj;
  broken.u[0][0] = 0.9;
  broken.u[1][0] = 0.2;  // |delta| = 0.7 > 0.5, re-roll states to isolate the rate
  Trajectory rerolled = rollout(spec, *spec.x0, broken.u);
  EXPECT_NEAR(max_violation(spec, rerolled), 0.2, 1e-12);
}

TEST(Trajectory, ShapeErrors) {
  const OcpSpec spec = scalar_spec(2);
  EXPECT_THROW(rollout(spec, Vec::Zero(2), {Vec::Zero(1), Vec::Zero(1)}),
               std::invalid_argument);
  EXPECT_THROW(rollout(spec, Vec::Zero(1), {Vec::Zero(1)}), std::invalid_argument);
}

}  // namespace
}  // namespace ratepmp
