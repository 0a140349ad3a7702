#include "ratepmp/transcription.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <map>

#include "ratepmp/experiment.hpp"

namespace ratepmp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec vec1(double v) { return Vec::Constant(1, v); }

std::map<RowTag::Kind, int> census(const std::vector<RowTag>& tags) {
  std::map<RowTag::Kind, int> counts;
  for (const RowTag& tag : tags) ++counts[tag.kind];
  return counts;
}

// T=2 integrator, effort-plus-terminal cost with a closed-form optimum:
// min 1/2 u0^2 + 1/2 u1^2 + x(2)^2 over x(t+1) = x(t) + u(t), x(0) = 1
// has u0 = u1 = -2/5 and an optimal value of 1/5.
OcpSpec integrator_spec() {
  OcpSpec spec;
  spec.T = 2;
  spec.d = 1;
  spec.m = 1;
  spec.dynamics = Dynamics::lti(Mat::Identity(1, 1), Mat::Identity(1, 1));
  spec.cost = Cost::lq(Mat::Zero(1, 1), Mat::Identity(1, 1), Mat::Constant(1, 1, 2.0));
  spec.state_sets = {ConvexSet::box(vec1(-10.0), vec1(10.0))};
  spec.control_sets = {ConvexSet::box(vec1(-10.0), vec1(10.0))};
  spec.rate_bounds = {10.0};
  spec.x0 = vec1(1.0);
  return spec;
}

TEST(Transcribe, RowCensusOfTheRotationProblem) {
  const OcpSpec spec = example_problem();
  const RateOcpQp ocp_qp = transcribe(spec);
  EXPECT_EQ(ocp_qp.layout.size(), 123);
  EXPECT_EQ(ocp_qp.qp.n(), 123);
  EXPECT_EQ(ocp_qp.qp.p(), 242);
  ASSERT_EQ(ocp_qp.row_tags.size(), 242u);

  const auto counts = census(ocp_qp.row_tags);
  EXPECT_EQ(counts.at(RowTag::Kind::Dynamics), 90);
  EXPECT_EQ(counts.at(RowTag::Kind::StateBox), 93);
  EXPECT_EQ(counts.at(RowTag::Kind::ControlBox), 30);
  EXPECT_EQ(counts.at(RowTag::Kind::Rate), 29);
}

TEST(Transcribe, FixedInitialStateBecomesEqualityRows) {
  const OcpSpec spec = example_problem();
  const RateOcpQp ocp_qp = transcribe(spec);
  int pinned = 0;
  for (Eigen::Index r = 0; r < ocp_qp.qp.p(); ++r) {
    const RowTag& tag = ocp_qp.row_tags[static_cast<std::size_t>(r)];
    if (tag.kind != RowTag::Kind::StateBox || tag.t != 0) continue;
    EXPECT_EQ(ocp_qp.qp.lower[r], ocp_qp.qp.upper[r]);
    EXPECT_DOUBLE_EQ(ocp_qp.qp.lower[r], (*spec.x0)[tag.i]);
    ++pinned;
  }
  EXPECT_EQ(pinned, 3);
}

TEST(Transcribe, UnboundedRowsAreSkipped) {
  OcpSpec spec = example_problem();
  spec.state_sets = {ConvexSet::whole(3)};
  spec.rate_bounds = std::vector<double>(29, kInf);
  const RateOcpQp ocp_qp = transcribe(spec);
  const auto counts = census(ocp_qp.row_tags);
  EXPECT_EQ(counts.at(RowTag::Kind::StateBox), 3);  // only the x(0) pins survive
  EXPECT_EQ(counts.count(RowTag::Kind::Rate), 0u);

  // Half-bounded components keep their rows.
  OcpSpec half = example_problem();
  half.state_sets = {ConvexSet::box(
      (Vec(3) << -kInf, -kInf, -0.2).finished(),
      (Vec(3) << kInf, kInf, 8.0).finished())};
  const auto half_counts = census(transcribe(half).row_tags);
  EXPECT_EQ(half_counts.at(RowTag::Kind::StateBox), 3 + 30);
}

TEST(Transcribe, RequirementsAreEnforced) {
  OcpSpec spec = example_problem();
  spec.rate_norm = Norm::Two;
  EXPECT_NO_THROW(transcribe(spec));  // m = 1: the two norms coincide

  OcpSpec wide;
  wide.T = 2;
  wide.d = 1;
  wide.m = 2;
  wide.dynamics = Dynamics::lti(Mat::Identity(1, 1), Mat::Ones(1, 2));
  wide.cost = Cost::lq(Mat::Identity(1, 1), Mat::Identity(2, 2), Mat::Identity(1, 1));
  wide.state_sets = {ConvexSet::box(vec1(-1.0), vec1(1.0))};
  wide.control_sets = {ConvexSet::box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0))};
  wide.rate_bounds = {0.5};
  wide.rate_norm = Norm::Two;
  wide.x0 = vec1(0.0);
  EXPECT_THROW(transcribe(wide), std::invalid_argument);

  // Euclidean control balls in dimension > 1 are not box-representable.
  wide.rate_norm = Norm::Inf;
  wide.control_sets = {ConvexSet::norm_ball(Vec::Zero(2), 1.0, Norm::Two)};
  EXPECT_THROW(transcribe(wide), std::invalid_argument);
}

TEST(Transcribe, UnpackInvertsTheLayout) {
  const VariableLayout layout{3, 2, 1};
  Vec z(layout.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = static_cast<double>(i);
  const Trajectory traj = unpack(layout, z);
  ASSERT_EQ(traj.x.size(), 4u);
  ASSERT_EQ(traj.u.size(), 3u);
  EXPECT_DOUBLE_EQ(traj.x[0][0], 0.0);
  EXPECT_DOUBLE_EQ(traj.x[0][1], 1.0);
  EXPECT_DOUBLE_EQ(traj.x[3][1], 7.0);
  EXPECT_DOUBLE_EQ(traj.u[0][0], 8.0);
  EXPECT_DOUBLE_EQ(traj.u[2][0], 10.0);
  EXPECT_THROW(unpack(layout, Vec::Zero(3)), std::invalid_argument);
}

TEST(SolveOcp, ClosedFormIntegratorOptimum) {
  const OcpSpec spec = integrator_spec();
  const OcpSolveResult result = solve_ocp(spec);
  ASSERT_EQ(result.solution.status, QpStatus::Optimal);
  EXPECT_NEAR(result.trajectory.u[0][0], -0.4, 1e-6);
  EXPECT_NEAR(result.trajectory.u[1][0], -0.4, 1e-6);
  EXPECT_NEAR(result.trajectory.x[2][0], 0.2, 1e-6);
  EXPECT_NEAR(result.solution.objective, 0.2, 1e-6);
  EXPECT_NEAR(total_cost(spec, result.trajectory), 0.2, 1e-6);
  EXPECT_LE(max_violation(spec, result.trajectory), kFeasTol);
}

TEST(SolveOcp, ActiveRateBoundHandOptimum) {
  // Stage costs 1/2 u0^2 + u0 and 1/2 u1^2 - u1 pull the two controls
  // toward -1 and +1; under |u1 - u0| <= 1/2 the optimum is (-1/4, 1/4)
  // with multiplier 3/4 on the rate row and value -7/16.
  OcpSpec spec = integrator_spec();
  spec.cost = Cost::quadratic(
      {Mat::Zero(1, 1)}, {Vec::Zero(1)},
      {Mat::Identity(1, 1)}, {vec1(1.0), vec1(-1.0)}, {0.0},
      Mat::Zero(1, 1), Vec::Zero(1), 0.0);
  spec.rate_bounds = {0.5};
  const OcpSolveResult result = solve_ocp(spec);
  ASSERT_EQ(result.solution.status, QpStatus::Optimal);
  EXPECT_NEAR(result.trajectory.u[0][0], -0.25, 1e-6);
  EXPECT_NEAR(result.trajectory.u[1][0], 0.25, 1e-6);
  EXPECT_NEAR(result.solution.objective, -0.4375, 1e-6);
  const double rate = std::abs(result.trajectory.u[1][0] - result.trajectory.u[0][0]);
  EXPECT_NEAR(rate, 0.5, 1e-6);

  // The rate row carries the activity: find it and check its dual.
  const RateOcpQp& tr = result.transcription;
  for (Eigen::Index r = 0; r < tr.qp.p(); ++r) {
    if (tr.row_tags[static_cast<std::size_t>(r)].kind == RowTag::Kind::Rate) {
      EXPECT_NEAR(result.solution.dual[r], 0.75, 1e-5);
    }
  }
}

TEST(TranscribeLifted, DimensionsAndCostAgreement) {
  OcpSpec spec;
  spec.T = 4;
  spec.d = 1;
  spec.m = 1;
  spec.dynamics = Dynamics::lti(Mat::Identity(1, 1), Mat::Identity(1, 1));
  spec.cost = Cost::lq(Mat::Identity(1, 1), Mat::Identity(1, 1), Mat::Identity(1, 1));
  spec.state_sets = {ConvexSet::box(vec1(-5.0), vec1(5.0))};
  spec.control_sets = {ConvexSet::box(vec1(-1.0), vec1(1.0))};
  spec.rate_bounds = {0.25, 0.25, 0.25};
  spec.x0 = vec1(1.0);

  const LiftedProblem lifted = build_lifted(spec);
  const LiftedQp lifted_qp = transcribe_lifted(lifted);
  EXPECT_EQ(lifted.q, 4);
  EXPECT_EQ(lifted_qp.layout.size(), 24);

  const OcpSolveResult original = solve_ocp(spec);
  ASSERT_EQ(original.solution.status, QpStatus::Optimal);
  const QpSolution lifted_sol = solve(lifted_qp.qp);
  ASSERT_EQ(lifted_sol.status, QpStatus::Optimal);
  EXPECT_NEAR(original.solution.objective, lifted_sol.objective, 1e-6);

  // The auxiliary blocks of the lifted optimum realize the control
  // differences they were introduced to carry.
  const ExtendedTrajectory ext = unpack_lifted(lifted_qp.layout, lifted_sol.z);
  for (int k = 0; k <= spec.T - 2; ++k) {
    const Vec diff = ext.u[static_cast<std::size_t>(k) + 1] -
                     ext.u[static_cast<std::size_t>(k)];
    for (int t = k + 2; t <= spec.T; ++t)
      EXPECT_LE((ext.y[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)] - diff)
                    .lpNorm<Eigen::Infinity>(),
                1e-5);
  }

  // Both window readings coincide for symmetric control boxes.
  const LiftedQp literal =
      transcribe_lifted(build_lifted(spec, ControlWindowReading::LiteralNext));
  const QpSolution literal_sol = solve(literal.qp);
  ASSERT_EQ(literal_sol.status, QpStatus::Optimal);
  EXPECT_NEAR(literal_sol.objective, lifted_sol.objective, 1e-6);
}

}  // namespace
}  // namespace ratepmp
