// Command-line front end for the rate-constrained optimal-control
// toolkit: solve problems, audit certificates, run the worked example
// and its naive-clipping counter-experiment, cross-check against the
// brute-force oracle, and validate the lifting equivalence.
//
// Exit codes: 0 = pass, 2 = certificate/constraint failure, 1 = usage
// or I/O error. Set RATEPMP_LOG to quiet/info/debug to tune stderr
// verbosity.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ratepmp/ratepmp.hpp"

namespace {

using namespace ratepmp;

struct RunConfig {
  std::string problem_path;
  std::string trajectory_path;
  std::string certificate_path;
  std::string output_dir = "out";
  double eps_qp = kQpTol;
  double eps_cert = kCertTol;
  double eps_feas = kFeasTol;
  std::string x0_override;
  double grid_step = 0.01;
  int samples = 1000;
  unsigned seed = 0;
  bool rate_first = false;  // alternative clipping order
  bool literal_window = false;
};

Vec parse_vector(const std::string& csv) {
  std::vector<double> vals;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const std::size_t comma = csv.find(',', pos);
    const std::string tok = csv.substr(pos, comma == std::string::npos ? csv.npos
                                                                       : comma - pos);
    if (tok.empty()) throw std::invalid_argument("empty component in vector literal");
    vals.push_back(std::stod(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  Vec v(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
  return v;
}

void apply_x0_override(OcpSpec& spec, const std::string& csv) {
  if (csv.empty()) return;
  Vec x0 = parse_vector(csv);
  if (x0.size() != spec.d)
    throw std::invalid_argument("--x0 must have " + std::to_string(spec.d) +
                                " components");
  spec.x0 = std::move(x0);
  spec.validate();
}

QpSettings qp_settings(const RunConfig& cfg) {
  QpSettings settings;
  settings.eps = cfg.eps_qp;
  return settings;
}

/// Solve + certify a problem and write the output bundle. Returns the
/// record; throws runtime_error on solver failure.
ExperimentRecord solve_and_certify(const OcpSpec& spec, const RunConfig& cfg) {
  ExperimentRecord rec;
  rec.spec = spec;
  const auto start = std::chrono::steady_clock::now();
  OcpSolveResult solved = solve_ocp(spec, qp_settings(cfg));
  rec.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (solved.solution.status != QpStatus::Optimal)
    throw std::runtime_error(std::string("solver returned ") +
                             to_string(solved.solution.status));
  rec.designed = solved.trajectory;
  rec.designed_cost = total_cost(spec, rec.designed);
  rec.max_violation = max_violation(spec, rec.designed);
  detail::fill_activity(spec, rec.designed, rec);
  const PmpCertificate cert =
      recover_multipliers(spec, solved.transcription, solved.solution);
  rec.report = check_certificate(spec, rec.designed, cert, nullptr, cfg.eps_cert);
  try {
    rec.exact_max_gap = exact_max_check(spec, rec.designed, cert, cfg.samples, cfg.seed);
  } catch (const std::invalid_argument&) {
    rec.report.notes.push_back(
        "sampled maximization check skipped: problem does not qualify "
        "(needs compact control sets and convex-in-u cost)");
  }
  return rec;
}

int cmd_solve(const RunConfig& cfg) {
  OcpSpec spec = load_problem(cfg.problem_path);
  apply_x0_override(spec, cfg.x0_override);
  ExperimentRecord rec = solve_and_certify(spec, cfg);
  write_outputs(rec, cfg.output_dir);
  std::printf("%s", render_summary(rec).c_str());
  std::printf("outputs written to %s\n", cfg.output_dir.c_str());
  if (rec.max_violation > cfg.eps_feas) {
    std::printf("FAIL: constraint violation %.3e exceeds %.3e\n", rec.max_violation,
                cfg.eps_feas);
    return 2;
  }
  if (!rec.report.pass) {
    std::printf("FAIL: certificate residuals exceed %.3e\n", cfg.eps_cert);
    return 2;
  }
  std::printf("PASS\n");
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  OcpSpec spec = load_problem(cfg.problem_path);
  const Json traj_json = load_json_file(cfg.trajectory_path);
  const Json cert_json = load_json_file(cfg.certificate_path);
  const Trajectory traj = trajectory_from_json(traj_json, spec.T, spec.d, spec.m);
  const PmpCertificate cert = certificate_from_json(cert_json, spec.T, spec.d, spec.m);
  const ResidualReport report = check_certificate(spec, traj, cert, nullptr, cfg.eps_cert);
  std::printf("%s", report.to_text().c_str());
  return report.pass ? 0 : 2;
}

int cmd_benchmark(const RunConfig& cfg) {
  Vec x0 = (Vec(3) << 2.0, 2.0, 1.0).finished();
  std::string note =
      "initial state (2, 2, 1) is this implementation's documented default; "
      "the problem statement leaves x0 open";
  if (!cfg.x0_override.empty()) {
    x0 = parse_vector(cfg.x0_override);
    note = "initial state supplied on the command line";
  }
  ExperimentRecord rec;
  try {
    rec = run_benchmark(example_problem(x0), qp_settings(cfg), cfg.samples, cfg.seed);
  } catch (const std::runtime_error& e) {
    std::printf("FAIL: %s\n", e.what());
    return 2;
  }
  rec.x0_note = note;
  write_outputs(rec, cfg.output_dir);
  std::printf("%s", render_summary(rec).c_str());
  std::printf("outputs written to %s\nPASS\n", cfg.output_dir.c_str());
  return 0;
}

int cmd_naive_clip(const RunConfig& cfg) {
  OcpSpec spec = load_problem(cfg.problem_path);
  apply_x0_override(spec, cfg.x0_override);
  ExperimentRecord rec;
  try {
    rec = run_naive_experiment(spec, qp_settings(cfg),
                               cfg.rate_first ? ClipOrder::RateThenMagnitude
                                              : ClipOrder::MagnitudeThenRate);
  } catch (const std::runtime_error& e) {
    std::printf("FAIL: %s\n", e.what());
    return 2;
  }
  write_outputs(rec, cfg.output_dir);
  std::printf("%s", render_summary(rec).c_str());
  std::printf("outputs written to %s\nPASS\n", cfg.output_dir.c_str());
  return 0;
}

int cmd_oracle(const RunConfig& cfg) {
  OcpSpec spec = load_problem(cfg.problem_path);
  apply_x0_override(spec, cfg.x0_override);

  // Translate the grid step into points per control dimension using
  // the widest control interval.
  double extent = 0.0;
  for (int t = 0; t < spec.T; ++t) {
    const ConvexSet& U = spec.control_set(t);
    if (U.kind() == ConvexSet::Kind::Box)
      extent = std::max(extent, (U.upper() - U.lower()).maxCoeff());
  }
  const int points =
      extent > 0.0 ? static_cast<int>(std::ceil(extent / cfg.grid_step)) + 1 : 2;

  const OracleResult oracle = brute_force_oracle(spec, points);
  if (!oracle.feasible) {
    std::printf("FAIL: no feasible control sequence on the grid\n");
    return 2;
  }
  OcpSolveResult solved = solve_ocp(spec, qp_settings(cfg));
  if (solved.solution.status != QpStatus::Optimal)
    throw std::runtime_error(std::string("solver returned ") +
                             to_string(solved.solution.status));
  const double qp_cost = total_cost(spec, solved.trajectory);
  std::printf("grid points per control dimension: %d\n", points);
  std::printf("grid-search cost:   %s\n", format_real(oracle.cost).c_str());
  std::printf("qp cost:            %s\n", format_real(qp_cost).c_str());
  std::printf("qp - grid gap:      %s\n", format_real(qp_cost - oracle.cost).c_str());
  if (qp_cost > oracle.cost + 1e-6) {
    std::printf("FAIL: qp cost exceeds the grid-search cost beyond tolerance\n");
    return 2;
  }
  std::printf("PASS\n");
  return 0;
}

int cmd_lift_check(const RunConfig& cfg) {
  OcpSpec spec = load_problem(cfg.problem_path);
  apply_x0_override(spec, cfg.x0_override);
  const LiftedProblem lifted =
      build_lifted(spec, cfg.literal_window ? ControlWindowReading::LiteralNext
                                            : ControlWindowReading::ReflectedPrev);

  OcpSolveResult original = solve_ocp(spec, qp_settings(cfg));
  if (original.solution.status != QpStatus::Optimal)
    throw std::runtime_error(std::string("original solve returned ") +
                             to_string(original.solution.status));
  const LiftedQp lifted_qp = transcribe_lifted(lifted);
  const QpSolution lifted_sol = solve(lifted_qp.qp, qp_settings(cfg));
  if (lifted_sol.status != QpStatus::Optimal)
    throw std::runtime_error(std::string("lifted solve returned ") +
                             to_string(lifted_sol.status));

  const double cost_original = original.solution.objective;
  const double cost_lifted = lifted_sol.objective;
  std::printf("original optimal cost: %s\n", format_real(cost_original).c_str());
  std::printf("lifted optimal cost:   %s\n", format_real(cost_lifted).c_str());
  std::printf("difference:            %s\n",
              format_real(cost_lifted - cost_original).c_str());

  // Round-trip the original optimum through the lifting maps.
  const ExtendedTrajectory ext = f12(spec, original.trajectory);
  const Trajectory back = f21(spec, ext);
  double roundtrip = 0.0;
  for (std::size_t t = 0; t < back.x.size(); ++t)
    roundtrip = std::max(
        roundtrip, (back.x[t] - original.trajectory.x[t]).lpNorm<Eigen::Infinity>());
  for (std::size_t t = 0; t < back.u.size(); ++t)
    roundtrip = std::max(
        roundtrip, (back.u[t] - original.trajectory.u[t]).lpNorm<Eigen::Infinity>());
  std::printf("lift round-trip error: %s\n", format_real(roundtrip).c_str());

  if (std::abs(cost_lifted - cost_original) > 1e-6 || roundtrip > 0.0) {
    std::printf("FAIL: lifted formulation disagrees with the original\n");
    return 2;
  }
  std::printf("PASS\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rate-constrained optimal control: solve, certify, and audit"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&cfg](CLI::App* sub, bool with_problem) {
    if (with_problem)
      sub->add_option("problem", cfg.problem_path, "problem JSON file")->required();
    sub->add_option("--out", cfg.output_dir, "output directory");
    sub->add_option("--eps-qp", cfg.eps_qp, "solver tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--eps-cert", cfg.eps_cert, "certificate tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--eps-feas", cfg.eps_feas, "feasibility tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--x0", cfg.x0_override, "initial state override v1,v2,...");
    sub->add_option("--samples", cfg.samples,
                    "sample count for the maximization check")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "sampling seed for the maximization check");
  };

  CLI::App* solve_cmd = app.add_subcommand("solve", "solve a problem and certify");
  add_common(solve_cmd, true);
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "check a trajectory + certificate pair");
  verify_cmd->add_option("problem", cfg.problem_path, "problem JSON file")->required();
  verify_cmd->add_option("trajectory", cfg.trajectory_path, "trajectory JSON file")
      ->required();
  verify_cmd->add_option("certificate", cfg.certificate_path, "certificate JSON file")
      ->required();
  verify_cmd->add_option("--eps-cert", cfg.eps_cert, "certificate tolerance")
      ->check(CLI::PositiveNumber);
  CLI::App* benchmark_cmd =
      app.add_subcommand("benchmark", "run the worked rotation example");
  add_common(benchmark_cmd, false);
  CLI::App* naive_cmd = app.add_subcommand(
      "naive-clip", "design ignoring input bounds, clip, roll out, compare");
  add_common(naive_cmd, true);
  naive_cmd->add_flag("--rate-first", cfg.rate_first,
                      "clip rate before magnitude (default is magnitude first)");
  CLI::App* oracle_cmd =
      app.add_subcommand("oracle", "cross-check against brute-force grid search");
  add_common(oracle_cmd, true);
  oracle_cmd->add_option("--grid", cfg.grid_step, "grid step for the control mesh")
      ->check(CLI::PositiveNumber);
  CLI::App* lift_cmd = app.add_subcommand(
      "lift-check", "compare the original and lifted formulations");
  add_common(lift_cmd, true);
  lift_cmd->add_flag("--literal-window", cfg.literal_window,
                     "use the literal next-step control window set");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(cfg);
    if (verify_cmd->parsed()) return cmd_verify(cfg);
    if (benchmark_cmd->parsed()) return cmd_benchmark(cfg);
    if (naive_cmd->parsed()) return cmd_naive_clip(cfg);
    if (oracle_cmd->parsed()) return cmd_oracle(cfg);
    if (lift_cmd->parsed()) return cmd_lift_check(cfg);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
