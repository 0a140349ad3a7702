#pragma once

/**
 * Result export: plot-ready CSVs, a machine-readable report.json, and
 * a human-readable summary.txt.
 *
 * CSVs use '.' as the decimal separator, '\n' line endings, and 17
 * significant digits so every double round-trips exactly. rates.csv is
 * always recomputed from the control columns, never copied from solver
 * internals.
 */

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ratepmp/experiment.hpp"
#include "ratepmp/json_io.hpp"
#include "ratepmp/ocp.hpp"

namespace ratepmp {

/// Shortest 17-significant-digit representation that round-trips.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary keeps '\n' endings everywhere
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  return out;
}

}  // namespace detail

/// states.csv: header t,x_1..x_d; one row per t = 0..T.
inline void write_states_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out = detail::open_out(path);
  const Eigen::Index d = traj.x.empty() ? 0 : traj.x.front().size();
  out << "t";
  for (Eigen::Index i = 1; i <= d; ++i) out << ",x_" << i;
  out << '\n';
  for (std::size_t t = 0; t < traj.x.size(); ++t) {
    out << t;
    for (Eigen::Index i = 0; i < d; ++i) out << ',' << format_real(traj.x[t][i]);
    out << '\n';
  }
}

/// controls.csv: header t,u_1..u_m; one row per t = 0..T-1.
inline void write_controls_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out = detail::open_out(path);
  const Eigen::Index m = traj.u.empty() ? 0 : traj.u.front().size();
  out << "t";
  for (Eigen::Index i = 1; i <= m; ++i) out << ",u_" << i;
  out << '\n';
  for (std::size_t t = 0; t < traj.u.size(); ++t) {
    out << t;
    for (Eigen::Index i = 0; i < m; ++i) out << ',' << format_real(traj.u[t][i]);
    out << '\n';
  }
}

/// rates.csv: header t,abs_rate_1..abs_rate_m; row t holds
/// |u_i(t+1) - u_i(t)| for t = 0..T-2, recomputed from the controls.
inline void write_rates_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out = detail::open_out(path);
  const Eigen::Index m = traj.u.empty() ? 0 : traj.u.front().size();
  out << "t";
  for (Eigen::Index i = 1; i <= m; ++i) out << ",abs_rate_" << i;
  out << '\n';
  for (std::size_t t = 0; t + 1 < traj.u.size(); ++t) {
    out << t;
    for (Eigen::Index i = 0; i < m; ++i)
      out << ',' << format_real(std::abs(traj.u[t + 1][i] - traj.u[t][i]));
    out << '\n';
  }
}

inline Json record_to_json(const ExperimentRecord& rec) {
  Json j;
  j["problem"] = ocp_to_json(rec.spec);
  j["designed"] = trajectory_to_json(rec.designed);
  j["designed_cost"] = rec.designed_cost;
  if (rec.naive.has_value()) {
    j["naive"] = trajectory_to_json(*rec.naive);
    j["naive_cost"] = *rec.naive_cost;
    j["cost_increase"] = *rec.naive_cost - rec.designed_cost;
  }
  j["max_violation"] = rec.max_violation;
  j["rate_magnitudes"] = rec.rate_magnitudes;
  j["rate_active"] = rec.rate_active;
  j["control_active"] = rec.control_active;
  j["exact_max_gap"] = rec.exact_max_gap;
  j["solve_seconds"] = rec.solve_seconds;
  j["certificate_report"] = report_to_json(rec.report);
  if (!rec.x0_note.empty()) j["x0_note"] = rec.x0_note;
  return j;
}

inline std::string render_summary(const ExperimentRecord& rec) {
  std::string out;
  detail::append_line(out, "problem: T=%d d=%d m=%d", rec.spec.T, rec.spec.d, rec.spec.m);
  if (rec.spec.x0.has_value()) {
    std::string x0 = "(";
    for (Eigen::Index i = 0; i < rec.spec.x0->size(); ++i) {
      if (i) x0 += ", ";
      x0 += format_real((*rec.spec.x0)[i]);
    }
    x0 += ")";
    detail::append_line(out, "initial state: %s", x0.c_str());
  }
  if (!rec.x0_note.empty()) detail::append_line(out, "  %s", rec.x0_note.c_str());
  detail::append_line(out, "designed cost: %s", format_real(rec.designed_cost).c_str());
  if (rec.naive_cost.has_value()) {
    detail::append_line(out, "naive-clipped rollout cost: %s",
                        format_real(*rec.naive_cost).c_str());
    detail::append_line(out, "cost increase from clipping: %s",
                        format_real(*rec.naive_cost - rec.designed_cost).c_str());
  }
  detail::append_line(out, "max constraint violation: %.3e", rec.max_violation);
  int rate_hits = 0, control_hits = 0;
  for (bool a : rec.rate_active) rate_hits += a ? 1 : 0;
  for (bool a : rec.control_active) control_hits += a ? 1 : 0;
  detail::append_line(out, "rate bound active at %d of %zu steps", rate_hits,
                      rec.rate_active.size());
  detail::append_line(out, "control bound active at %d of %zu steps", control_hits,
                      rec.control_active.size());
  detail::append_line(out, "sampled maximization gap: %.3e", rec.exact_max_gap);
  detail::append_line(out, "solve time: %.3f s", rec.solve_seconds);
  out += '\n';
  out += rec.report.to_text();
  return out;
}

/// Write the full output bundle for a record into `dir` (created if
/// missing): states.csv, controls.csv, rates.csv, report.json,
/// summary.txt, plus naive_* CSVs when the record holds a rollout.
inline void write_outputs(const ExperimentRecord& rec, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_states_csv(dir / "states.csv", rec.designed);
  write_controls_csv(dir / "controls.csv", rec.designed);
  write_rates_csv(dir / "rates.csv", rec.designed);
  if (rec.naive.has_value()) {
    write_states_csv(dir / "naive_states.csv", *rec.naive);
    write_controls_csv(dir / "naive_controls.csv", *rec.naive);
    write_rates_csv(dir / "naive_rates.csv", *rec.naive);
  }
  save_json_file((dir / "report.json").string(), record_to_json(rec));
  std::ofstream summary = detail::open_out(dir / "summary.txt");
  summary << render_summary(rec);
}

}  // namespace ratepmp
