#pragma once

/**
 * JSON (de)serialization for problems, trajectories, certificates, and
 * residual reports.
 *
 * Schema notes:
 *  - matrices are row-major nested arrays; a dynamics/cost entry may be
 *    a single matrix (constant over time) or an array with exactly one
 *    matrix per step;
 *  - infinite bounds are written as the strings "inf" / "-inf";
 *  - rate_bounds must list exactly T-1 values R(0..T-2);
 *  - schema violations throw with the offending field's path.
 *
 * Loading validates every problem invariant before returning, so a
 * successfully loaded OcpSpec is ready to transcribe.
 */

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ratepmp/certificate.hpp"
#include "ratepmp/ocp.hpp"

namespace ratepmp {

using Json = nlohmann::ordered_json;

namespace json_detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error("schema error at '" + path + "': " + what);
}

inline const Json& field(const Json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing required field");
  return *it;
}

inline double real(const Json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    fail(path, "expected a number or \"inf\"/\"-inf\", got \"" + s + "\"");
  }
  fail(path, "expected a number");
}

inline Json encode_real(double v) {
  if (std::isinf(v)) return v > 0 ? Json("inf") : Json("-inf");
  return Json(v);
}

inline Vec vec(const Json& j, const std::string& path, int expected = -1) {
  if (!j.is_array()) fail(path, "expected an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = real(j[i], path + "[" + std::to_string(i) + "]");
  if (expected >= 0 && v.size() != expected)
    fail(path, "expected " + std::to_string(expected) + " entries, got " +
                   std::to_string(v.size()));
  return v;
}

inline Mat mat(const Json& j, const std::string& path, int rows = -1, int cols = -1) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty 2-D array");
  const std::size_t r = j.size();
  if (!j[0].is_array()) fail(path + "[0]", "expected a row array");
  const std::size_t c = j[0].size();
  Mat out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  for (std::size_t i = 0; i < r; ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].size() != c) fail(row_path, "ragged matrix rows");
    for (std::size_t k = 0; k < c; ++k)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          real(j[i][k], row_path + "[" + std::to_string(k) + "]");
  }
  if ((rows >= 0 && out.rows() != rows) || (cols >= 0 && out.cols() != cols))
    fail(path, "expected a " + std::to_string(rows) + "x" + std::to_string(cols) +
                   " matrix, got " + std::to_string(out.rows()) + "x" +
                   std::to_string(out.cols()));
  return out;
}

inline Json encode_vec(const Vec& v) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(encode_real(v[i]));
  return j;
}

inline Json encode_mat(const Mat& m) {
  Json j = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(encode_real(m(r, c)));
    j.push_back(std::move(row));
  }
  return j;
}

/// A matrix field that is either one matrix (constant) or a list of
/// exactly `count` matrices.
inline std::vector<Mat> mat_seq(const Json& j, const std::string& path, int count,
                                int rows, int cols) {
  if (!j.is_array() || j.empty()) fail(path, "expected a matrix or list of matrices");
  if (j[0].is_array() && !j[0].empty() && j[0][0].is_array()) {
    if (static_cast<int>(j.size()) != count)
      fail(path, "expected " + std::to_string(count) + " matrices, got " +
                     std::to_string(j.size()));
    std::vector<Mat> out;
    for (std::size_t i = 0; i < j.size(); ++i)
      out.push_back(mat(j[i], path + "[" + std::to_string(i) + "]", rows, cols));
    return out;
  }
  return {mat(j, path, rows, cols)};
}

/// A vector field that is either one vector (constant) or a list of
/// exactly `count` vectors.
inline std::vector<Vec> vec_seq(const Json& j, const std::string& path, int count,
                                int dim) {
  if (!j.is_array() || j.empty()) fail(path, "expected a vector or list of vectors");
  if (j[0].is_array()) {
    if (static_cast<int>(j.size()) != count)
      fail(path, "expected " + std::to_string(count) + " vectors, got " +
                     std::to_string(j.size()));
    std::vector<Vec> out;
    for (std::size_t i = 0; i < j.size(); ++i)
      out.push_back(vec(j[i], path + "[" + std::to_string(i) + "]", dim));
    return out;
  }
  return {vec(j, path, dim)};
}

inline ConvexSet set_from_json(const Json& j, const std::string& path, int dim) {
  const std::string type = field(j, path, "type").get<std::string>();
  if (type == "box")
    return ConvexSet::box(vec(field(j, path, "lower"), path + ".lower", dim),
                          vec(field(j, path, "upper"), path + ".upper", dim));
  if (type == "norm_ball") {
    const std::string norm =
        j.contains("norm") ? j["norm"].get<std::string>() : std::string("inf");
    if (norm != "inf" && norm != "two") fail(path + ".norm", "expected \"inf\" or \"two\"");
    return ConvexSet::norm_ball(vec(field(j, path, "center"), path + ".center", dim),
                                real(field(j, path, "radius"), path + ".radius"),
                                norm == "inf" ? Norm::Inf : Norm::Two);
  }
  if (type == "singleton")
    return ConvexSet::singleton(vec(field(j, path, "point"), path + ".point", dim));
  if (type == "whole") return ConvexSet::whole(dim);
  fail(path + ".type", "unknown set type \"" + type + "\"");
}

inline Json set_to_json(const ConvexSet& s) {
  Json j;
  switch (s.kind()) {
    case ConvexSet::Kind::Box:
      j["type"] = "box";
      j["lower"] = encode_vec(s.lower());
      j["upper"] = encode_vec(s.upper());
      break;
    case ConvexSet::Kind::NormBall:
      j["type"] = "norm_ball";
      j["center"] = encode_vec(s.center());
      j["radius"] = s.radius();
      j["norm"] = s.ball_norm() == Norm::Inf ? "inf" : "two";
      break;
    case ConvexSet::Kind::Singleton:
      j["type"] = "singleton";
      j["point"] = encode_vec(s.point());
      break;
    case ConvexSet::Kind::Whole:
      j["type"] = "whole";
      break;
  }
  return j;
}

inline std::vector<Vec> covector_seq(const Json& j, const std::string& path, int count,
                                     int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != count)
    fail(path, "expected exactly " + std::to_string(count) + " entries");
  std::vector<Vec> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(vec(j[i], path + "[" + std::to_string(i) + "]", dim));
  return out;
}

}  // namespace json_detail

inline OcpSpec ocp_from_json(const Json& j) {
  using namespace json_detail;
  OcpSpec spec;
  spec.T = field(j, "", "T").get<int>();
  spec.d = field(j, "", "d").get<int>();
  spec.m = field(j, "", "m").get<int>();
  if (spec.T < 2) fail("T", "horizon must be >= 2");
  if (spec.d < 1 || spec.m < 1) fail("d/m", "dimensions must be positive");

  const Json& dyn = field(j, "", "dynamics");
  std::vector<Mat> A = mat_seq(field(dyn, "dynamics", "A"), "dynamics.A", spec.T, spec.d,
                               spec.d);
  std::vector<Mat> B = mat_seq(field(dyn, "dynamics", "B"), "dynamics.B", spec.T, spec.d,
                               spec.m);
  std::vector<Vec> c;
  if (dyn.contains("c")) c = vec_seq(dyn["c"], "dynamics.c", spec.T, spec.d);
  spec.dynamics = Dynamics::ltv(std::move(A), std::move(B), std::move(c));

  const Json& cost = field(j, "", "cost");
  std::vector<Mat> Q = mat_seq(field(cost, "cost", "Q"), "cost.Q", spec.T, spec.d, spec.d);
  std::vector<Mat> R = mat_seq(field(cost, "cost", "R"), "cost.R", spec.T, spec.m, spec.m);
  std::vector<Vec> q, r;
  if (cost.contains("q")) q = vec_seq(cost["q"], "cost.q", spec.T, spec.d);
  if (cost.contains("r")) r = vec_seq(cost["r"], "cost.r", spec.T, spec.m);
  std::vector<double> offset;
  if (cost.contains("offset")) {
    if (cost["offset"].is_array())
      for (std::size_t i = 0; i < cost["offset"].size(); ++i)
        offset.push_back(real(cost["offset"][i], "cost.offset[" + std::to_string(i) + "]"));
    else
      offset.push_back(real(cost["offset"], "cost.offset"));
  }
  Mat Qf = cost.contains("Qf") ? mat(cost["Qf"], "cost.Qf", spec.d, spec.d)
                               : Mat::Zero(spec.d, spec.d);
  Vec qf = cost.contains("qf") ? vec(cost["qf"], "cost.qf", spec.d) : Vec::Zero(spec.d);
  const double term_off =
      cost.contains("terminal_offset") ? real(cost["terminal_offset"], "cost.terminal_offset")
                                       : 0.0;
  spec.cost = Cost::quadratic(std::move(Q), std::move(q), std::move(R), std::move(r),
                              std::move(offset), std::move(Qf), std::move(qf), term_off);

  const Json& ss = field(j, "", "state_sets");
  if (!ss.is_array() || ss.empty()) fail("state_sets", "expected a non-empty array");
  if (ss.size() != 1 && static_cast<int>(ss.size()) != spec.T + 1)
    fail("state_sets", "expected 1 or T+1 = " + std::to_string(spec.T + 1) +
                           " sets, got " + std::to_string(ss.size()));
  for (std::size_t i = 0; i < ss.size(); ++i)
    spec.state_sets.push_back(
        set_from_json(ss[i], "state_sets[" + std::to_string(i) + "]", spec.d));

  const Json& cs = field(j, "", "control_sets");
  if (!cs.is_array() || cs.empty()) fail("control_sets", "expected a non-empty array");
  if (cs.size() != 1 && static_cast<int>(cs.size()) != spec.T)
    fail("control_sets", "expected 1 or T = " + std::to_string(spec.T) + " sets, got " +
                             std::to_string(cs.size()));
  for (std::size_t i = 0; i < cs.size(); ++i)
    spec.control_sets.push_back(
        set_from_json(cs[i], "control_sets[" + std::to_string(i) + "]", spec.m));

  const Json& rb = field(j, "", "rate_bounds");
  if (!rb.is_array() || static_cast<int>(rb.size()) != spec.T - 1)
    fail("rate_bounds", "expected exactly T-1 = " + std::to_string(spec.T - 1) +
                            " entries, got " +
                            std::to_string(rb.is_array() ? rb.size() : 0));
  for (std::size_t i = 0; i < rb.size(); ++i)
    spec.rate_bounds.push_back(real(rb[i], "rate_bounds[" + std::to_string(i) + "]"));

  if (j.contains("rate_norm")) {
    const std::string n = j["rate_norm"].get<std::string>();
    if (n != "inf" && n != "two") fail("rate_norm", "expected \"inf\" or \"two\"");
    spec.rate_norm = n == "inf" ? Norm::Inf : Norm::Two;
  }
  if (j.contains("x0") && !j["x0"].is_null()) spec.x0 = vec(j["x0"], "x0", spec.d);

  spec.validate();
  return spec;
}

inline Json ocp_to_json(const OcpSpec& spec) {
  using namespace json_detail;
  Json j;
  j["T"] = spec.T;
  j["d"] = spec.d;
  j["m"] = spec.m;
  Json dyn;
  if (spec.dynamics.ltv_stages() == 1) {
    dyn["A"] = encode_mat(spec.dynamics.A(0));
    dyn["B"] = encode_mat(spec.dynamics.B(0));
    dyn["c"] = encode_vec(spec.dynamics.c(0));
  } else {
    dyn["A"] = Json::array();
    dyn["B"] = Json::array();
    dyn["c"] = Json::array();
    for (int t = 0; t < spec.T; ++t) {
      dyn["A"].push_back(encode_mat(spec.dynamics.A(t)));
      dyn["B"].push_back(encode_mat(spec.dynamics.B(t)));
      dyn["c"].push_back(encode_vec(spec.dynamics.c(t)));
    }
  }
  j["dynamics"] = std::move(dyn);
  Json cost;
  bool stage_varies = false;
  for (int t = 1; t < spec.T && !stage_varies; ++t)
    stage_varies = spec.cost.Q(t) != spec.cost.Q(0) || spec.cost.q(t) != spec.cost.q(0) ||
                   spec.cost.R(t) != spec.cost.R(0) || spec.cost.r(t) != spec.cost.r(0) ||
                   spec.cost.offset(t) != spec.cost.offset(0);
  if (stage_varies) {
    cost["Q"] = Json::array();
    cost["q"] = Json::array();
    cost["R"] = Json::array();
    cost["r"] = Json::array();
    cost["offset"] = Json::array();
    for (int t = 0; t < spec.T; ++t) {
      cost["Q"].push_back(encode_mat(spec.cost.Q(t)));
      cost["q"].push_back(encode_vec(spec.cost.q(t)));
      cost["R"].push_back(encode_mat(spec.cost.R(t)));
      cost["r"].push_back(encode_vec(spec.cost.r(t)));
      cost["offset"].push_back(spec.cost.offset(t));
    }
  } else {
    cost["Q"] = encode_mat(spec.cost.Q(0));
    cost["q"] = encode_vec(spec.cost.q(0));
    cost["R"] = encode_mat(spec.cost.R(0));
    cost["r"] = encode_vec(spec.cost.r(0));
    cost["offset"] = spec.cost.offset(0);
  }
  cost["Qf"] = encode_mat(spec.cost.Qf());
  cost["qf"] = encode_vec(spec.cost.qf());
  cost["terminal_offset"] = spec.cost.terminal_offset();
  j["cost"] = std::move(cost);
  j["state_sets"] = Json::array();
  for (const ConvexSet& s : spec.state_sets) j["state_sets"].push_back(set_to_json(s));
  j["control_sets"] = Json::array();
  for (const ConvexSet& s : spec.control_sets) j["control_sets"].push_back(set_to_json(s));
  j["rate_bounds"] = Json::array();
  for (int k = 0; k <= spec.T - 2; ++k)
    j["rate_bounds"].push_back(encode_real(spec.rate_bound(k)));
  j["rate_norm"] = spec.rate_norm == Norm::Inf ? "inf" : "two";
  if (spec.x0.has_value()) j["x0"] = encode_vec(*spec.x0);
  return j;
}

inline Trajectory trajectory_from_json(const Json& j, int T, int d, int m) {
  using namespace json_detail;
  Trajectory traj;
  traj.x = covector_seq(field(j, "", "x"), "x", T + 1, d);
  traj.u = covector_seq(field(j, "", "u"), "u", T, m);
  return traj;
}

inline Json trajectory_to_json(const Trajectory& traj) {
  using namespace json_detail;
  Json j;
  j["x"] = Json::array();
  for (const Vec& v : traj.x) j["x"].push_back(encode_vec(v));
  j["u"] = Json::array();
  for (const Vec& v : traj.u) j["u"].push_back(encode_vec(v));
  return j;
}

inline PmpCertificate certificate_from_json(const Json& j, int T, int d, int m) {
  using namespace json_detail;
  PmpCertificate cert;
  cert.psi0 = real(field(j, "", "psi0"), "psi0");
  cert.eta_f = covector_seq(field(j, "", "eta_f"), "eta_f", T + 1, d);
  cert.eta_x = covector_seq(field(j, "", "eta_x"), "eta_x", T + 1, d);
  const Json& g = field(j, "", "eta_g");
  const Json& y = field(j, "", "eta_y");
  if (!g.is_array() || static_cast<int>(g.size()) != T - 1)
    fail("eta_g", "expected exactly T-1 blocks");
  if (!y.is_array() || static_cast<int>(y.size()) != T - 1)
    fail("eta_y", "expected exactly T-1 blocks");
  for (int k = 0; k <= T - 2; ++k) {
    cert.eta_g.push_back(covector_seq(g[static_cast<std::size_t>(k)],
                                      "eta_g[" + std::to_string(k) + "]", T + 1, m));
    cert.eta_y.push_back(covector_seq(y[static_cast<std::size_t>(k)],
                                      "eta_y[" + std::to_string(k) + "]", T + 1, m));
  }
  cert.validate(T, d, m);
  return cert;
}

inline Json certificate_to_json(const PmpCertificate& cert) {
  using namespace json_detail;
  Json j;
  j["psi0"] = cert.psi0;
  auto encode_seq = [](const std::vector<Vec>& seq) {
    Json arr = Json::array();
    for (const Vec& v : seq) arr.push_back(encode_vec(v));
    return arr;
  };
  j["eta_f"] = encode_seq(cert.eta_f);
  j["eta_x"] = encode_seq(cert.eta_x);
  j["eta_g"] = Json::array();
  for (const auto& block : cert.eta_g) j["eta_g"].push_back(encode_seq(block));
  j["eta_y"] = Json::array();
  for (const auto& block : cert.eta_y) j["eta_y"].push_back(encode_seq(block));
  return j;
}

inline Json report_to_json(const ResidualReport& rep) {
  Json j;
  j["pass"] = rep.pass;
  j["tolerance"] = rep.eps;
  j["r_state_dyn"] = rep.r_state_dyn;
  j["r_adjoint"] = rep.r_adjoint;
  j["r_chain"] = rep.r_chain;
  j["r_transversality"] = rep.r_transversality;
  j["r_hmax"] = rep.r_hmax;
  j["r_sign"] = rep.r_sign;
  j["r_nontriv"] = rep.r_nontriv;
  Json trans;
  trans["eta_f_initial"] = rep.trans_eta_f_initial;
  trans["grad_initial"] = rep.trans_grad_initial;
  trans["eta_x_terminal"] = rep.trans_eta_x_terminal;
  trans["multiplier_sign"] = rep.trans_sign;
  j["transversality_breakdown"] = std::move(trans);
  Json info;
  info["h_terminal_convention"] = rep.h_terminal;
  info["terminal_adjoint_tie"] = rep.terminal_adjoint_gap;
  j["informational"] = std::move(info);
  j["state_dyn_by_t"] = rep.state_dyn_by_t;
  j["adjoint_by_t"] = rep.adjoint_by_t;
  j["hmax_by_t"] = rep.hmax_by_t;
  j["chain_by_k"] = rep.chain_by_k;
  j["sign_x_by_t"] = rep.sign_x_by_t;
  j["sign_y_by_k"] = rep.sign_y_by_k;
  j["notes"] = rep.notes;
  return j;
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

inline void save_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << j.dump(2) << '\n';
}

inline OcpSpec load_problem(const std::string& path) {
  return ocp_from_json(load_json_file(path));
}

}  // namespace ratepmp
