#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fidopt/assignment.hpp"
#include "fidopt/core.hpp"
#include "fidopt/harness.hpp"
#include "fidopt/sampling.hpp"
#include "fidopt/solver.hpp"

namespace fidopt {

using Json = nlohmann::json;  // keys serialize sorted, so dumps are stable

// Extended reals map to a number, "inf"/"-inf", or "unknown".
inline Json ext_json(ExtReal v) {
  if (!v.computed()) return "unknown";
  if (!v.finite()) return v.value() > 0 ? "inf" : "-inf";
  return v.value();
}

inline ExtReal ext_from_json(const Json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return ExtReal::infinity();
    if (s == "-inf") return ExtReal(-std::numeric_limits<double>::infinity());
    if (s == "unknown") return ExtReal::not_computed();
    throw std::invalid_argument("ext_from_json: bad token \"" + s + "\"");
  }
  return ExtReal(j.get<double>());
}

inline Json ext_vector_json(const std::vector<ExtReal>& v) {
  Json arr = Json::array();
  for (ExtReal e : v) arr.push_back(ext_json(e));
  return arr;
}

inline std::vector<ExtReal> ext_vector_from_json(const Json& j) {
  std::vector<ExtReal> v;
  for (const Json& e : j) v.push_back(ext_from_json(e));
  return v;
}

inline Json descriptor_json(const BlackboxDescriptor& d) {
  return Json{{"dimension", d.dimension},
              {"lower", d.bounds.lower},
              {"upper", d.bounds.upper},
              {"constraints", d.constraints.count},
              {"a_priori", d.constraints.a_priori},
              {"objective_varies_with_fidelity", d.objective_varies_with_fidelity}};
}

inline BlackboxDescriptor descriptor_from_json(const Json& j) {
  BlackboxDescriptor d;
  d.dimension = j.at("dimension").get<std::size_t>();
  d.bounds.lower = j.at("lower").get<std::vector<double>>();
  d.bounds.upper = j.at("upper").get<std::vector<double>>();
  d.constraints.count = j.at("constraints").get<std::size_t>();
  d.constraints.a_priori = j.at("a_priori").get<std::vector<std::size_t>>();
  d.objective_varies_with_fidelity =
      j.at("objective_varies_with_fidelity").get<bool>();
  return d;
}

inline Json stats_json(const FeasibilityStats& s) {
  return Json{{"levels", s.levels},
              {"constraints", s.constraints},
              {"r", s.r},
              {"p", s.p},
              {"t", s.t},
              {"sample_count", s.sample_count},
              {"apriori_pass_count", s.apriori_pass_count}};
}

inline FeasibilityStats stats_from_json(const Json& j) {
  FeasibilityStats s;
  s.levels = j.at("levels").get<std::size_t>();
  s.constraints = j.at("constraints").get<std::size_t>();
  s.r = j.at("r").get<std::vector<std::vector<double>>>();
  s.p = j.at("p").get<std::vector<std::vector<double>>>();
  s.t = j.at("t").get<std::vector<double>>();
  s.sample_count = j.at("sample_count").get<std::size_t>();
  s.apriori_pass_count = j.at("apriori_pass_count").get<std::size_t>();
  return s;
}

inline Json matrix_json(const AssignmentMatrix& b) {
  Json rows = Json::array();
  for (std::size_t j = 0; j < b.columns(); ++j) {
    const std::ptrdiff_t row = b.assigned_row(j);
    rows.push_back(static_cast<long long>(row));
  }
  return Json{{"levels", b.levels()},
              {"columns", b.columns()},
              {"force_top", b.force_top()},
              {"assigned_row", rows}};
}

inline AssignmentMatrix matrix_from_json(const Json& j) {
  AssignmentMatrix b(j.at("levels").get<std::size_t>(),
                     j.at("columns").get<std::size_t>(),
                     j.at("force_top").get<bool>());
  const Json& rows = j.at("assigned_row");
  for (std::size_t col = 0; col < rows.size(); ++col) {
    const long long row = rows[col].get<long long>();
    if (row >= 0) b.assign(col, static_cast<std::size_t>(row));
  }
  return b;
}

inline Json solver_config_json(const SolverConfig& c) {
  return Json{{"barrier", c.barrier == BarrierMode::progressive ? "pb" : "eb"},
              {"budget_seconds", c.budget_seconds},
              {"max_evaluations", c.max_evaluations},
              {"initial_mesh_fraction", c.initial_mesh_fraction},
              {"mesh_expand", c.mesh_expand},
              {"mesh_shrink", c.mesh_shrink},
              {"min_mesh_fraction", c.min_mesh_fraction},
              {"seed", c.seed}};
}

inline SolverConfig solver_config_from_json(const Json& j) {
  SolverConfig c;
  c.barrier = j.at("barrier").get<std::string>() == "pb"
                  ? BarrierMode::progressive
                  : BarrierMode::extreme;
  c.budget_seconds = j.at("budget_seconds").get<double>();
  c.max_evaluations = j.at("max_evaluations").get<std::size_t>();
  c.initial_mesh_fraction = j.at("initial_mesh_fraction").get<double>();
  c.mesh_expand = j.at("mesh_expand").get<double>();
  c.mesh_shrink = j.at("mesh_shrink").get<double>();
  c.min_mesh_fraction = j.at("min_mesh_fraction").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

inline Json run_config_json(const RunConfig& c) {
  Json j{{"problem", c.problem},
         {"exec_command", c.exec_command},
         {"epsilon", c.epsilon},
         {"n_h", c.n_h},
         {"workers", c.workers},
         {"seed", c.seed},
         {"solver", solver_config_json(c.solver)},
         {"mode", run_mode_name(c.mode)},
         {"use_problem_x0", c.use_problem_x0}};
  j["exec_descriptor"] =
      c.exec_descriptor ? descriptor_json(*c.exec_descriptor) : Json(nullptr);
  j["ladder"] = c.ladder ? Json(*c.ladder) : Json(nullptr);
  j["rho"] = c.rho ? Json(*c.rho) : Json(nullptr);
  j["sample_seed"] = c.sample_seed ? Json(*c.sample_seed) : Json(nullptr);
  j["x0"] = c.x0 ? Json(*c.x0) : Json(nullptr);
  j["force_top"] = c.force_top ? Json(*c.force_top) : Json(nullptr);
  return j;
}

inline RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  c.problem = j.at("problem").get<std::string>();
  c.exec_command = j.at("exec_command").get<std::string>();
  if (!j.at("exec_descriptor").is_null())
    c.exec_descriptor = descriptor_from_json(j.at("exec_descriptor"));
  if (!j.at("ladder").is_null())
    c.ladder = j.at("ladder").get<std::vector<double>>();
  c.epsilon = j.at("epsilon").get<double>();
  if (!j.at("rho").is_null()) c.rho = j.at("rho").get<double>();
  c.n_h = j.at("n_h").get<std::size_t>();
  c.workers = j.at("workers").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("sample_seed").is_null())
    c.sample_seed = j.at("sample_seed").get<std::uint64_t>();
  c.solver = solver_config_from_json(j.at("solver"));
  c.mode = run_mode_from_name(j.at("mode").get<std::string>());
  if (!j.at("x0").is_null()) c.x0 = j.at("x0").get<TrialPoint>();
  c.use_problem_x0 = j.at("use_problem_x0").get<bool>();
  if (!j.at("force_top").is_null()) c.force_top = j.at("force_top").get<bool>();
  return c;
}

inline Json eval_entry_json(const EvalLogEntry& e) {
  return Json{{"x", e.x},
              {"fidelities", e.fidelities},
              {"time", e.time},
              {"clock_after", e.clock_after},
              {"f", ext_json(e.f)},
              {"h", ext_json(e.h)},
              {"feasible", e.feasible},
              {"full_fidelity", e.full_fidelity},
              {"interrupted", e.interrupted},
              {"interrupt_constraint",
               e.interrupted && e.interrupt_constraint != static_cast<std::size_t>(-1)
                   ? Json(e.interrupt_constraint)
                   : Json(nullptr)},
              {"safeguard_ran", e.safeguard_ran}};
}

inline EvalLogEntry eval_entry_from_json(const Json& j) {
  EvalLogEntry e;
  e.x = j.at("x").get<TrialPoint>();
  e.fidelities = j.at("fidelities").get<std::vector<double>>();
  e.time = j.at("time").get<double>();
  e.clock_after = j.at("clock_after").get<double>();
  e.f = ext_from_json(j.at("f"));
  e.h = ext_from_json(j.at("h"));
  e.feasible = j.at("feasible").get<bool>();
  e.full_fidelity = j.at("full_fidelity").get<bool>();
  e.interrupted = j.at("interrupted").get<bool>();
  if (!j.at("interrupt_constraint").is_null())
    e.interrupt_constraint = j.at("interrupt_constraint").get<std::size_t>();
  e.safeguard_ran = j.at("safeguard_ran").get<bool>();
  return e;
}

inline Json solve_record_json(const SolveRecord& r) {
  Json evals = Json::array();
  for (const EvalLogEntry& e : r.evals) evals.push_back(eval_entry_json(e));
  Json incumbents = Json::array();
  for (const IncumbentStep& s : r.incumbents)
    incumbents.push_back(Json{{"clock", s.clock}, {"f", s.f}, {"x", s.x}});
  Json iterations = Json::array();
  for (const IterationLogEntry& it : r.iterations)
    iterations.push_back(Json{{"iteration", it.iteration},
                              {"mesh_fraction", it.mesh_fraction},
                              {"f_incumbent", ext_json(it.f_incumbent)},
                              {"h_incumbent", ext_json(it.h_incumbent)},
                              {"h_max", ext_json(it.h_max)},
                              {"clock", it.clock}});
  Json j{{"best_f", ext_json(r.best_f)},
         {"evals", std::move(evals)},
         {"incumbents", std::move(incumbents)},
         {"iterations", std::move(iterations)},
         {"consumed", r.consumed},
         {"eval_count", r.eval_count},
         {"cache_hits", r.cache_hits},
         {"stop_reason", r.stop_reason},
         {"status", r.status}};
  j["best_point"] = r.best_point ? Json(*r.best_point) : Json(nullptr);
  return j;
}

inline SolveRecord solve_record_from_json(const Json& j) {
  SolveRecord r;
  if (!j.at("best_point").is_null())
    r.best_point = j.at("best_point").get<TrialPoint>();
  r.best_f = ext_from_json(j.at("best_f"));
  for (const Json& e : j.at("evals")) r.evals.push_back(eval_entry_from_json(e));
  for (const Json& s : j.at("incumbents"))
    r.incumbents.push_back({s.at("clock").get<double>(), s.at("f").get<double>(),
                            s.at("x").get<TrialPoint>()});
  for (const Json& it : j.at("iterations")) {
    IterationLogEntry e;
    e.iteration = it.at("iteration").get<std::size_t>();
    e.mesh_fraction = it.at("mesh_fraction").get<double>();
    e.f_incumbent = ext_from_json(it.at("f_incumbent"));
    e.h_incumbent = ext_from_json(it.at("h_incumbent"));
    e.h_max = ext_from_json(it.at("h_max"));
    e.clock = it.at("clock").get<double>();
    r.iterations.push_back(e);
  }
  r.consumed = j.at("consumed").get<double>();
  r.eval_count = j.at("eval_count").get<std::size_t>();
  r.cache_hits = j.at("cache_hits").get<std::size_t>();
  r.stop_reason = j.at("stop_reason").get<std::string>();
  r.status = j.at("status").get<std::string>();
  return r;
}

inline Json run_record_json(const RunRecord& r) {
  Json j{{"config", run_config_json(r.config)},
         {"problem", r.problem_label},
         {"mode", run_mode_name(r.mode)},
         {"offset", r.offset},
         {"f_start", ext_json(r.f_start)},
         {"solve", solve_record_json(r.solve)},
         {"best_f", ext_json(r.best_f)},
         {"total_time", r.total_time},
         {"status", r.status}};
  j["x0"] = r.x0_used ? Json(*r.x0_used) : Json(nullptr);
  j["stats"] = r.stats ? stats_json(*r.stats) : Json(nullptr);
  j["assignment"] = r.matrix ? matrix_json(*r.matrix) : Json(nullptr);
  j["assignment_expected_time"] =
      r.assignment_expected_time ? Json(*r.assignment_expected_time) : Json(nullptr);
  j["best_point"] = r.best_point ? Json(*r.best_point) : Json(nullptr);
  return j;
}

inline RunRecord run_record_from_json(const Json& j) {
  RunRecord r;
  r.config = run_config_from_json(j.at("config"));
  r.problem_label = j.at("problem").get<std::string>();
  r.mode = run_mode_from_name(j.at("mode").get<std::string>());
  r.offset = j.at("offset").get<double>();
  if (!j.at("x0").is_null()) r.x0_used = j.at("x0").get<TrialPoint>();
  r.f_start = ext_from_json(j.at("f_start"));
  if (!j.at("stats").is_null()) r.stats = stats_from_json(j.at("stats"));
  if (!j.at("assignment").is_null())
    r.matrix = matrix_from_json(j.at("assignment"));
  if (!j.at("assignment_expected_time").is_null())
    r.assignment_expected_time = j.at("assignment_expected_time").get<double>();
  r.solve = solve_record_from_json(j.at("solve"));
  if (!j.at("best_point").is_null())
    r.best_point = j.at("best_point").get<TrialPoint>();
  r.best_f = ext_from_json(j.at("best_f"));
  r.total_time = j.at("total_time").get<double>();
  r.status = j.at("status").get<std::string>();
  return r;
}

// CSV emitters. Doubles print as %.17g so files are reproducible and
// round-trip exactly.
inline std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string csv_ext(ExtReal v) {
  if (!v.computed()) return "unknown";
  if (v.infinite()) return v.value() > 0 ? "inf" : "-inf";
  return csv_double(v.value());
}

inline std::string join_doubles(const std::vector<double>& v, char sep = ';') {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(sep);
    out += csv_double(v[i]);
  }
  return out;
}

inline std::string eval_log_csv(const SolveRecord& r) {
  std::string out =
      "index,time,clock_after,f,h,feasible,full_fidelity,interrupted,"
      "interrupt_constraint,safeguard_ran,fidelities,x\n";
  for (std::size_t i = 0; i < r.evals.size(); ++i) {
    const EvalLogEntry& e = r.evals[i];
    out += std::to_string(i);
    out += ',' + csv_double(e.time) + ',' + csv_double(e.clock_after);
    out += ',' + csv_ext(e.f) + ',' + csv_ext(e.h);
    out += e.feasible ? ",1" : ",0";
    out += e.full_fidelity ? ",1" : ",0";
    out += e.interrupted ? ",1" : ",0";
    out += ',';
    if (e.interrupted && e.interrupt_constraint != static_cast<std::size_t>(-1))
      out += std::to_string(e.interrupt_constraint);
    out += e.safeguard_ran ? ",1" : ",0";
    out += ',' + join_doubles(e.fidelities) + ',' + join_doubles(e.x) + '\n';
  }
  return out;
}

inline std::string iteration_log_csv(const SolveRecord& r) {
  std::string out = "iteration,mesh_fraction,f_incumbent,h_incumbent,h_max,clock\n";
  for (const IterationLogEntry& it : r.iterations) {
    out += std::to_string(it.iteration);
    out += ',' + csv_double(it.mesh_fraction);
    out += ',' + csv_ext(it.f_incumbent) + ',' + csv_ext(it.h_incumbent);
    out += ',' + csv_ext(it.h_max) + ',' + csv_double(it.clock) + '\n';
  }
  return out;
}

inline std::string incumbent_csv(const SolveRecord& r) {
  std::string out = "time_seconds,f\n";
  for (const IncumbentStep& s : r.incumbents)
    out += csv_double(s.clock) + ',' + csv_double(s.f) + '\n';
  return out;
}

inline std::string profile_csv(const ProfileResult& p) {
  std::string out = "time_seconds,fraction_solved,mode\n";
  for (const ProfileCurve& curve : p.curves)
    for (const ProfilePoint& pt : curve.points)
      out += csv_double(pt.time) + ',' + csv_double(pt.fraction) + ',' +
             curve.mode + '\n';
  return out;
}

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << body;
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace fidopt
