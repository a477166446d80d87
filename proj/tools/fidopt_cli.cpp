// Command-line workbench around the library: the pipeline stages as
// subcommands (sample, assign, optimize) plus batch drivers (bench,
// profile). Run options live on the top-level app and fall through to
// every subcommand, so a flat key=value config file can seed any of them;
// explicit flags always win over the file.

#include <atomic>
#include <cctype>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "fidopt/fidopt.hpp"

namespace fs = std::filesystem;
using fidopt::Json;

namespace {

struct SharedOptions {
  fidopt::RunConfig cfg;

  // Staging for values that only land in the config when explicitly given.
  std::string mode = "inter_pb";
  std::string barrier = "pb";
  std::vector<double> ladder;
  double rho = 0.25;
  std::uint64_t sample_seed = 0;
  std::vector<double> x0;
  bool force_top = false;
  bool no_problem_x0 = false;

  // External blackbox description; meaningful only with --exec.
  std::string exec_command;
  std::size_t dimension = 0;
  std::vector<double> lower;
  std::vector<double> upper;
  std::size_t constraints = 0;
  std::vector<std::size_t> apriori;
  bool objective_varies = false;

  CLI::Option* ladder_opt = nullptr;
  CLI::Option* rho_opt = nullptr;
  CLI::Option* sample_seed_opt = nullptr;
  CLI::Option* x0_opt = nullptr;
  CLI::Option* force_top_opt = nullptr;
  CLI::Option* epsilon_opt = nullptr;
};

void add_shared_options(CLI::App& app, SharedOptions& o) {
  app.add_option("--problem", o.cfg.problem, "Named synthetic problem")
      ->capture_default_str();
  app.add_option("--exec", o.exec_command,
                 "External blackbox command; the point file path and the "
                 "fidelity are appended as arguments");
  app.add_option("--dimension", o.dimension, "Input dimension of --exec");
  app.add_option("--lower", o.lower,
                 "Lower bounds for --exec, comma separated; a single value "
                 "repeats across all coordinates")
      ->delimiter(',');
  app.add_option("--upper", o.upper, "Upper bounds for --exec, same rules")
      ->delimiter(',');
  app.add_option("--constraints", o.constraints,
                 "Number of constraint outputs of --exec");
  app.add_option("--apriori", o.apriori,
                 "Indices of constraints decidable without running the "
                 "simulation, comma separated")
      ->delimiter(',');
  app.add_flag("--objective_varies", o.objective_varies,
               "The --exec objective depends on the fidelity");

  o.ladder_opt =
      app.add_option("--ladder", o.ladder,
                     "Fidelity ladder override, ascending, ending at 1")
          ->delimiter(',');
  o.epsilon_opt =
      app.add_option("--epsilon", o.cfg.epsilon,
                     "Representativity threshold for the assignment step")
          ->capture_default_str();
  o.rho_opt = app.add_option(
      "--rho", o.rho, "Sampling window size as a fraction of the box, [0,1]");
  app.add_option("--n_h", o.cfg.n_h, "Design sample size")->capture_default_str();
  app.add_option("--workers", o.cfg.workers,
                 "Parallel evaluators assumed when charging the sample cost")
      ->capture_default_str();
  app.add_option("--seed", o.cfg.seed, "Run seed")->capture_default_str();
  o.sample_seed_opt =
      app.add_option("--sample_seed", o.sample_seed,
                     "Pin the design-sample seed independently of --seed");
  app.add_option("--mode", o.mode, "inter_pb | inter_eb | base")
      ->capture_default_str()
      ->check(CLI::IsMember({"inter_pb", "inter_eb", "base"}));
  o.x0_opt = app.add_option("--x0", o.x0, "Start point, comma separated")
                 ->delimiter(',');
  app.add_flag("--no_problem_x0", o.no_problem_x0,
               "Ignore the problem's suggested start point");
  o.force_top_opt =
      app.add_flag("--force_top,!--no_force_top", o.force_top,
                   "Always finish uninterrupted walks at full fidelity");

  app.add_option("--budget", o.cfg.solver.budget_seconds,
                 "Virtual-seconds budget, sampling cost included")
      ->capture_default_str();
  app.add_option("--max_evals", o.cfg.solver.max_evaluations,
                 "Evaluation cap, 0 = unlimited")
      ->capture_default_str();
  app.add_option("--initial_mesh", o.cfg.solver.initial_mesh_fraction,
                 "Initial poll step as a fraction of the box")
      ->capture_default_str();
  app.add_option("--mesh_expand", o.cfg.solver.mesh_expand,
                 "Step growth factor after a successful poll")
      ->capture_default_str();
  app.add_option("--mesh_shrink", o.cfg.solver.mesh_shrink,
                 "Step shrink factor after a failed poll")
      ->capture_default_str();
  app.add_option("--min_mesh", o.cfg.solver.min_mesh_fraction,
                 "Stop once every axis step falls below this fraction")
      ->capture_default_str();
  app.add_option("--barrier", o.barrier,
                 "Constraint handling for base mode: pb | eb (the inter "
                 "modes pick theirs from --mode)")
      ->capture_default_str()
      ->check(CLI::IsMember({"pb", "eb", "progressive", "extreme"}));
}

fidopt::BoxBounds make_exec_bounds(const std::vector<double>& lower,
                                   const std::vector<double>& upper,
                                   std::size_t dimension) {
  const auto expand = [dimension](const std::vector<double>& v,
                                  const char* which) {
    if (v.size() == dimension) return v;
    if (v.size() == 1) return std::vector<double>(dimension, v[0]);
    throw std::invalid_argument(std::string("--") + which +
                                " needs 1 or --dimension values");
  };
  return fidopt::BoxBounds{expand(lower, "lower"), expand(upper, "upper")};
}

fidopt::RunConfig build_config(const SharedOptions& o) {
  fidopt::RunConfig cfg = o.cfg;
  cfg.mode = fidopt::run_mode_from_name(o.mode);
  cfg.solver.barrier = (o.barrier == "eb" || o.barrier == "extreme")
                           ? fidopt::BarrierMode::extreme
                           : fidopt::BarrierMode::progressive;
  if (o.ladder_opt->count()) cfg.ladder = o.ladder;
  if (o.rho_opt->count()) cfg.rho = o.rho;
  if (o.sample_seed_opt->count()) cfg.sample_seed = o.sample_seed;
  if (o.x0_opt->count()) cfg.x0 = o.x0;
  if (o.force_top_opt->count()) cfg.force_top = o.force_top;
  cfg.use_problem_x0 = !o.no_problem_x0;
  if (!o.exec_command.empty()) {
    cfg.exec_command = o.exec_command;
    fidopt::BlackboxDescriptor desc;
    desc.dimension = o.dimension;
    desc.bounds = make_exec_bounds(o.lower, o.upper, o.dimension);
    desc.constraints.count = o.constraints;
    desc.constraints.a_priori = o.apriori;
    desc.objective_varies_with_fidelity = o.objective_varies;
    cfg.exec_descriptor = std::move(desc);
  }
  return cfg;
}

void emit_json(const Json& j, const std::string& path) {
  const std::string body = j.dump(2) + "\n";
  if (path == "-") {
    std::fputs(body.c_str(), stdout);
    return;
  }
  fidopt::write_text_file(path, body);
  std::printf("wrote %s\n", path.c_str());
}

int do_sample(const fidopt::RunConfig& cfg, const std::string& out_path) {
  fidopt::detail::ResolvedSetup rs = fidopt::detail::resolve_setup(cfg);
  const fidopt::BlackboxDescriptor& desc = rs.bb->descriptor();
  const fidopt::BoxBounds region =
      rs.x0 ? fidopt::centered_bounds(*rs.x0, desc.bounds, rs.rho) : desc.bounds;
  const std::vector<fidopt::TrialPoint> pts = fidopt::latin_hypercube(
      region, cfg.n_h, fidopt::detail::sample_seed_of(cfg));
  const fidopt::SampleSet samples =
      fidopt::evaluate_sample(*rs.bb, rs.ladder, pts, region);
  const fidopt::FeasibilityStats stats =
      fidopt::estimate_stats(samples, desc.constraints);

  Json j;
  j["problem"] = rs.label;
  j["ladder"] = rs.ladder.values();
  j["region"] = Json{{"lower", region.lower}, {"upper", region.upper}};
  j["a_priori"] = desc.constraints.a_priori;
  j["epsilon"] = cfg.epsilon;
  j["force_top"] = rs.force_top;
  j["offset"] = fidopt::lh_time_offset(samples, cfg.workers);
  j["total_sample_time"] = samples.total_time();
  j["stats"] = fidopt::stats_json(stats);
  emit_json(j, out_path);
  return 0;
}

int do_assign(const SharedOptions& o, const std::string& stats_path,
              const std::string& out_path) {
  const Json in = Json::parse(fidopt::read_text_file(stats_path));
  const fidopt::FeasibilityStats stats = fidopt::stats_from_json(in.at("stats"));
  fidopt::ConstraintMeta meta;
  meta.count = stats.constraints;
  meta.a_priori = in.at("a_priori").get<std::vector<std::size_t>>();
  const double epsilon = o.epsilon_opt->count() ? o.cfg.epsilon
                                                : in.at("epsilon").get<double>();
  const bool force_top = o.force_top_opt->count()
                             ? o.force_top
                             : in.at("force_top").get<bool>();
  const std::vector<double> ladder =
      in.at("ladder").get<std::vector<double>>();

  const fidopt::AssignmentInstance inst =
      fidopt::make_instance(stats, meta, epsilon, force_top);
  const fidopt::AssignmentSolution sol = fidopt::solve_assignment(inst);

  // Per-rung view of the expected walk: the chance of reaching the rung
  // uninterrupted times its mean cost, summing to the expected time.
  Json rows = Json::array();
  double reach = 1.0;
  for (std::size_t i : sol.matrix.active_rows()) {
    Json assigned = Json::array();
    for (std::size_t col = 0; col < sol.matrix.columns(); ++col)
      if (sol.matrix.b(i, col)) assigned.push_back(col);
    rows.push_back(Json{{"level", i},
                        {"fidelity", ladder.at(i)},
                        {"assigned", assigned},
                        {"mean_time", inst.t[i]},
                        {"reach_probability", reach},
                        {"expected_contribution", reach * inst.t[i]}});
    reach *= fidopt::no_interrupt_prob(sol.matrix, inst.p, i);
  }

  Json j;
  j["epsilon"] = epsilon;
  j["force_top"] = force_top;
  j["matrix"] = fidopt::matrix_json(sol.matrix);
  j["expected_time"] = sol.expected_time;
  j["candidates_inspected"] = sol.candidates;
  j["rows"] = rows;
  emit_json(j, out_path);
  return 0;
}

std::string sanitize_label(const std::string& label) {
  std::string out = label;
  for (char& ch : out)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '.' &&
        ch != '-' && ch != '_')
      ch = '_';
  return out;
}

std::string record_basename(const fidopt::RunRecord& rec) {
  return sanitize_label(rec.problem_label) + "_" +
         fidopt::run_mode_name(rec.mode) + "_seed" +
         std::to_string(rec.config.seed);
}

void write_record_files(const fidopt::RunRecord& rec, const fs::path& dir) {
  const std::string base = (dir / record_basename(rec)).string();
  fidopt::write_text_file(base + ".json",
                          fidopt::run_record_json(rec).dump(2) + "\n");
  fidopt::write_text_file(base + "_evals.csv", fidopt::eval_log_csv(rec.solve));
  fidopt::write_text_file(base + "_iterations.csv",
                          fidopt::iteration_log_csv(rec.solve));
  fidopt::write_text_file(base + "_incumbents.csv",
                          fidopt::incumbent_csv(rec.solve));
}

void print_record_summary(const fidopt::RunRecord& rec) {
  std::printf("%-32s best_f=%-22s time=%-12s evals=%-5zu %s\n",
              record_basename(rec).c_str(),
              fidopt::csv_ext(rec.best_f).c_str(),
              fidopt::csv_double(rec.total_time).c_str(),
              rec.solve.eval_count, rec.status.c_str());
}

int do_optimize(const fidopt::RunConfig& cfg, const std::string& out_dir) {
  const fidopt::RunRecord rec = fidopt::run(cfg);
  fs::create_directories(out_dir);
  write_record_files(rec, out_dir);
  print_record_summary(rec);
  return 0;
}

int do_bench(const fidopt::RunConfig& base_cfg,
             const std::vector<std::string>& problems,
             const std::vector<std::string>& mode_names, std::size_t seeds,
             std::size_t jobs, const std::string& out_dir) {
  if (seeds == 0) throw std::invalid_argument("--seeds must be positive");
  std::vector<fidopt::RunMode> modes;
  for (const std::string& name : mode_names)
    modes.push_back(fidopt::run_mode_from_name(name));

  // Same nesting as the library batch driver, so record order and seeds
  // match a sequential run regardless of --jobs.
  std::vector<fidopt::RunConfig> cfgs;
  for (const std::string& prob : problems)
    for (std::uint64_t seed = 1; seed <= seeds; ++seed)
      for (fidopt::RunMode mode : modes) {
        fidopt::RunConfig cfg = base_cfg;
        cfg.problem = prob;
        cfg.mode = mode;
        cfg.seed = seed;
        cfgs.push_back(std::move(cfg));
      }

  std::vector<fidopt::RunRecord> records(cfgs.size());
  std::vector<std::exception_ptr> errors(cfgs.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, cfgs.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < cfgs.size(); ++i) records[i] = fidopt::run(cfgs[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < cfgs.size(); i = next++) {
          try {
            records[i] = fidopt::run(cfgs[i]);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors)
      if (e) std::rethrow_exception(e);
  }

  fs::create_directories(out_dir);
  Json all = Json::array();
  for (const fidopt::RunRecord& rec : records) {
    write_record_files(rec, out_dir);
    all.push_back(fidopt::run_record_json(rec));
    print_record_summary(rec);
  }
  fidopt::write_text_file((fs::path(out_dir) / "records.json").string(),
                          all.dump(2) + "\n");
  std::printf("%zu records in %s\n", records.size(), out_dir.c_str());
  return 0;
}

int do_profile(const std::vector<std::string>& record_paths, double tau,
               const std::vector<std::string>& best_overrides,
               const std::string& out_path) {
  std::vector<fidopt::RunRecord> records;
  for (const std::string& path : record_paths) {
    const Json j = Json::parse(fidopt::read_text_file(path));
    if (j.is_array())
      for (const Json& el : j) records.push_back(fidopt::run_record_from_json(el));
    else
      records.push_back(fidopt::run_record_from_json(j));
  }

  std::map<std::string, double> best;
  for (const std::string& entry : best_overrides) {
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::invalid_argument("--best expects problem=value, got \"" +
                                  entry + "\"");
    best[entry.substr(0, eq)] = std::stod(entry.substr(eq + 1));
  }

  const fidopt::ProfileResult result =
      fidopt::data_profile(records, tau, best.empty() ? nullptr : &best);
  for (const std::string& prob : result.excluded_problems)
    std::fprintf(stderr, "warning: no feasible result on %s; excluded\n",
                 prob.c_str());

  const std::string body = fidopt::profile_csv(result);
  if (out_path == "-") {
    std::fputs(body.c_str(), stdout);
  } else {
    fidopt::write_text_file(out_path, body);
    std::printf("wrote %s (%zu records, %zu curves)\n", out_path.c_str(),
                records.size(), result.curves.size());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-fidelity constrained blackbox optimization workbench"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "key=value file seeding the shared options; flags override");
  app.allow_config_extras(false);

  SharedOptions shared;
  add_shared_options(app, shared);

  CLI::App* sample_cmd = app.add_subcommand(
      "sample", "Draw and evaluate the design sample, write estimator tables");
  sample_cmd->fallthrough();
  std::string sample_out = "stats.json";
  sample_cmd->add_option("--out", sample_out, "Output JSON, - for stdout")
      ->capture_default_str();

  CLI::App* assign_cmd = app.add_subcommand(
      "assign", "Compute the fidelity assignment from estimator tables");
  assign_cmd->fallthrough();
  std::string assign_stats;
  std::string assign_out = "assignment.json";
  assign_cmd->add_option("--stats", assign_stats, "JSON produced by sample")
      ->required();
  assign_cmd->add_option("--out", assign_out, "Output JSON, - for stdout")
      ->capture_default_str();

  CLI::App* optimize_cmd =
      app.add_subcommand("optimize", "One full run, record JSON plus CSV logs");
  optimize_cmd->fallthrough();
  std::string optimize_out = "runs";
  optimize_cmd->add_option("--out", optimize_out, "Output directory")
      ->capture_default_str();

  CLI::App* bench_cmd =
      app.add_subcommand("bench", "Batch of runs over problems, modes, seeds");
  bench_cmd->fallthrough();
  std::vector<std::string> bench_problems = fidopt::problem_names();
  std::vector<std::string> bench_modes = {"inter_pb", "inter_eb", "base"};
  std::size_t bench_seeds = 20;
  std::size_t bench_jobs = 1;
  std::string bench_out = "bench_out";
  bench_cmd->add_option("--problems", bench_problems, "Problems to include")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--modes", bench_modes, "Modes to include")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--seeds", bench_seeds, "Run seeds 1..N per pair")
      ->capture_default_str();
  bench_cmd->add_option("--jobs", bench_jobs, "Concurrent runs")
      ->capture_default_str();
  bench_cmd->add_option("--out", bench_out, "Output directory")
      ->capture_default_str();

  CLI::App* profile_cmd = app.add_subcommand(
      "profile", "Fold run records into data-profile curves per mode");
  std::vector<std::string> profile_records;
  double profile_tau = 0.05;
  std::vector<std::string> profile_best;
  std::string profile_out = "profile.csv";
  profile_cmd
      ->add_option("records", profile_records,
                   "Record JSON files or records.json arrays")
      ->required();
  profile_cmd->add_option("--tau", profile_tau, "Solved-threshold fraction")
      ->capture_default_str();
  profile_cmd->add_option("--best", profile_best,
                          "problem=value reference override, repeatable");
  profile_cmd->add_option("--out", profile_out, "Output CSV, - for stdout")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (profile_cmd->parsed())
      return do_profile(profile_records, profile_tau, profile_best, profile_out);

    const fidopt::RunConfig cfg = build_config(shared);
    if (sample_cmd->parsed()) return do_sample(cfg, sample_out);
    if (assign_cmd->parsed()) return do_assign(shared, assign_stats, assign_out);
    if (optimize_cmd->parsed()) return do_optimize(cfg, optimize_out);
    if (bench_cmd->parsed())
      return do_bench(cfg, bench_problems, bench_modes, bench_seeds, bench_jobs,
                      bench_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
