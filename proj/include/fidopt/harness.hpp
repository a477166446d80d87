#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fidopt/assignment.hpp"
#include "fidopt/blackbox.hpp"
#include "fidopt/controller.hpp"
#include "fidopt/core.hpp"
#include "fidopt/problems.hpp"
#include "fidopt/sampling.hpp"
#include "fidopt/solver.hpp"
#include "fidopt/subprocess.hpp"
#include "fidopt/synthetic.hpp"

namespace fidopt {

enum class RunMode { inter_pb, inter_eb, base };

inline const char* run_mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::inter_pb: return "inter_pb";
    case RunMode::inter_eb: return "inter_eb";
    case RunMode::base: return "base";
  }
  return "?";
}

inline RunMode run_mode_from_name(const std::string& name) {
  if (name == "inter_pb") return RunMode::inter_pb;
  if (name == "inter_eb") return RunMode::inter_eb;
  if (name == "base") return RunMode::base;
  throw std::invalid_argument("unknown run mode \"" + name + "\"");
}

// Everything one run needs. `seed` drives both the sample and the solver
// unless `sample_seed` pins the former, which keeps the sample fixed while
// the solver seed varies across repetitions.
struct RunConfig {
  std::string problem = "checker";
  std::string exec_command;  // external blackbox; overrides `problem` when set
  std::optional<BlackboxDescriptor> exec_descriptor;

  std::optional<std::vector<double>> ladder;  // default: problem's ladder
  double epsilon = 0.05;
  std::optional<double> rho;  // default: problem's sampling radius
  std::size_t n_h = 10000;
  std::size_t workers = 1;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> sample_seed;
  SolverConfig solver;
  RunMode mode = RunMode::inter_pb;
  std::optional<TrialPoint> x0;  // default: problem's suggested start
  bool use_problem_x0 = true;
  std::optional<bool> force_top;

  void validate() const {
    solver.validate();
    if (!(epsilon >= 0.0) || epsilon > 1.0)
      throw std::invalid_argument("RunConfig: epsilon outside [0,1]");
    if (n_h == 0) throw std::invalid_argument("RunConfig: n_h must be positive");
    if (workers == 0)
      throw std::invalid_argument("RunConfig: workers must be positive");
    if (rho && (!(*rho >= 0.0) || *rho > 1.0))
      throw std::invalid_argument("RunConfig: rho outside [0,1]");
    if (!exec_command.empty() && !exec_descriptor)
      throw std::invalid_argument(
          "RunConfig: an external command needs a problem descriptor");
  }
};

struct RunRecord {
  RunConfig config;
  std::string problem_label;
  RunMode mode = RunMode::base;
  double offset = 0.0;  // sampling cost divided over the workers
  std::optional<TrialPoint> x0_used;
  ExtReal f_start = ExtReal::not_computed();  // objective at x0, fidelity 1
  std::optional<FeasibilityStats> stats;
  std::optional<AssignmentMatrix> matrix;
  std::optional<double> assignment_expected_time;
  SolveRecord solve;
  std::optional<TrialPoint> best_point;
  ExtReal best_f = ExtReal::infinity();
  double total_time = 0.0;
  std::string status;
};

namespace detail {

struct ResolvedSetup {
  std::shared_ptr<MultiFidelityBlackbox> bb;
  FidelityLadder ladder{{1.0}};
  double rho = 0.25;
  bool force_top = false;
  std::optional<TrialPoint> x0;
  std::string label;
};

inline ResolvedSetup resolve_setup(const RunConfig& cfg) {
  cfg.validate();
  ResolvedSetup rs;
  if (!cfg.exec_command.empty()) {
    rs.bb = std::make_shared<ExecBlackbox>(cfg.exec_command, *cfg.exec_descriptor);
    rs.label = "exec:" + cfg.exec_command;
    rs.ladder = cfg.ladder ? FidelityLadder(*cfg.ladder) : bench_ladder();
    rs.rho = cfg.rho.value_or(0.25);
  } else {
    NamedProblem np = make_problem(cfg.problem);
    rs.bb = std::make_shared<SyntheticBlackbox>(std::move(np.spec));
    rs.label = np.name;
    rs.ladder = cfg.ladder ? FidelityLadder(*cfg.ladder) : np.ladder;
    rs.rho = cfg.rho.value_or(np.rho);
    if (cfg.use_problem_x0 && !cfg.x0) rs.x0 = np.x0;
    rs.force_top = np.force_top;
  }
  if (cfg.x0) rs.x0 = cfg.x0;
  const BlackboxDescriptor& d = rs.bb->descriptor();
  rs.force_top =
      cfg.force_top.value_or(rs.force_top || d.objective_varies_with_fidelity);
  if (rs.x0 && rs.x0->size() != d.dimension)
    throw std::invalid_argument("RunConfig: x0 dimension mismatch");
  return rs;
}

inline std::uint64_t sample_seed_of(const RunConfig& cfg) {
  return cfg.sample_seed.value_or(cfg.seed);
}

// Controller-backed evaluator for the interruption modes. Updates the
// shared best-confirmed value after every evaluation, which is what arms
// the safeguard for later points.
inline Evaluator make_controlled_evaluator(
    std::shared_ptr<MultiFidelityBlackbox> bb,
    std::shared_ptr<ControllerState> state) {
  return [bb = std::move(bb), state = std::move(state)](const TrialPoint& x) {
    ControlledEval ce = controlled_evaluate(x, *state, *bb);
    update_f_star(*state, ce);

    PointEval pe;
    pe.f = ce.f;
    pe.c = std::move(ce.c);
    const EvalOutput& last = ce.trace.outputs.back();
    pe.apriori_violated = last.apriori_violated;
    pe.full_fidelity = !last.apriori_violated && last.fidelity == 1.0;
    pe.time = ce.trace.total_time;
    for (std::size_t idx : ce.trace.visited)
      pe.fidelities.push_back(state->ladder[idx]);
    pe.interrupted = ce.trace.interrupted;
    pe.interrupt_constraint = ce.trace.interrupt_constraint;
    pe.safeguard_ran = ce.trace.safeguard_ran;
    return pe;
  };
}

// Diagnostic fidelity-1 probe of the starting point; not charged to the
// run clock, so it cannot perturb trajectories or budgets.
inline ExtReal probe_f_start(const MultiFidelityBlackbox& bb, const TrialPoint& x0) {
  const EvalOutput out = bb.evaluate(x0, 1.0);
  return out.f;
}

}  // namespace detail

// The full pipeline: sample (over centered bounds when a start is given,
// else the whole box), estimate, assign, then run the solver through the
// fidelity controller. The sampling cost, spread over the workers, is
// charged to the clock before the solve, so every later timestamp and the
// budget already account for it.
inline RunRecord run_fico(const RunConfig& cfg) {
  detail::ResolvedSetup rs = detail::resolve_setup(cfg);
  if (cfg.mode == RunMode::base)
    throw std::invalid_argument("run_fico: base mode belongs to run_base");

  const BlackboxDescriptor& desc = rs.bb->descriptor();
  RunRecord rec;
  rec.config = cfg;
  rec.problem_label = rs.label;
  rec.mode = cfg.mode;

  const BoxBounds region =
      rs.x0 ? centered_bounds(*rs.x0, desc.bounds, rs.rho) : desc.bounds;
  const std::vector<TrialPoint> pts =
      latin_hypercube(region, cfg.n_h, detail::sample_seed_of(cfg));
  const SampleSet samples = evaluate_sample(*rs.bb, rs.ladder, pts, region);
  rec.offset = lh_time_offset(samples, cfg.workers);
  rec.stats = estimate_stats(samples, desc.constraints);

  TrialPoint x0 = rs.x0 ? *rs.x0 : samples.points[best_sample_index(samples)];
  rec.x0_used = x0;
  rec.f_start = detail::probe_f_start(*rs.bb, x0);

  AssignmentInstance inst =
      make_instance(*rec.stats, desc.constraints, cfg.epsilon, rs.force_top);
  AssignmentSolution sol = solve_assignment(inst);
  rec.matrix = sol.matrix;
  rec.assignment_expected_time = sol.expected_time;

  auto clock = std::make_shared<VirtualClock>();
  clock->charge(rec.offset);
  SolverConfig scfg = cfg.solver;
  scfg.barrier = cfg.mode == RunMode::inter_pb ? BarrierMode::progressive
                                               : BarrierMode::extreme;
  scfg.seed = cfg.seed;
  scfg.budget_seconds = cfg.solver.budget_seconds - rec.offset;
  if (!(scfg.budget_seconds > 0.0)) {
    rec.status = "budget exhausted by sampling";
    rec.total_time = clock->elapsed();
    return rec;
  }

  auto state = std::make_shared<ControllerState>(
      ControllerState{sol.matrix, rs.ladder, ExtReal::infinity(), clock.get()});
  const Evaluator ev = detail::make_controlled_evaluator(rs.bb, state);
  rec.solve = minimize(ev, x0, desc.bounds, scfg, *clock);

  rec.best_point = rec.solve.best_point;
  rec.best_f = rec.solve.best_f;
  rec.total_time = clock->elapsed();
  rec.status = rec.solve.status;
  return rec;
}

// Fidelity fixed at 1 throughout. Without a start the same sample is drawn
// and evaluated at fidelity 1 only, both to pick x0 the same way and to pay
// the comparable sampling cost; with a start there is nothing to sample and
// the run begins at time zero.
inline RunRecord run_base(const RunConfig& cfg) {
  detail::ResolvedSetup rs = detail::resolve_setup(cfg);
  const BlackboxDescriptor& desc = rs.bb->descriptor();

  RunRecord rec;
  rec.config = cfg;
  rec.problem_label = rs.label;
  rec.mode = RunMode::base;

  auto clock = std::make_shared<VirtualClock>();
  TrialPoint x0;
  if (rs.x0) {
    x0 = *rs.x0;
    if (!desc.bounds.contains(x0))
      throw std::invalid_argument("run_base: x0 outside the box");
  } else {
    const std::vector<TrialPoint> pts =
        latin_hypercube(desc.bounds, cfg.n_h, detail::sample_seed_of(cfg));
    const FidelityLadder top_only({1.0});
    const SampleSet samples = evaluate_sample(*rs.bb, top_only, pts, desc.bounds);
    rec.offset = lh_time_offset(samples, cfg.workers);
    x0 = samples.points[best_sample_index(samples)];
    clock->charge(rec.offset);
  }
  rec.x0_used = x0;
  rec.f_start = detail::probe_f_start(*rs.bb, x0);

  SolverConfig scfg = cfg.solver;
  scfg.seed = cfg.seed;
  scfg.budget_seconds = cfg.solver.budget_seconds - rec.offset;
  if (!(scfg.budget_seconds > 0.0)) {
    rec.status = "budget exhausted by sampling";
    rec.total_time = clock->elapsed();
    return rec;
  }

  const Evaluator ev = make_direct_evaluator(*rs.bb, *clock);
  rec.solve = minimize(ev, x0, desc.bounds, scfg, *clock);

  rec.best_point = rec.solve.best_point;
  rec.best_f = rec.solve.best_f;
  rec.total_time = clock->elapsed();
  rec.status = rec.solve.status;
  return rec;
}

inline RunRecord run(const RunConfig& cfg) {
  return cfg.mode == RunMode::base ? run_base(cfg) : run_fico(cfg);
}

// One record per (problem, mode, seed), sequentially, in a fixed order, so
// a batch is as reproducible as a single run.
inline std::vector<RunRecord> bench(const RunConfig& base_cfg,
                                    const std::vector<std::string>& problems,
                                    const std::vector<RunMode>& modes,
                                    const std::vector<std::uint64_t>& seeds) {
  std::vector<RunRecord> records;
  records.reserve(problems.size() * modes.size() * seeds.size());
  for (const std::string& prob : problems) {
    for (std::uint64_t seed : seeds) {
      for (RunMode mode : modes) {
        RunConfig cfg = base_cfg;
        cfg.problem = prob;
        cfg.mode = mode;
        cfg.seed = seed;
        records.push_back(run(cfg));
      }
    }
  }
  return records;
}

struct ProfilePoint {
  double time = 0.0;
  double fraction = 0.0;
};

struct ProfileCurve {
  std::string mode;
  std::vector<ProfilePoint> points;  // step curve, nondecreasing fraction
};

struct ProfileResult {
  std::vector<ProfileCurve> curves;
  std::vector<std::string> excluded_problems;  // no feasible point in any run
  std::map<std::string, double> reference_best;  // per problem
};

// Data profile over a batch. An instance is a (problem, seed) pair; it
// counts as solved at time T once the confirmed-incumbent history reaches
// f_best + tau * (f_start - f_best) by T, where f_best is the lowest
// confirmed value any run found on that problem. Problems never solved
// feasibly by anyone are excluded and reported.
inline ProfileResult data_profile(
    const std::vector<RunRecord>& records, double tau,
    const std::map<std::string, double>* reference_best_override = nullptr) {
  if (!(tau > 0.0) || !(tau < 1.0))
    throw std::invalid_argument("data_profile: tau outside (0,1)");

  std::map<std::string, double> best;
  for (const RunRecord& r : records)
    if (r.best_point && r.best_f.computed()) {
      auto it = best.find(r.problem_label);
      if (it == best.end() || r.best_f.value() < it->second)
        best[r.problem_label] = r.best_f.value();
    }
  if (reference_best_override)
    for (const auto& [prob, value] : *reference_best_override) best[prob] = value;

  ProfileResult out;
  for (const RunRecord& r : records)
    if (!best.count(r.problem_label)) {
      if (std::find(out.excluded_problems.begin(), out.excluded_problems.end(),
                    r.problem_label) == out.excluded_problems.end())
        out.excluded_problems.push_back(r.problem_label);
    }
  out.reference_best = best;

  // Instances present in any record, restricted to included problems.
  std::vector<std::pair<std::string, std::uint64_t>> instances;
  std::vector<std::string> modes;
  for (const RunRecord& r : records) {
    if (!best.count(r.problem_label)) continue;
    const std::pair<std::string, std::uint64_t> key{r.problem_label, r.config.seed};
    if (std::find(instances.begin(), instances.end(), key) == instances.end())
      instances.push_back(key);
    const std::string mode = run_mode_name(r.mode);
    if (std::find(modes.begin(), modes.end(), mode) == modes.end())
      modes.push_back(mode);
  }
  if (instances.empty()) return out;

  for (const std::string& mode : modes) {
    std::vector<double> solve_times;
    for (const RunRecord& r : records) {
      if (run_mode_name(r.mode) != mode) continue;
      if (!best.count(r.problem_label)) continue;
      if (!r.f_start.computed()) continue;
      const double f_best = best[r.problem_label];
      const double threshold = f_best + tau * (r.f_start.value() - f_best);
      for (const IncumbentStep& step : r.solve.incumbents)
        if (step.f <= threshold) {
          solve_times.push_back(step.clock);
          break;
        }
    }
    std::sort(solve_times.begin(), solve_times.end());

    ProfileCurve curve;
    curve.mode = mode;
    curve.points.push_back({0.0, 0.0});
    const double denom = static_cast<double>(instances.size());
    for (std::size_t k = 0; k < solve_times.size(); ++k) {
      // Collapse ties so each time appears once with its final fraction.
      if (k + 1 < solve_times.size() && solve_times[k + 1] == solve_times[k])
        continue;
      curve.points.push_back({solve_times[k], static_cast<double>(k + 1) / denom});
    }
    out.curves.push_back(std::move(curve));
  }
  return out;
}

}  // namespace fidopt
