// Acceptance gate: one self-contained check per release criterion, each
// printing a single PASS/FAIL line with the measured quantities. The
// process exit code is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fidopt/fidopt.hpp"
#include "support/oracles.hpp"

using namespace fidopt;
using testsupport::mc_walk_time;
using testsupport::random_feasible_matrix;
using testsupport::random_instance;

namespace {

constexpr double kValueTol = 1e-12;      // exact-arithmetic comparisons
constexpr double kMcSigmas = 3.0;        // Monte-Carlo acceptance band
constexpr std::size_t kMcTrials = 100000;
constexpr double kEstimatorTol = 0.02;   // max per-cell estimator error
constexpr double kPayoffRatio = 0.70;    // time-to-result vs baseline budget

struct Verdict {
  bool ok = false;
  std::string detail;
};

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

double wall_seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
      .count();
}

std::vector<TrialPoint> eval_points(const SolveRecord& rec) {
  std::vector<TrialPoint> xs;
  for (const EvalLogEntry& e : rec.evals) xs.push_back(e.x);
  return xs;
}

// 1. The pruned assignment search returns the exhaustive optimum.
Verdict check_search_oracle() {
  const auto start = std::chrono::steady_clock::now();
  const double epsilons[] = {0.01, 0.05, 0.1};
  RngEngine rng(20260823);
  double max_diff = 0.0;
  int bad = 0;
  const int total = 120;
  for (int k = 0; k < total; ++k) {
    const std::size_t L = 2 + uniform_below(rng, 5);
    const std::size_t m = 1 + uniform_below(rng, 5);
    const AssignmentInstance inst =
        random_instance(rng, L, m, epsilons[k % 3], k % 2 == 1);
    const AssignmentSolution sol = solve_assignment(inst);
    const BruteForceResult oracle = brute_force_q1(inst);
    const double diff = std::abs(sol.expected_time - oracle.value);
    max_diff = std::max(max_diff, diff);
    if (diff > kValueTol || !is_assignment_feasible(inst, sol.matrix)) ++bad;
  }
  const double secs = wall_seconds(start);
  return {bad == 0 && secs < 60.0,
          fmt("%d instances, max |search - oracle| = %.3g, %.2f s", total,
              max_diff, secs)};
}

// 2. The closed-form expected walk time matches Monte-Carlo runs of the
// real controller on a Bernoulli blackbox.
Verdict check_expected_time_mc() {
  RngEngine rng(7401);
  double worst_z = 0.0;
  int bad = 0;
  const int total = 55;
  for (int k = 0; k < total; ++k) {
    const std::size_t L = 2 + uniform_below(rng, 4);
    const std::size_t m = 1 + uniform_below(rng, 5);
    const AssignmentInstance inst = random_instance(rng, L, m, 0.05, false);
    const AssignmentMatrix B = random_feasible_matrix(inst, rng);
    const double expected = expected_eval_time(B, inst);

    std::vector<double> phi(L);
    for (std::size_t i = 0; i < L; ++i)
      phi[i] = static_cast<double>(i + 1) / static_cast<double>(L);
    const FidelityLadder ladder(phi);
    const testsupport::BernoulliBlackbox bb(B, ladder, inst.p, inst.t,
                                            1000 + static_cast<std::uint64_t>(k));
    ControllerState state{B, ladder,
                          ExtReal(-std::numeric_limits<double>::infinity()),
                          nullptr};
    const TrialPoint x{0.5};
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t trial = 0; trial < kMcTrials; ++trial) {
      const ControlledEval ev = controlled_evaluate(x, state, bb);
      sum += ev.trace.total_time;
      sum_sq += ev.trace.total_time * ev.trace.total_time;
    }
    const double n = static_cast<double>(kMcTrials);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
    const double se = std::sqrt(var / n);
    const double err = std::abs(mean - expected);
    if (se > 0.0) worst_z = std::max(worst_z, err / se);
    if (err > kMcSigmas * se + 1e-9) ++bad;
  }
  return {bad == 0, fmt("%d instances x %zu walks, worst |z| = %.2f (limit %.1f)",
                        total, kMcTrials, worst_z, kMcSigmas)};
}

// 3. Shifting an assignment off a row outside the filtered set keeps it
// feasible and never raises the modeled cost.
Verdict check_downshift() {
  RngEngine rng(515);
  int exercised = 0;
  int bad = 0;
  double worst_rise = -std::numeric_limits<double>::infinity();
  while (exercised < 500) {
    const std::size_t L = 2 + uniform_below(rng, 4);
    const std::size_t m = 1 + uniform_below(rng, 4);
    const AssignmentInstance inst = random_instance(rng, L, m, 0.1, true);
    const AssignmentMatrix B = random_feasible_matrix(inst, rng);
    const InstanceReduction red = reduce_instance(inst);

    std::size_t outside = inst.levels;
    for (std::size_t i : B.active_rows())
      if (std::find(red.fidelity_set.begin(), red.fidelity_set.end(), i) ==
          red.fidelity_set.end())
        outside = i;
    if (outside == inst.levels) continue;

    const AssignmentMatrix shifted = shift_assignments_down(B, outside);
    const double rise =
        expected_eval_time(shifted, inst) - expected_eval_time(B, inst);
    worst_rise = std::max(worst_rise, rise);
    if (!is_assignment_feasible(inst, shifted) || rise > kValueTol) ++bad;
    ++exercised;
  }
  return {bad == 0,
          fmt("%d shifts, worst cost change = %.3g", exercised, worst_rise)};
}

// 4. Sampled violation/representativity tables track a dense-grid ground
// truth within the tolerance, for every seed.
Verdict check_estimators() {
  const NamedProblem prob = make_problem("checker");
  const SyntheticBlackbox bb(prob.spec);
  const BoxBounds& box = bb.descriptor().bounds;
  const GroundTruthStats truth = true_stats(prob.spec, prob.ladder, box, 600);

  double worst_dp = 0.0, worst_dr = 0.0;
  bool shape_ok = true;
  int bad = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const std::vector<TrialPoint> pts = latin_hypercube(box, 10000, seed);
    const SampleSet samples = evaluate_sample(bb, prob.ladder, pts, box);
    const FeasibilityStats est = estimate_stats(samples, bb.descriptor().constraints);
    double dp = 0.0, dr = 0.0;
    for (std::size_t i = 0; i < est.levels; ++i)
      for (std::size_t j = 0; j < est.constraints; ++j) {
        dp = std::max(dp, std::abs(est.p[i][j] - truth.p[i][j]));
        dr = std::max(dr, std::abs(est.r[i][j] - truth.r[i][j]));
        if (i + 1 < est.levels && est.r[i][j] > est.r[i + 1][j]) shape_ok = false;
      }
    for (std::size_t j = 0; j < est.constraints; ++j)
      if (est.r[est.levels - 1][j] != 1.0) shape_ok = false;
    worst_dp = std::max(worst_dp, dp);
    worst_dr = std::max(worst_dr, dr);
    if (dp > kEstimatorTol || dr > kEstimatorTol) ++bad;
  }
  return {bad == 0 && shape_ok,
          fmt("5 seeds, max |p_hat - p| = %.4f, max |r_hat - r| = %.4f "
              "(limit %.2f), monotone/top-exact %s",
              worst_dp, worst_dr, kEstimatorTol, shape_ok ? "yes" : "NO")};
}

RunConfig mirage_pair_config(std::uint64_t seed, double epsilon) {
  RunConfig cfg;
  cfg.problem = "mirage";
  cfg.epsilon = epsilon;
  cfg.n_h = 400;
  cfg.workers = 400;
  cfg.seed = seed;
  cfg.solver.budget_seconds = 1e5;
  cfg.solver.max_evaluations = 150;
  return cfg;
}

// 5. When no low rung is trusted, a zero threshold forces every constraint
// to the top rung and the controlled run replays the fixed-fidelity run.
Verdict check_base_equivalence() {
  int bad = 0;
  bool found_best = false;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    RunConfig cfg = mirage_pair_config(seed, 0.0);
    cfg.mode = RunMode::inter_pb;
    const RunRecord fico = run_fico(cfg);
    cfg.mode = RunMode::base;
    const RunRecord base = run_base(cfg);

    bool ok = fico.matrix.has_value();
    if (ok) {
      const std::size_t top = make_problem("mirage").ladder.top_index();
      for (std::size_t j = 0; j < 2; ++j)
        if (fico.matrix->assigned_row(j) != static_cast<std::ptrdiff_t>(top))
          ok = false;
    }
    if (eval_points(fico.solve) != eval_points(base.solve)) ok = false;
    if (fico.best_point != base.best_point) ok = false;
    if (!(fico.best_f == base.best_f) &&
        !(fico.best_f.infinite() && base.best_f.infinite()))
      ok = false;
    if (fico.best_point) found_best = true;
    if (!ok) ++bad;
  }
  return {bad == 0 && found_best,
          fmt("3 paired seeds, identical iterates and final points%s",
              found_best ? "" : ", but no confirmed best at all")};
}

struct BenchData {
  std::vector<RunRecord> records;
};

BenchData run_bench_batch() {
  RunConfig base_cfg;
  base_cfg.n_h = 300;
  base_cfg.workers = 300;
  base_cfg.solver.budget_seconds = 40.0;
  BenchData data;
  data.records = bench(base_cfg, problem_names(),
                       {RunMode::inter_pb, RunMode::inter_eb, RunMode::base},
                       {1, 2});
  return data;
}

// 6. Every best point any benchmark run reports is genuinely feasible when
// re-evaluated at full fidelity.
Verdict check_safeguard_soundness(const BenchData& data) {
  std::map<std::string, std::shared_ptr<SyntheticBlackbox>> boxes;
  for (const std::string& name : problem_names())
    boxes[name] = std::make_shared<SyntheticBlackbox>(make_problem(name).spec);

  int with_best = 0, violations = 0;
  for (const RunRecord& rec : data.records) {
    if (!rec.best_point) continue;
    ++with_best;
    const EvalOutput out = boxes.at(rec.problem_label)->evaluate(*rec.best_point, 1.0);
    if (!is_feasible(out.c) || !(out.f == rec.best_f)) ++violations;
  }
  return {violations == 0 && with_best > 0,
          fmt("%zu runs, %d reported bests, %d violations", data.records.size(),
              with_best, violations)};
}

// 7. On a tight feasible region gated by a cheap trustworthy rung, the
// interrupting run reaches the baseline's final value in well under the
// baseline's own consumption. Both legs use the extreme barrier, so the
// only difference between them is the fidelity control.
Verdict check_interruption_payoff() {
  std::vector<double> ratios;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RunConfig cfg;
    cfg.problem = "gate";
    cfg.seed = seed;
    cfg.solver.budget_seconds = 150.0;
    cfg.solver.barrier = BarrierMode::extreme;

    cfg.mode = RunMode::base;
    const RunRecord base = run_base(cfg);
    if (!base.best_point) {
      ratios.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    const double target = base.best_f.value() + kValueTol;

    cfg.mode = RunMode::inter_eb;
    cfg.n_h = 500;
    cfg.workers = 500;
    const RunRecord eb = run_fico(cfg);
    double reach = std::numeric_limits<double>::infinity();
    for (const IncumbentStep& step : eb.solve.incumbents)
      if (step.f <= target) {
        reach = step.clock;
        break;
      }
    ratios.push_back(reach / base.total_time);
  }
  std::sort(ratios.begin(), ratios.end());
  const double median = 0.5 * (ratios[9] + ratios[10]);
  return {median <= kPayoffRatio,
          fmt("20 paired seeds, median time ratio = %.3f (limit %.2f)", median,
              kPayoffRatio)};
}

// 8. With no representative low rung at the working threshold, the computed
// assignment is all-top and the trajectory equals the fixed-fidelity one,
// shifted by the sampling offset.
Verdict check_emulation_regime() {
  int bad = 0;
  double worst_shift = 0.0;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    RunConfig cfg = mirage_pair_config(seed, 0.05);
    cfg.force_top = true;
    cfg.mode = RunMode::inter_pb;
    const RunRecord fico = run_fico(cfg);
    cfg.mode = RunMode::base;
    const RunRecord base = run_base(cfg);

    bool ok = fico.matrix.has_value();
    if (ok)
      for (std::size_t j = 0; j < 2; ++j)
        if (fico.matrix->assigned_row(j) != 2) ok = false;
    if (eval_points(fico.solve) != eval_points(base.solve)) ok = false;
    if (fico.best_point != base.best_point) ok = false;
    if (fico.solve.evals.size() == base.solve.evals.size()) {
      for (std::size_t k = 0; k < fico.solve.evals.size(); ++k) {
        const double shift = std::abs(fico.solve.evals[k].clock_after -
                                      (base.solve.evals[k].clock_after + fico.offset));
        worst_shift = std::max(worst_shift, shift);
        if (shift > 1e-9) ok = false;
      }
    } else {
      ok = false;
    }
    if (!ok) ++bad;
  }
  return {bad == 0,
          fmt("3 paired seeds, all-top assignment, max timestamp drift = %.2g",
              worst_shift)};
}

// 9. The shrunken sampling window matches the reference cases exactly.
Verdict check_centered_bounds() {
  const BoxBounds box{{0.0}, {10.0}};
  const TrialPoint x0{5.0};
  bool ok = true;

  const BoxBounds full = centered_bounds(x0, box, 1.0);
  ok = ok && full.lower == box.lower && full.upper == box.upper;
  const BoxBounds collapsed = centered_bounds(x0, box, 0.0);
  ok = ok && collapsed.lower == TrialPoint{5.0} && collapsed.upper == TrialPoint{5.0};
  const BoxBounds quarter = centered_bounds(x0, box, 0.25);
  ok = ok && quarter.lower == TrialPoint{2.5} && quarter.upper == TrialPoint{7.5};
  const BoxBounds edge = centered_bounds({1.0}, box, 0.25);
  ok = ok && edge.lower == TrialPoint{0.0} && edge.upper == TrialPoint{3.5};

  return {ok, "full-box, degenerate, interior and saturated cases exact"};
}

// 10. Violation measure and barrier rules hold on fixed values, and the
// progressive threshold never rises across the logged benchmark runs.
Verdict check_barrier_rules(const BenchData& data) {
  bool ok = true;

  ok = ok && violation_h({ExtReal(-1.0), ExtReal(-2.0)}) == ExtReal(0.0);
  ok = ok && violation_h({ExtReal(3.0), ExtReal(-1.0)}) == ExtReal(9.0);
  ok = ok && violation_h({ExtReal(2.0), ExtReal(0.5)}) == ExtReal(4.25);
  ok = ok && violation_h({ExtReal(-1.0)}, false).infinite();
  ok = ok && violation_h({ExtReal::infinity()}).infinite();
  ok = ok && is_feasible({ExtReal(0.0), ExtReal(0.0)});
  ok = ok && !is_feasible({ExtReal(1e-9), ExtReal(-5.0)});
  ok = ok && !is_feasible({ExtReal::not_computed()});

  ok = ok && eb_filter(ExtReal(2.0), {ExtReal(-1.0)}) == ExtReal(2.0);
  ok = ok && eb_filter(ExtReal(2.0), {ExtReal(0.1)}).infinite();

  BarrierState s = pb_step({{{0.1}, ExtReal(1.0), ExtReal(0.5)},
                            {{0.2}, ExtReal(3.0), ExtReal(0.0)}},
                           {});
  ok = ok && s.x_feas && s.f_feas == ExtReal(3.0);
  ok = ok && s.x_inf && s.f_inf == ExtReal(1.0) && s.h_max == ExtReal(0.5);
  const BarrierState rejected =
      pb_step({{{0.9}, ExtReal(0.0), ExtReal(5.0)}}, s);
  ok = ok && rejected.h_max == s.h_max && rejected.f_feas == s.f_feas;

  std::size_t logged = 0;
  for (const RunRecord& rec : data.records) {
    if (rec.mode == RunMode::inter_eb) continue;  // extreme barrier runs
    ExtReal prev = ExtReal::infinity();
    for (const IterationLogEntry& it : rec.solve.iterations) {
      if (it.h_max > prev) ok = false;
      prev = it.h_max;
      ++logged;
    }
  }
  return {ok && logged > 0,
          fmt("value cases exact, threshold nonincreasing over %zu logged "
              "iterations",
              logged)};
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  int failures = 0;
  int id = 0;
  const auto report = [&](const char* name, const Verdict& v) {
    ++id;
    std::printf("criterion %2d: %s  %s  [%s]\n", id, v.ok ? "PASS" : "FAIL",
                name, v.detail.c_str());
    std::fflush(stdout);
    if (!v.ok) ++failures;
  };

  report("assignment search equals the exhaustive oracle", check_search_oracle());
  report("expected walk time matches controller Monte-Carlo",
         check_expected_time_mc());
  report("downshifted assignments stay feasible at no extra cost",
         check_downshift());
  report("sampled estimators track dense-grid ground truth", check_estimators());
  report("zero threshold reproduces the fixed-fidelity run",
         check_base_equivalence());

  const BenchData batch = run_bench_batch();
  report("reported bests re-evaluate feasible at full fidelity",
         check_safeguard_soundness(batch));
  report("interruption reaches the baseline result in under 70% of its time",
         check_interruption_payoff());
  report("unrepresentative ladder degrades to the baseline exactly",
         check_emulation_regime());
  report("centered sampling bounds match the reference cases",
         check_centered_bounds());
  report("violation and barrier rules hold on values and logged runs",
         check_barrier_rules(batch));

  std::printf("%d/%d criteria passed in %.1f s\n", id - failures, id,
              wall_seconds(start));
  return failures;
}
