#pragma once

#include <cstring>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "fidopt/blackbox.hpp"
#include "fidopt/core.hpp"
#include "fidopt/rng.hpp"

namespace fidopt {

enum class BarrierMode { extreme, progressive };

struct SolverConfig {
  BarrierMode barrier = BarrierMode::progressive;
  double budget_seconds = 100.0;  // virtual clock budget
  std::size_t max_evaluations = 0;  // 0 = unlimited
  double initial_mesh_fraction = 0.1;
  double mesh_expand = 2.0;
  double mesh_shrink = 0.5;
  double min_mesh_fraction = 1e-9;  // stop once every axis step falls below
  std::uint64_t seed = 1;

  void validate() const {
    if (!(budget_seconds > 0.0))
      throw std::invalid_argument("SolverConfig: budget must be positive");
    if (!(initial_mesh_fraction > 0.0) || initial_mesh_fraction > 1.0)
      throw std::invalid_argument("SolverConfig: initial_mesh_fraction outside (0,1]");
    if (!(mesh_shrink > 0.0) || !(mesh_shrink < 1.0))
      throw std::invalid_argument("SolverConfig: mesh_shrink outside (0,1)");
    if (mesh_expand < 1.0)
      throw std::invalid_argument("SolverConfig: mesh_expand below 1");
    if (!(min_mesh_fraction > 0.0))
      throw std::invalid_argument("SolverConfig: min_mesh_fraction must be positive");
  }
};

// What the solver needs to know about one evaluated point. Produced either
// by the fidelity controller or by a raw fidelity-1 evaluator; the solver
// treats the outputs as the blackbox truth.
struct PointEval {
  ExtReal f = ExtReal::not_computed();
  std::vector<ExtReal> c;
  bool full_fidelity = false;  // outputs come from a fidelity-1 sub-evaluation
  bool apriori_violated = false;  // point lies outside the unrelaxable set
  double time = 0.0;
  std::vector<double> fidelities;  // fidelity values visited, ascending
  bool interrupted = false;
  std::size_t interrupt_constraint = static_cast<std::size_t>(-1);
  bool safeguard_ran = false;
};

using Evaluator = std::function<PointEval(const TrialPoint&)>;

// Extreme barrier: objective unchanged on feasible outputs, +inf otherwise.
inline ExtReal eb_filter(ExtReal f, const std::vector<ExtReal>& c) {
  if (!is_feasible(c)) return ExtReal::infinity();
  return f.computed() ? f : ExtReal::infinity();
}

// Progressive-barrier incumbents: the feasible point with the lowest
// objective, the infeasible point with the lowest objective among those
// within the violation threshold, and the threshold itself.
struct BarrierState {
  std::optional<TrialPoint> x_feas;
  ExtReal f_feas = ExtReal::infinity();
  std::optional<TrialPoint> x_inf;
  ExtReal f_inf = ExtReal::infinity();
  ExtReal h_inf = ExtReal::infinity();
  ExtReal h_max = ExtReal::infinity();
};

struct PBCandidate {
  TrialPoint x;
  ExtReal f;
  ExtReal h;
};

// One progressive-barrier update round. Candidates with h above the
// incoming threshold are rejected outright; feasible candidates compete on
// f for x_feas; the rest compete on f (ties to lower h) for x_inf. Points
// with infinite h (crashes, out-of-box probes) never become incumbents.
// When no candidate dominates the infeasible incumbent but one sits
// strictly closer to feasibility, that one is adopted even at a worse
// objective, which is what pulls the search toward the feasible region
// when objective and violation trade off. Whenever the infeasible
// incumbent moves, the threshold tightens to its violation, so h_max
// never increases.
inline BarrierState pb_step(const std::vector<PBCandidate>& candidates,
                            BarrierState state) {
  const ExtReal threshold = state.h_max;
  bool inf_improved = false;
  for (const PBCandidate& cand : candidates) {
    if (cand.h > threshold) continue;
    const ExtReal f = cand.f.computed() ? cand.f : ExtReal::infinity();
    if (cand.h == ExtReal(0.0)) {
      if (!state.x_feas || f < state.f_feas) {
        state.x_feas = cand.x;
        state.f_feas = f;
      }
    } else if (cand.h.finite()) {
      const bool better = !state.x_inf || f < state.f_inf ||
                          (f == state.f_inf && cand.h < state.h_inf);
      if (better) {
        state.x_inf = cand.x;
        state.f_inf = f;
        state.h_inf = cand.h;
        inf_improved = true;
      }
    }
  }
  if (!inf_improved && state.x_inf) {
    const PBCandidate* pick = nullptr;
    ExtReal pick_f = ExtReal::infinity();
    for (const PBCandidate& cand : candidates) {
      if (!cand.h.finite() || !(cand.h > ExtReal(0.0)) || !(cand.h < state.h_inf))
        continue;
      const ExtReal f = cand.f.computed() ? cand.f : ExtReal::infinity();
      if (!pick || f < pick_f || (f == pick_f && cand.h < pick->h)) {
        pick = &cand;
        pick_f = f;
      }
    }
    if (pick) {
      state.x_inf = pick->x;
      state.f_inf = pick_f;
      state.h_inf = pick->h;
      inf_improved = true;
    }
  }
  if (inf_improved) state.h_max = state.h_inf;
  return state;
}

struct EvalLogEntry {
  TrialPoint x;
  std::vector<double> fidelities;
  double time = 0.0;
  double clock_after = 0.0;
  ExtReal f = ExtReal::not_computed();
  ExtReal h = ExtReal::infinity();
  bool feasible = false;
  bool full_fidelity = false;
  bool interrupted = false;
  std::size_t interrupt_constraint = static_cast<std::size_t>(-1);
  bool safeguard_ran = false;
};

// Confirmed-incumbent trajectory: times are virtual clock readings without
// any sampling offset; f values strictly decrease.
struct IncumbentStep {
  double clock = 0.0;
  double f = 0.0;
  TrialPoint x;
};

struct IterationLogEntry {
  std::size_t iteration = 0;
  double mesh_fraction = 0.0;  // largest per-axis step relative to the box
  ExtReal f_incumbent = ExtReal::infinity();
  ExtReal h_incumbent = ExtReal::infinity();
  ExtReal h_max = ExtReal::infinity();
  double clock = 0.0;
};

struct SolveRecord {
  std::optional<TrialPoint> best_point;  // best fidelity-1-confirmed feasible
  ExtReal best_f = ExtReal::infinity();
  std::vector<EvalLogEntry> evals;
  std::vector<IncumbentStep> incumbents;
  std::vector<IterationLogEntry> iterations;
  double consumed = 0.0;  // clock advance during the solve
  std::size_t eval_count = 0;
  std::size_t cache_hits = 0;
  std::string stop_reason;
  std::string status;  // "ok" or a diagnostic
};

namespace detail {

inline std::string point_key(const TrialPoint& x) {
  std::string key(x.size() * sizeof(double), '\0');
  if (!x.empty()) std::memcpy(key.data(), x.data(), key.size());
  return key;
}

inline ExtReal point_h(const PointEval& pe) {
  return violation_h(pe.c, !pe.apriori_violated);
}

}  // namespace detail

// Mesh-based coordinate poll with opportunistic success, an extreme or
// progressive barrier, and exact-repeat caching (a repeated point reuses
// its recorded outputs and charges nothing, like any evaluation cache in
// front of a deterministic blackbox).
//
// Each iteration polls up to 2n axis steps around the incumbent (both
// barrier incumbents under PB), in an order reshuffled from the seed.
// Success doubles the step, failure halves it; the run ends on budget
// exhaustion, the evaluation limit, or mesh collapse. The returned best
// point is the lowest-objective point confirmed feasible at fidelity 1.
inline SolveRecord minimize(const Evaluator& evaluate, const TrialPoint& x0,
                            const BoxBounds& bounds, const SolverConfig& cfg,
                            const VirtualClock& clock) {
  cfg.validate();
  bounds.validate();
  if (!bounds.contains(x0))
    throw std::invalid_argument("minimize: x0 outside the box");

  const std::size_t n = bounds.dimension();
  const double clock_start = clock.elapsed();
  SolveRecord rec;
  rec.status = "ok";

  std::vector<double> range(n);
  std::vector<double> delta(n);
  bool any_axis = false;
  for (std::size_t i = 0; i < n; ++i) {
    range[i] = bounds.upper[i] - bounds.lower[i];
    delta[i] = cfg.initial_mesh_fraction * range[i];
    if (range[i] > 0.0) any_axis = true;
  }

  RngEngine rng(derive_seed(cfg.seed, 0x504f4c4c));
  std::unordered_map<std::string, PointEval> cache;
  bool out_of_budget = false;

  const auto eval_point = [&](const TrialPoint& x) -> const PointEval& {
    const std::string key = detail::point_key(x);
    auto it = cache.find(key);
    if (it != cache.end()) {
      ++rec.cache_hits;
      return it->second;
    }
    PointEval pe = evaluate(x);
    ++rec.eval_count;

    EvalLogEntry log;
    log.x = x;
    log.fidelities = pe.fidelities;
    log.time = pe.time;
    log.clock_after = clock.elapsed();
    log.f = pe.f;
    log.h = detail::point_h(pe);
    log.feasible = !pe.apriori_violated && is_feasible(pe.c);
    log.full_fidelity = pe.full_fidelity;
    log.interrupted = pe.interrupted;
    log.interrupt_constraint = pe.interrupt_constraint;
    log.safeguard_ran = pe.safeguard_ran;
    rec.evals.push_back(log);

    if (pe.full_fidelity && log.feasible && pe.f.computed() &&
        pe.f < rec.best_f) {
      rec.best_f = pe.f;
      rec.best_point = x;
      rec.incumbents.push_back({clock.elapsed(), pe.f.value(), x});
    }
    if (clock.elapsed() - clock_start >= cfg.budget_seconds) out_of_budget = true;
    return cache.emplace(std::move(key), std::move(pe)).first->second;
  };
  const auto stop_now = [&]() {
    if (out_of_budget) {
      rec.stop_reason = "budget";
      return true;
    }
    if (cfg.max_evaluations != 0 && rec.eval_count >= cfg.max_evaluations) {
      rec.stop_reason = "max_evaluations";
      return true;
    }
    return false;
  };

  // Barrier bookkeeping. The extreme barrier ranks by h until the first
  // feasible point appears, then by the filtered objective.
  BarrierState pb;
  TrialPoint eb_x = x0;
  ExtReal eb_f = ExtReal::infinity();
  ExtReal eb_h = ExtReal::infinity();
  bool eb_has_feasible = false;
  const bool use_pb = cfg.barrier == BarrierMode::progressive;

  const auto eb_consider = [&](const TrialPoint& x, const PointEval& pe) {
    const ExtReal h = detail::point_h(pe);
    if (!eb_has_feasible) {
      if (h == ExtReal(0.0)) {
        eb_has_feasible = true;
        eb_x = x;
        eb_f = eb_filter(pe.f, pe.c);
        eb_h = h;
        return true;
      }
      if (h < eb_h) {
        eb_x = x;
        eb_h = h;
        eb_f = eb_filter(pe.f, pe.c);
        return true;
      }
      return false;
    }
    const ExtReal fo = eb_filter(pe.f, pe.c);
    if (fo < eb_f) {
      eb_x = x;
      eb_f = fo;
      eb_h = h;
      return true;
    }
    return false;
  };

  {
    const PointEval& first = eval_point(x0);
    if (use_pb) {
      pb = pb_step({{x0, first.f, detail::point_h(first)}}, pb);
    } else {
      eb_consider(x0, first);
    }
  }

  std::size_t iteration = 0;
  std::vector<std::size_t> dir_order(2 * n);
  while (!stop_now()) {
    if (!any_axis) {
      rec.stop_reason = "degenerate_box";
      break;
    }
    double mesh_fraction = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (range[i] > 0.0) mesh_fraction = std::max(mesh_fraction, delta[i] / range[i]);
    if (mesh_fraction < cfg.min_mesh_fraction) {
      rec.stop_reason = "mesh_collapsed";
      break;
    }

    std::vector<TrialPoint> centers;
    if (use_pb) {
      if (pb.x_feas) centers.push_back(*pb.x_feas);
      if (pb.x_inf && (!pb.x_feas || *pb.x_inf != *pb.x_feas))
        centers.push_back(*pb.x_inf);
      if (centers.empty()) centers.push_back(x0);
    } else {
      centers.push_back(eb_x);
    }

    bool success = false;
    std::vector<PBCandidate> round;
    for (const TrialPoint& center : centers) {
      for (std::size_t k = 0; k < 2 * n; ++k) dir_order[k] = k;
      shuffle_in_place(dir_order, rng);
      for (std::size_t k : dir_order) {
        const std::size_t axis = k / 2;
        if (range[axis] <= 0.0) continue;
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        TrialPoint cand = center;
        cand[axis] += sign * delta[axis];
        cand = bounds.clamp(std::move(cand));
        if (cand == center) continue;
        const PointEval& pe = eval_point(cand);
        if (use_pb) {
          const ExtReal h = detail::point_h(pe);
          round.push_back({cand, pe.f, h});
          const ExtReal f = pe.f.computed() ? pe.f : ExtReal::infinity();
          // Same acceptance as pb_step: a feasible or dominating point, or
          // one strictly closer to feasibility than the incumbent.
          const bool improving =
              (h == ExtReal(0.0) && (!pb.x_feas || f < pb.f_feas)) ||
              (h > ExtReal(0.0) && h.finite() && h <= pb.h_max &&
               (!pb.x_inf || f < pb.f_inf || h < pb.h_inf));
          if (improving) success = true;
        } else {
          if (eb_consider(cand, pe)) success = true;
        }
        if (success || out_of_budget) break;
      }
      if (success || out_of_budget) break;
    }
    if (use_pb && !round.empty()) pb = pb_step(round, pb);

    for (std::size_t i = 0; i < n; ++i) {
      if (range[i] <= 0.0) continue;
      if (success)
        delta[i] = std::min(delta[i] * cfg.mesh_expand, range[i]);
      else
        delta[i] *= cfg.mesh_shrink;
    }

    ++iteration;
    IterationLogEntry it_log;
    it_log.iteration = iteration;
    it_log.mesh_fraction = mesh_fraction;
    if (use_pb) {
      it_log.f_incumbent = pb.x_feas ? pb.f_feas : pb.f_inf;
      it_log.h_incumbent = pb.x_feas ? ExtReal(0.0) : pb.h_inf;
      it_log.h_max = pb.h_max;
    } else {
      it_log.f_incumbent = eb_f;
      it_log.h_incumbent = eb_h;
    }
    it_log.clock = clock.elapsed();
    rec.iterations.push_back(it_log);
  }
  if (rec.stop_reason.empty()) rec.stop_reason = out_of_budget ? "budget" : "done";

  rec.consumed = clock.elapsed() - clock_start;
  if (!rec.best_point) rec.status = "no feasible point confirmed at full fidelity";
  return rec;
}

// Raw fidelity-1 evaluator: what the base configuration uses in place of
// the controller. Charges the clock with the true evaluation cost.
inline Evaluator make_direct_evaluator(const MultiFidelityBlackbox& bb,
                                       VirtualClock& clock) {
  return [&bb, &clock](const TrialPoint& x) {
    EvalOutput out = bb.evaluate(x, 1.0);
    clock.charge(out);
    PointEval pe;
    pe.f = out.f;
    pe.apriori_violated = out.apriori_violated;
    pe.c = std::move(out.c);
    pe.full_fidelity = !out.apriori_violated;
    pe.time = out.time;
    pe.fidelities = {out.apriori_violated ? 0.0 : 1.0};
    return pe;
  };
}

}  // namespace fidopt
