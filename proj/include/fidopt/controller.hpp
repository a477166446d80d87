#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "fidopt/assignment.hpp"
#include "fidopt/blackbox.hpp"
#include "fidopt/core.hpp"

namespace fidopt {

inline constexpr std::size_t kNoConstraint = static_cast<std::size_t>(-1);

// Mutable per-run state of the fidelity controller: the assignment driving
// the ladder walk, and the best objective value confirmed feasible at
// fidelity 1 so far (starts at +inf, only ever decreases).
struct ControllerState {
  AssignmentMatrix matrix;
  FidelityLadder ladder;
  ExtReal f_star = ExtReal::infinity();
  VirtualClock* clock = nullptr;
};

// Record of one controlled evaluation: the rungs visited in ascending
// order with their raw outputs, where (if anywhere) the walk stopped
// early, and whether the extra top-fidelity confirmation ran.
struct EvalTrace {
  std::vector<std::size_t> visited;  // ladder indexes, strictly increasing
  std::vector<EvalOutput> outputs;   // parallel to visited
  bool interrupted = false;
  std::size_t interrupt_constraint = kNoConstraint;
  bool safeguard_ran = false;
  double total_time = 0.0;

  const EvalOutput& final_output() const { return outputs.back(); }

  // True when the returned outputs come from a fidelity-1 sub-evaluation.
  bool final_full_fidelity() const {
    return !outputs.empty() && outputs.back().fidelity == 1.0;
  }
};

struct ControlledEval {
  ExtReal f = ExtReal::not_computed();
  std::vector<ExtReal> c;
  EvalTrace trace;
};

namespace detail {

inline std::size_t first_violated_apriori(const ConstraintMeta& meta,
                                          const std::vector<ExtReal>& c) {
  for (std::size_t j : meta.a_priori)
    if (c[j].computed() && c[j] > ExtReal(0.0)) return j;
  return kNoConstraint;
}

}  // namespace detail

// One controlled evaluation of x.
//
// Walks the rungs that hold at least one assigned constraint (plus the top
// rung under force_top) in ascending order, preceded by a fidelity-0 check
// when the ladder has one and the problem has a priori constraints. After
// each sub-evaluation the walk stops if any constraint assigned at or
// below the current rung reports a violation; the latest outputs are
// returned as-is. A completed walk that never touched fidelity 1 earns one
// extra sub-evaluation there when its objective would improve f_star (or
// when no objective was produced at all), so no point can become the
// incumbent on unconfirmed outputs. Every sub-evaluation charges the clock.
inline ControlledEval controlled_evaluate(const TrialPoint& x,
                                          ControllerState& state,
                                          const MultiFidelityBlackbox& bb) {
  const ConstraintMeta& meta = bb.descriptor().constraints;
  ControlledEval result;
  EvalTrace& trace = result.trace;

  const auto sub_evaluate = [&](std::size_t rung) -> const EvalOutput& {
    EvalOutput out = bb.evaluate(x, state.ladder[rung]);
    trace.total_time += out.time;
    if (state.clock) state.clock->charge(out);
    trace.visited.push_back(rung);
    trace.outputs.push_back(std::move(out));
    return trace.outputs.back();
  };
  const auto finish = [&]() {
    const EvalOutput& last = trace.final_output();
    result.f = last.f;
    result.c = last.c;
    return result;
  };

  const std::vector<std::size_t> walk = state.matrix.active_rows();

  if (state.ladder.has_zero() && !meta.a_priori.empty() &&
      (walk.empty() || walk.front() != 0)) {
    const EvalOutput& out = sub_evaluate(0);
    if (out.apriori_violated) {
      trace.interrupted = true;
      trace.interrupt_constraint = detail::first_violated_apriori(meta, out.c);
      return finish();
    }
  }

  for (std::size_t i : walk) {
    const EvalOutput& out = sub_evaluate(i);
    if (out.apriori_violated) {
      trace.interrupted = true;
      trace.interrupt_constraint = detail::first_violated_apriori(meta, out.c);
      return finish();
    }
    for (std::size_t j = 0; j < meta.count; ++j) {
      const std::ptrdiff_t a = state.matrix.assigned_row(j);
      if (a == AssignmentMatrix::kNone ||
          a > static_cast<std::ptrdiff_t>(i))
        continue;
      if (out.c[j].computed() && out.c[j] > ExtReal(0.0)) {
        trace.interrupted = true;
        trace.interrupt_constraint = j;
        return finish();
      }
    }
    if (out.failed) {
      // all-infinity outputs with nothing assigned this low: still abandon
      trace.interrupted = true;
      return finish();
    }
  }

  const bool top_visited =
      !trace.visited.empty() && trace.visited.back() == state.ladder.top_index();
  if (!top_visited) {
    const ExtReal f_bar =
        trace.outputs.empty() ? ExtReal::not_computed() : trace.final_output().f;
    if (!f_bar.computed() || f_bar < state.f_star) {
      trace.safeguard_ran = true;
      const EvalOutput& out = sub_evaluate(state.ladder.top_index());
      if (out.apriori_violated) {
        trace.interrupted = true;
        trace.interrupt_constraint = detail::first_violated_apriori(meta, out.c);
      }
    }
  }
  return finish();
}

// Adopts the evaluation's objective as the new f_star when its outputs are
// full-fidelity, fully feasible, and improving. Interrupted or unconfirmed
// points never move the incumbent value.
inline void update_f_star(ControllerState& state, const ControlledEval& eval) {
  if (!eval.trace.final_full_fidelity()) return;
  if (!eval.f.computed()) return;
  if (!is_feasible(eval.c)) return;
  if (eval.f < state.f_star) state.f_star = eval.f;
}

}  // namespace fidopt
