#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fidopt/core.hpp"
#include "fidopt/sampling.hpp"

namespace fidopt {

// Inputs of the constraint-to-fidelity assignment model: per-rung
// representativity and violation fractions, mean sub-evaluation times, the
// threshold tolerance epsilon, and which constraints are a priori (those
// never receive an assignment). force_top keeps the top rung active even
// when nothing is assigned there, for objectives that vary with fidelity.
struct AssignmentInstance {
  std::size_t levels = 0;       // L
  std::size_t constraints = 0;  // m
  std::vector<std::vector<double>> r;
  std::vector<std::vector<double>> p;
  std::vector<double> t;
  double epsilon = 0.05;
  std::vector<std::size_t> a_priori;  // sorted, unique
  bool force_top = false;

  bool is_a_priori(std::size_t j) const {
    return std::binary_search(a_priori.begin(), a_priori.end(), j);
  }

  void validate() const {
    if (levels == 0) throw std::invalid_argument("AssignmentInstance: levels == 0");
    if (epsilon < 0.0 || epsilon > 1.0)
      throw std::invalid_argument("AssignmentInstance: epsilon outside [0,1]");
    if (r.size() != levels || p.size() != levels || t.size() != levels)
      throw std::invalid_argument("AssignmentInstance: table height mismatch");
    for (std::size_t i = 0; i < levels; ++i) {
      if (r[i].size() != constraints || p[i].size() != constraints)
        throw std::invalid_argument("AssignmentInstance: table width mismatch");
      for (std::size_t j = 0; j < constraints; ++j)
        if (r[i][j] < 0.0 || r[i][j] > 1.0 || p[i][j] < 0.0 || p[i][j] > 1.0)
          throw std::invalid_argument("AssignmentInstance: r/p entry outside [0,1]");
      if (t[i] < 0.0)
        throw std::invalid_argument("AssignmentInstance: negative time");
    }
    ConstraintMeta meta{constraints, a_priori};
    meta.validate();
    for (std::size_t j = 0; j < constraints; ++j)
      if (!is_a_priori(j) && r[levels - 1][j] < 1.0 - epsilon)
        throw std::invalid_argument(
            "AssignmentInstance: top rung not assignable for constraint " +
            std::to_string(j));
  }
};

inline AssignmentInstance make_instance(const FeasibilityStats& stats,
                                        const ConstraintMeta& meta, double epsilon,
                                        bool force_top) {
  AssignmentInstance inst;
  inst.levels = stats.levels;
  inst.constraints = stats.constraints;
  inst.r = stats.r;
  inst.p = stats.p;
  inst.t = stats.t;
  inst.epsilon = epsilon;
  inst.a_priori = meta.a_priori;
  inst.force_top = force_top;
  inst.validate();
  return inst;
}

// Binary L x m assignment held as one row index per column (-1 when the
// column is unassigned, as all a priori columns are). Row activity y_i is
// derived: a row is active iff it holds an assignment, with the top row
// additionally forced active under force_top.
class AssignmentMatrix {
 public:
  static constexpr std::ptrdiff_t kNone = -1;

  AssignmentMatrix() = default;
  AssignmentMatrix(std::size_t levels, std::size_t columns, bool force_top = false)
      : levels_(levels), assigned_(columns, kNone), force_top_(force_top) {}

  std::size_t levels() const { return levels_; }
  std::size_t columns() const { return assigned_.size(); }
  bool force_top() const { return force_top_; }

  std::ptrdiff_t assigned_row(std::size_t j) const { return assigned_[j]; }

  void assign(std::size_t j, std::size_t i) {
    if (i >= levels_) throw std::invalid_argument("AssignmentMatrix: row out of range");
    assigned_[j] = static_cast<std::ptrdiff_t>(i);
  }

  void clear(std::size_t j) { assigned_[j] = kNone; }

  bool b(std::size_t i, std::size_t j) const {
    return assigned_[j] == static_cast<std::ptrdiff_t>(i);
  }

  bool row_has_assignment(std::size_t i) const {
    for (std::ptrdiff_t a : assigned_)
      if (a == static_cast<std::ptrdiff_t>(i)) return true;
    return false;
  }

  bool y(std::size_t i) const {
    if (force_top_ && i + 1 == levels_) return true;
    return row_has_assignment(i);
  }

  // Active rows in ascending order; the walk order of the controller.
  std::vector<std::size_t> active_rows() const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < levels_; ++i)
      if (y(i)) rows.push_back(i);
    return rows;
  }

  friend bool operator==(const AssignmentMatrix& a, const AssignmentMatrix& b) {
    return a.levels_ == b.levels_ && a.assigned_ == b.assigned_ &&
           a.force_top_ == b.force_top_;
  }

 private:
  std::size_t levels_ = 0;
  std::vector<std::ptrdiff_t> assigned_;
  bool force_top_ = false;
};

// Probability that a sub-evaluation at rung k triggers no interruption:
// product of (1 - p_kj) over the constraints assigned to rung k; 1 for an
// empty row. Factors multiply in ascending column order.
inline double no_interrupt_prob(const AssignmentMatrix& B,
                                const std::vector<std::vector<double>>& p,
                                std::size_t k) {
  double prod = 1.0;
  for (std::size_t j = 0; j < B.columns(); ++j)
    if (B.b(k, j)) prod *= 1.0 - p[k][j];
  return prod;
}

namespace detail {

// Shared evaluation core: expected time from per-row activity and per-row
// no-interruption products. Both the direct evaluator and the exhaustive
// search leaves go through this, so their values agree bit for bit.
inline double expected_time_from_rows(const std::vector<double>& t,
                                      const std::vector<char>& active,
                                      const std::vector<double>& row_prod) {
  double total = 0.0;
  double prefix = 1.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (active[i]) total += t[i] * prefix;
    prefix *= row_prod[i];
  }
  return total;
}

}  // namespace detail

// Expected single-point evaluation time of the ladder walk induced by B:
// each active row's time weighted by the probability that no lower active
// row interrupted first.
inline double expected_eval_time(const AssignmentMatrix& B,
                                 const AssignmentInstance& inst) {
  const std::size_t L = inst.levels;
  std::vector<char> active(L);
  std::vector<double> row_prod(L);
  for (std::size_t i = 0; i < L; ++i) {
    active[i] = B.y(i) || (inst.force_top && i + 1 == L);
    row_prod[i] = no_interrupt_prob(B, inst.p, i);
  }
  return detail::expected_time_from_rows(inst.t, active, row_prod);
}

// Smallest rung where constraint j clears the representativity threshold
// 1 - epsilon. Exists for every non-a-priori column of a valid instance
// because the top rung is representative by definition.
inline std::size_t min_assignable_index(const AssignmentInstance& inst,
                                        std::size_t j) {
  for (std::size_t i = 0; i < inst.levels; ++i)
    if (inst.r[i][j] >= 1.0 - inst.epsilon) return i;
  throw std::logic_error("min_assignable_index: no rung clears the threshold");
}

struct InstanceReduction {
  std::vector<std::size_t> fidelity_set;    // ascending, unique
  std::vector<std::size_t> constraint_set;  // non-a-priori columns, ascending
  std::vector<std::size_t> min_index;       // i(j) per column (full width)
};

// The two search-space reductions: keep only non-a-priori columns, and
// keep only the rungs that are minimal for some column. An optimal
// assignment over the reduced grid is optimal over the full grid.
inline InstanceReduction reduce_instance(const AssignmentInstance& inst) {
  InstanceReduction red;
  red.min_index.resize(inst.constraints);
  for (std::size_t j = 0; j < inst.constraints; ++j) {
    red.min_index[j] = min_assignable_index(inst, j);
    if (!inst.is_a_priori(j)) {
      red.constraint_set.push_back(j);
      red.fidelity_set.push_back(red.min_index[j]);
    }
  }
  std::sort(red.fidelity_set.begin(), red.fidelity_set.end());
  red.fidelity_set.erase(
      std::unique(red.fidelity_set.begin(), red.fidelity_set.end()),
      red.fidelity_set.end());
  return red;
}

// Validity of an assignment: every non-a-priori column assigned to exactly
// one rung at or above its minimal index, every a priori column empty.
inline bool is_assignment_feasible(const AssignmentInstance& inst,
                                   const AssignmentMatrix& B) {
  if (B.levels() != inst.levels || B.columns() != inst.constraints) return false;
  for (std::size_t j = 0; j < inst.constraints; ++j) {
    const std::ptrdiff_t a = B.assigned_row(j);
    if (inst.is_a_priori(j)) {
      if (a != AssignmentMatrix::kNone) return false;
    } else {
      if (a == AssignmentMatrix::kNone) return false;
      if (static_cast<std::size_t>(a) < min_assignable_index(inst, j)) return false;
    }
  }
  return true;
}

// Moves every assignment held by `row` down to `row - 1`, leaving other
// columns untouched. When `row` is occupied but outside the reduced
// fidelity set, the result is feasible and never costs more.
inline AssignmentMatrix shift_assignments_down(AssignmentMatrix B, std::size_t row) {
  if (row == 0)
    throw std::invalid_argument("shift_assignments_down: no row below row 0");
  for (std::size_t j = 0; j < B.columns(); ++j)
    if (B.assigned_row(j) == static_cast<std::ptrdiff_t>(row))
      B.assign(j, row - 1);
  return B;
}

struct AssignmentSolution {
  AssignmentMatrix matrix;
  double expected_time = 0.0;
  std::size_t candidates = 0;  // leaves inspected
};

// Exhaustive search over the reduced grid: every non-a-priori constraint
// chooses a rung from the reduced fidelity set at or above its minimal
// index. Ties go to the lexicographically lowest assignment vector in
// column order, which prefers lower fidelities. The candidate count is
// capped; pathological instances should raise epsilon or coarsen the
// ladder instead.
inline AssignmentSolution solve_assignment(const AssignmentInstance& inst,
                                           std::size_t max_candidates = 10000000) {
  inst.validate();
  const InstanceReduction red = reduce_instance(inst);
  const std::size_t L = inst.levels;

  std::vector<std::vector<std::size_t>> choices;
  double combos = 1.0;
  for (std::size_t j : red.constraint_set) {
    std::vector<std::size_t> rows;
    for (std::size_t i : red.fidelity_set)
      if (i >= red.min_index[j]) rows.push_back(i);
    combos *= static_cast<double>(rows.size());
    choices.push_back(std::move(rows));
  }
  if (combos > static_cast<double>(max_candidates))
    throw std::runtime_error(
        "solve_assignment: candidate space exceeds the cap; increase epsilon "
        "or use a coarser fidelity ladder");

  AssignmentSolution best;
  best.matrix = AssignmentMatrix(L, inst.constraints, inst.force_top);
  best.expected_time = std::numeric_limits<double>::infinity();

  AssignmentMatrix current(L, inst.constraints, inst.force_top);
  std::vector<char> active(L, 0);
  if (inst.force_top) active[L - 1] = 1;
  std::vector<std::size_t> row_count(L, 0);
  std::vector<double> row_prod(L, 1.0);

  // Depth-first walk over columns. Row products gain factors in the same
  // ascending column order no_interrupt_prob uses and are restored from
  // saved values on backtrack, never by division, so leaf values match a
  // fresh expected_eval_time call bit for bit.
  const auto recurse = [&](const auto& self, std::size_t depth) -> void {
    if (depth == red.constraint_set.size()) {
      ++best.candidates;
      const double value =
          detail::expected_time_from_rows(inst.t, active, row_prod);
      if (value < best.expected_time) {
        best.expected_time = value;
        best.matrix = current;
      }
      return;
    }
    const std::size_t j = red.constraint_set[depth];
    for (std::size_t i : choices[depth]) {
      const double saved = row_prod[i];
      row_prod[i] = saved * (1.0 - inst.p[i][j]);
      row_count[i] += 1;
      active[i] = 1;
      current.assign(j, i);
      self(self, depth + 1);
      current.clear(j);
      row_count[i] -= 1;
      if (row_count[i] == 0 && !(inst.force_top && i + 1 == L)) active[i] = 0;
      row_prod[i] = saved;
    }
  };
  recurse(recurse, 0);
  return best;
}

struct BruteForceResult {
  double value = 0.0;
  AssignmentMatrix matrix;
  std::size_t candidates = 0;
};

// Reference enumeration over the full unreduced grid: every non-a-priori
// column ranges over ALL rungs at or above its minimal index. Exponential;
// intended for cross-checking the reduced search at desk scale.
inline BruteForceResult brute_force_q1(const AssignmentInstance& inst,
                                       std::size_t max_candidates = 50000000) {
  inst.validate();
  const std::size_t L = inst.levels;
  std::vector<std::size_t> cols;
  std::vector<std::size_t> min_idx;
  double combos = 1.0;
  for (std::size_t j = 0; j < inst.constraints; ++j) {
    if (inst.is_a_priori(j)) continue;
    cols.push_back(j);
    min_idx.push_back(min_assignable_index(inst, j));
    combos *= static_cast<double>(L - min_idx.back());
  }
  if (combos > static_cast<double>(max_candidates))
    throw std::runtime_error("brute_force_q1: instance too large to enumerate");

  BruteForceResult best;
  best.value = std::numeric_limits<double>::infinity();
  best.matrix = AssignmentMatrix(L, inst.constraints, inst.force_top);

  AssignmentMatrix current(L, inst.constraints, inst.force_top);
  std::vector<std::size_t> pos(cols.size());
  for (std::size_t d = 0; d < cols.size(); ++d) {
    pos[d] = min_idx[d];
    current.assign(cols[d], pos[d]);
  }
  while (true) {
    ++best.candidates;
    const double value = expected_eval_time(current, inst);
    if (value < best.value) {
      best.value = value;
      best.matrix = current;
    }
    // odometer increment, least-significant column last for lexicographic order
    std::size_t d = cols.size();
    while (d-- > 0) {
      if (pos[d] + 1 < L) {
        ++pos[d];
        current.assign(cols[d], pos[d]);
        break;
      }
      pos[d] = min_idx[d];
      current.assign(cols[d], pos[d]);
    }
    if (d == static_cast<std::size_t>(-1)) break;
  }
  return best;
}

struct AssumptionReport {
  struct ViolationP {
    std::size_t j, a, b;  // p rises from rung a to rung b in column j
  };
  struct ViolationT {
    std::size_t a, b;  // t falls from rung a to rung b
  };
  std::vector<ViolationP> p_violations;
  std::vector<ViolationT> t_violations;

  bool ok() const { return p_violations.empty() && t_violations.empty(); }
};

// Flags where the reduced-search optimality argument loses its footing:
// violation probabilities must not rise with the rung (from each column's
// minimal index up) and times must not fall.
inline AssumptionReport check_assumptions(const AssignmentInstance& inst) {
  AssumptionReport report;
  for (std::size_t j = 0; j < inst.constraints; ++j) {
    if (inst.is_a_priori(j)) continue;
    const std::size_t lo = min_assignable_index(inst, j);
    for (std::size_t a = lo; a < inst.levels; ++a)
      for (std::size_t b = a + 1; b < inst.levels; ++b)
        if (inst.p[a][j] < inst.p[b][j])
          report.p_violations.push_back({j, a, b});
  }
  for (std::size_t a = 0; a < inst.levels; ++a)
    for (std::size_t b = a + 1; b < inst.levels; ++b)
      if (inst.t[a] > inst.t[b]) report.t_violations.push_back({a, b});
  return report;
}

}  // namespace fidopt
