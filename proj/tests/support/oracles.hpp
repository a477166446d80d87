#pragma once

// Shared test helpers: an independent Monte-Carlo oracle for the expected
// walk time, a stochastic blackbox driving the real controller, and random
// instance generators that honor the monotonicity assumptions.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "fidopt/assignment.hpp"
#include "fidopt/blackbox.hpp"
#include "fidopt/core.hpp"
#include "fidopt/rng.hpp"

namespace testsupport {

using namespace fidopt;

// One simulated ladder walk: charge t_i for every active row in ascending
// order; each constraint trips independently at its assigned row with its
// violation probability, and the first trip ends the walk.
inline double simulate_walk_time(const AssignmentMatrix& B,
                                 const std::vector<std::vector<double>>& p,
                                 const std::vector<double>& t, RngEngine& rng) {
  double total = 0.0;
  for (std::size_t i : B.active_rows()) {
    total += t[i];
    bool tripped = false;
    for (std::size_t j = 0; j < B.columns(); ++j)
      if (B.assigned_row(j) == static_cast<std::ptrdiff_t>(i) &&
          uniform01(rng) < p[i][j])
        tripped = true;
    if (tripped) break;
  }
  return total;
}

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

inline McEstimate mc_walk_time(const AssignmentMatrix& B,
                               const std::vector<std::vector<double>>& p,
                               const std::vector<double>& t, std::size_t trials,
                               RngEngine& rng) {
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t k = 0; k < trials; ++k) {
    const double v = simulate_walk_time(B, p, t, rng);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(trials);
  McEstimate e;
  e.mean = sum / n;
  const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
  e.std_error = std::sqrt(var / n);
  return e;
}

// Stochastic blackbox for exercising the real controller walk: constraint j
// reports a violation only at its assigned rung, with probability p[i][j],
// so each full evaluation is one independent realization of the walk.
class BernoulliBlackbox final : public MultiFidelityBlackbox {
 public:
  BernoulliBlackbox(const AssignmentMatrix& B, FidelityLadder ladder,
                    std::vector<std::vector<double>> p, std::vector<double> t,
                    std::uint64_t seed)
      : matrix_(B), ladder_(std::move(ladder)), p_(std::move(p)),
        t_(std::move(t)), rng_(derive_seed(seed, 0xbe7001)) {
    desc_.dimension = 1;
    desc_.bounds = BoxBounds{{0.0}, {1.0}};
    desc_.constraints.count = matrix_.columns();
    desc_.validate();
  }

  const BlackboxDescriptor& descriptor() const override { return desc_; }

  EvalOutput evaluate(const TrialPoint&, double phi) const override {
    std::size_t level = ladder_.size();
    for (std::size_t i = 0; i < ladder_.size(); ++i)
      if (ladder_[i] == phi) level = i;
    EvalOutput out;
    out.fidelity = phi;
    out.time = t_[level];
    out.f = ExtReal(0.0);
    out.c.assign(matrix_.columns(), ExtReal(-1.0));
    for (std::size_t j = 0; j < matrix_.columns(); ++j)
      if (matrix_.assigned_row(j) == static_cast<std::ptrdiff_t>(level) &&
          uniform01(rng_) < p_[level][j])
        out.c[j] = ExtReal(1.0);
    return out;
  }

 private:
  AssignmentMatrix matrix_;
  FidelityLadder ladder_;
  std::vector<std::vector<double>> p_;
  std::vector<double> t_;
  mutable RngEngine rng_;
  BlackboxDescriptor desc_;
};

// Random instance with nondecreasing r columns ending at 1, violation
// probabilities nonincreasing from i(j) up, and nondecreasing times.
inline AssignmentInstance random_instance(RngEngine& rng, std::size_t levels,
                                          std::size_t constraints, double epsilon,
                                          bool with_apriori) {
  AssignmentInstance inst;
  inst.levels = levels;
  inst.constraints = constraints;
  inst.epsilon = epsilon;

  inst.t.resize(levels);
  for (double& v : inst.t) v = uniform_range(rng, 0.01, 10.0);
  std::sort(inst.t.begin(), inst.t.end());

  inst.r.assign(levels, std::vector<double>(constraints, 0.0));
  inst.p.assign(levels, std::vector<double>(constraints, 0.0));

  for (std::size_t j = 0; j < constraints; ++j) {
    if (with_apriori && uniform_below(rng, 5) == 0)
      inst.a_priori.push_back(j);

    std::vector<double> col(levels);
    for (double& v : col) v = uniform01(rng);
    std::sort(col.begin(), col.end());
    col[levels - 1] = 1.0;
    for (std::size_t i = 0; i < levels; ++i) inst.r[i][j] = col[i];

    std::size_t ij = levels - 1;
    for (std::size_t i = 0; i < levels; ++i)
      if (inst.r[i][j] >= 1.0 - epsilon) {
        ij = i;
        break;
      }
    std::vector<double> tail(levels - ij);
    for (double& v : tail) v = uniform01(rng);
    std::sort(tail.begin(), tail.end(), std::greater<double>());
    for (std::size_t i = 0; i < ij; ++i) inst.p[i][j] = uniform01(rng);
    for (std::size_t i = ij; i < levels; ++i) inst.p[i][j] = tail[i - ij];
  }
  inst.validate();
  return inst;
}

// Random feasible assignment: each filtered column to a uniform row at or
// above its minimum assignable index.
inline AssignmentMatrix random_feasible_matrix(const AssignmentInstance& inst,
                                               RngEngine& rng) {
  AssignmentMatrix B(inst.levels, inst.constraints, inst.force_top);
  for (std::size_t j = 0; j < inst.constraints; ++j) {
    if (inst.is_a_priori(j)) continue;
    const std::size_t ij = min_assignable_index(inst, j);
    B.assign(j, ij + uniform_below(rng, inst.levels - ij));
  }
  return B;
}

}  // namespace testsupport
