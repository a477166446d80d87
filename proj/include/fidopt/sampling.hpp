#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fidopt/blackbox.hpp"
#include "fidopt/core.hpp"
#include "fidopt/rng.hpp"

namespace fidopt {

struct LHConfig {
  std::size_t n_h = 10000;
  double rho = 0.25;
  std::uint64_t seed = 1;
  // Parallelism model for the sampling phase; affects only the time offset.
  std::size_t workers = 1;

  void validate() const {
    if (n_h == 0) throw std::invalid_argument("LHConfig: n_h must be >= 1");
    if (rho < 0.0 || rho > 1.0)
      throw std::invalid_argument("LHConfig: rho outside [0,1]");
    if (workers == 0) throw std::invalid_argument("LHConfig: workers must be >= 1");
  }
};

// Sampling box shrunk around x0: per coordinate, [max(l, x0 - rho*(u-l)),
// min(u, x0 + rho*(u-l))]. Always nonempty and nested in the original box;
// rho = 1 returns the box itself, rho = 0 collapses onto x0.
inline BoxBounds centered_bounds(const TrialPoint& x0, const BoxBounds& bounds,
                                 double rho) {
  bounds.validate();
  if (rho < 0.0 || rho > 1.0)
    throw std::invalid_argument("centered_bounds: rho outside [0,1]");
  if (!bounds.contains(x0))
    throw std::invalid_argument("centered_bounds: x0 outside the box");
  if (rho == 1.0) return bounds;
  BoxBounds out;
  const std::size_t n = bounds.dimension();
  out.lower.resize(n);
  out.upper.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = rho * (bounds.upper[i] - bounds.lower[i]);
    out.lower[i] = std::max(bounds.lower[i], x0[i] - w);
    out.upper[i] = std::min(bounds.upper[i], x0[i] + w);
  }
  return out;
}

// Classic Latin hypercube: per coordinate, one point in each of n_h
// equal-width strata, stratum-to-point pairing a seeded permutation,
// position uniform within the stratum. No design optimization.
inline std::vector<TrialPoint> latin_hypercube(const BoxBounds& bounds,
                                               std::size_t n_h, std::uint64_t seed) {
  bounds.validate();
  if (n_h == 0) throw std::invalid_argument("latin_hypercube: n_h must be >= 1");
  const std::size_t n = bounds.dimension();
  std::vector<TrialPoint> points(n_h, TrialPoint(n));
  RngEngine rng(derive_seed(seed, 0x4c4853));
  const double inv = 1.0 / static_cast<double>(n_h);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> perm = random_permutation(n_h, rng);
    const double width = bounds.upper[i] - bounds.lower[i];
    for (std::size_t k = 0; k < n_h; ++k) {
      const double u = uniform01(rng);
      points[k][i] =
          bounds.lower[i] + (static_cast<double>(perm[k]) + u) * inv * width;
    }
  }
  return points;
}

// A Latin hypercube sample evaluated across a whole fidelity ladder.
// Retained points (a-priori feasible) carry one output per rung; points
// rejected by the a priori screen carry only the single screening output.
struct SampleSet {
  BoxBounds region;
  FidelityLadder ladder;
  std::vector<TrialPoint> points;
  std::vector<std::vector<EvalOutput>> outputs;
  std::vector<char> retained;  // 1 iff the point passed the a priori screen

  std::size_t size() const { return points.size(); }

  std::size_t retained_count() const {
    std::size_t n = 0;
    for (char r : retained) n += (r != 0);
    return n;
  }

  // Multiset sum of every recorded sub-evaluation time. Summed in sorted
  // order so the value does not depend on the ordering of the points.
  double total_time() const {
    std::vector<double> times;
    for (const std::vector<EvalOutput>& row : outputs)
      for (const EvalOutput& out : row) times.push_back(out.time);
    std::sort(times.begin(), times.end());
    double sum = 0.0;
    for (double t : times) sum += t;
    return sum;
  }
};

// Evaluates each point at every rung of the ladder, in ascending fidelity
// order. The first sub-evaluation doubles as the a priori screen: when it
// comes back apriori_violated the point is recorded with that single output
// and skipped at the remaining rungs.
inline SampleSet evaluate_sample(const MultiFidelityBlackbox& bb,
                                 const FidelityLadder& ladder,
                                 std::vector<TrialPoint> points, BoxBounds region) {
  SampleSet set;
  set.region = std::move(region);
  set.ladder = ladder;
  set.points = std::move(points);
  set.outputs.resize(set.points.size());
  set.retained.assign(set.points.size(), 1);
  const std::size_t L = ladder.size();
  for (std::size_t k = 0; k < set.points.size(); ++k) {
    for (std::size_t i = 0; i < L; ++i) {
      EvalOutput out = bb.evaluate(set.points[k], ladder[i]);
      const bool bad = out.apriori_violated;
      set.outputs[k].push_back(std::move(out));
      if (bad) {
        set.retained[k] = 0;
        break;
      }
    }
  }
  return set;
}

struct FeasibilityStats {
  std::size_t levels = 0;
  std::size_t constraints = 0;
  std::vector<std::vector<double>> r;  // L x m, fraction representative
  std::vector<std::vector<double>> p;  // L x m, fraction violated
  std::vector<double> t;               // L, mean sub-evaluation time
  std::size_t sample_count = 0;
  std::size_t apriori_pass_count = 0;
};

// The r/p/t estimators over the retained (a-priori feasible) points.
//
// A constraint's indicator at a rung where its value was not computed
// (non-a-priori constraints at fidelity 0) never matches the truth
// indicator, so such rungs contribute neither representativity nor
// violations. Representativity at rung i requires the indicator to match
// the top-rung indicator at every rung >= i.
inline FeasibilityStats estimate_stats(const SampleSet& samples,
                                       const ConstraintMeta& meta) {
  const std::size_t L = samples.ladder.size();
  const std::size_t m = meta.count;
  FeasibilityStats stats;
  stats.levels = L;
  stats.constraints = m;
  stats.r.assign(L, std::vector<double>(m, 0.0));
  stats.p.assign(L, std::vector<double>(m, 0.0));
  stats.t.assign(L, 0.0);
  stats.sample_count = samples.size();

  std::vector<std::vector<double>> times(L);
  std::vector<int> ind(L);
  std::size_t used = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (!samples.retained[k]) continue;
    const std::vector<EvalOutput>& row = samples.outputs[k];
    if (row.size() != L)
      throw std::invalid_argument("estimate_stats: retained point missing rungs");
    ++used;
    for (std::size_t i = 0; i < L; ++i) times[i].push_back(row[i].time);
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < L; ++i) {
        const ExtReal cj = row[i].c[j];
        ind[i] = !cj.computed() ? -1 : (cj > ExtReal(0.0) ? 1 : 0);
      }
      const int truth = ind[L - 1];
      bool suffix_ok = true;
      for (std::size_t i = L; i-- > 0;) {
        if (ind[i] != truth) suffix_ok = false;
        if (suffix_ok) stats.r[i][j] += 1.0;
        if (ind[i] == 1) stats.p[i][j] += 1.0;
      }
    }
  }
  stats.apriori_pass_count = used;
  if (used == 0)
    throw std::runtime_error(
        "estimate_stats: no sample point passes the a priori constraints; "
        "increase rho or n_h");

  const double inv = 1.0 / static_cast<double>(used);
  for (std::size_t i = 0; i < L; ++i) {
    // Sorted summation keeps the mean independent of sample order.
    std::sort(times[i].begin(), times[i].end());
    double sum = 0.0;
    for (double v : times[i]) sum += v;
    stats.t[i] = sum * inv;
    for (std::size_t j = 0; j < m; ++j) {
      stats.r[i][j] *= inv;
      stats.p[i][j] *= inv;
    }
  }
  return stats;
}

// Wall-clock model of the sampling phase: total evaluation time split
// evenly across parallel workers.
inline double lh_time_offset(const SampleSet& samples, std::size_t workers) {
  if (workers == 0) throw std::invalid_argument("lh_time_offset: workers must be >= 1");
  return samples.total_time() / static_cast<double>(workers);
}

// Index of the best retained point judged on top-rung outputs: feasible
// points first (lowest f), then lowest violation h, ties by lowest f.
inline std::size_t best_sample_index(const SampleSet& samples) {
  const std::size_t L = samples.ladder.size();
  std::size_t best = samples.size();
  ExtReal best_h = ExtReal::infinity();
  ExtReal best_f = ExtReal::infinity();
  bool have = false;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (!samples.retained[k]) continue;
    const EvalOutput& top = samples.outputs[k][L - 1];
    const ExtReal h = violation_h(top.c);
    const ExtReal f = top.f.computed() ? top.f : ExtReal::infinity();
    const bool better =
        !have || h < best_h || (h == best_h && f < best_f);
    if (better) {
      best = k;
      best_h = h;
      best_f = f;
      have = true;
    }
  }
  if (!have)
    throw std::runtime_error(
        "best_sample_index: no sample point passes the a priori constraints; "
        "increase rho or n_h");
  return best;
}

}  // namespace fidopt
