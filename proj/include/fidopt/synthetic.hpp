#pragma once

#include <cmath>
#include <cstring>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "fidopt/blackbox.hpp"
#include "fidopt/core.hpp"
#include "fidopt/rng.hpp"

namespace fidopt {

// Configurable synthetic multi-fidelity problem with known ground truth.
//
// Constraint j evaluates exactly to `truth` at every fidelity at or above
// `representative_from`; below it, `bias(phi, x)` (and optional noise) is
// added, so low fidelities may misreport the violated/satisfied indicator.
// A priori constraints are explicit formulas: always exact, any fidelity.
struct SyntheticConstraint {
  std::function<double(const TrialPoint&)> truth;
  double representative_from = 0.0;
  std::function<double(double, const TrialPoint&)> bias;
  bool a_priori = false;
};

struct SyntheticSpec {
  std::size_t dimension = 0;
  BoxBounds bounds;
  std::function<double(const TrialPoint&)> objective;
  // Added to the objective below fidelity 1; absent means the objective is
  // fidelity-independent.
  std::function<double(double)> objective_bias;
  std::vector<SyntheticConstraint> constraints;

  // Cost model t(x, phi) = time_min + (time_max - time_min) * phi^time_exponent,
  // x-independent; `time_model` overrides it when an x-dependent cost is wanted.
  double time_min = 0.01;
  double time_max = 1.0;
  double time_exponent = 1.0;
  std::function<double(const TrialPoint&, double)> time_model;

  // Optional hidden-constraint region: evaluations there fail outright.
  std::function<bool(const TrialPoint&, double)> failure;

  // Low-fidelity noise, off by default. Deterministic in (x, phi, seed) and
  // gated the same way as bias, so representativity holds by construction.
  double noise_amplitude = 0.0;
  std::uint64_t noise_seed = 0;
};

namespace detail {

inline std::uint64_t hash_double(std::uint64_t h, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  h ^= bits;
  return splitmix64(h);
}

// Uniform in [-1, 1], deterministic in (seed, tag, x, phi).
inline double synthetic_noise(std::uint64_t seed, std::uint64_t tag,
                              const TrialPoint& x, double phi) {
  std::uint64_t h = seed ^ (0x51ed2701a3c5e1b7ull + tag);
  splitmix64(h);
  for (double xi : x) h = hash_double(h, xi);
  h = hash_double(h, phi);
  return 2.0 * (static_cast<double>(h >> 11) * 0x1.0p-53) - 1.0;
}

}  // namespace detail

inline double synthetic_time(const SyntheticSpec& spec, const TrialPoint& x,
                             double phi) {
  if (spec.time_model) return spec.time_model(x, phi);
  return spec.time_min + (spec.time_max - spec.time_min) * std::pow(phi, spec.time_exponent);
}

// Value of constraint j at (x, phi): the truth plus bias and noise below
// the representative rung. Both the blackbox and the ground-truth oracle
// use this one formula.
inline double synthetic_constraint_value(const SyntheticSpec& spec, std::size_t j,
                                         const TrialPoint& x, double phi) {
  const SyntheticConstraint& cj = spec.constraints[j];
  double v = cj.truth(x);
  if (!cj.a_priori && phi < cj.representative_from) {
    if (cj.bias) v += cj.bias(phi, x);
    if (spec.noise_amplitude > 0.0)
      v += spec.noise_amplitude * detail::synthetic_noise(spec.noise_seed, j + 1, x, phi);
  }
  return v;
}

inline double synthetic_objective_value(const SyntheticSpec& spec,
                                        const TrialPoint& x, double phi) {
  double v = spec.objective(x);
  if (phi < 1.0) {
    if (spec.objective_bias) v += spec.objective_bias(phi);
    if (spec.noise_amplitude > 0.0)
      v += spec.noise_amplitude * detail::synthetic_noise(spec.noise_seed, 0, x, phi);
  }
  return v;
}

class SyntheticBlackbox final : public MultiFidelityBlackbox {
 public:
  explicit SyntheticBlackbox(SyntheticSpec spec) : spec_(std::move(spec)) {
    validate_spec(spec_);
    desc_.dimension = spec_.dimension;
    desc_.bounds = spec_.bounds;
    desc_.constraints.count = spec_.constraints.size();
    for (std::size_t j = 0; j < spec_.constraints.size(); ++j)
      if (spec_.constraints[j].a_priori) desc_.constraints.a_priori.push_back(j);
    desc_.objective_varies_with_fidelity = static_cast<bool>(spec_.objective_bias);
    desc_.validate();
  }

  const BlackboxDescriptor& descriptor() const override { return desc_; }
  const SyntheticSpec& spec() const { return spec_; }

  EvalOutput evaluate(const TrialPoint& x, double phi) const override {
    if (x.size() != spec_.dimension)
      throw std::invalid_argument("SyntheticBlackbox: point dimension mismatch");
    const std::size_t m = spec_.constraints.size();

    EvalOutput out;
    out.fidelity = phi;
    out.c.assign(m, ExtReal::not_computed());

    // A priori constraints come first; a violation aborts the evaluation at
    // screening cost.
    bool apriori_bad = false;
    for (std::size_t j = 0; j < m; ++j) {
      if (!spec_.constraints[j].a_priori) continue;
      double v = spec_.constraints[j].truth(x);
      out.c[j] = ExtReal(v);
      if (v > 0.0) apriori_bad = true;
    }
    if (apriori_bad) {
      out.apriori_violated = true;
      out.time = synthetic_time(spec_, x, 0.0);
      return out;
    }
    if (phi == 0.0) {
      out.time = synthetic_time(spec_, x, 0.0);
      return out;
    }

    if (spec_.failure && spec_.failure(x, phi)) {
      // The underlying solve crashed: all computed outputs turn infinite.
      // A priori values are formulas known outside the solve and stay exact.
      out.f = ExtReal::infinity();
      for (std::size_t j = 0; j < m; ++j)
        if (!spec_.constraints[j].a_priori) out.c[j] = ExtReal::infinity();
      out.failed = true;
      out.time = synthetic_time(spec_, x, phi);
      return out;
    }

    for (std::size_t j = 0; j < m; ++j)
      if (!spec_.constraints[j].a_priori)
        out.c[j] = ExtReal(synthetic_constraint_value(spec_, j, x, phi));
    out.f = ExtReal(synthetic_objective_value(spec_, x, phi));
    out.time = synthetic_time(spec_, x, phi);
    return out;
  }

 private:
  static void validate_spec(const SyntheticSpec& spec) {
    if (spec.dimension == 0)
      throw std::invalid_argument("SyntheticSpec: dimension must be >= 1");
    spec.bounds.validate();
    if (spec.bounds.dimension() != spec.dimension)
      throw std::invalid_argument("SyntheticSpec: bounds dimension mismatch");
    if (!spec.objective)
      throw std::invalid_argument("SyntheticSpec: objective missing");
    for (const SyntheticConstraint& cj : spec.constraints) {
      if (!cj.truth)
        throw std::invalid_argument("SyntheticSpec: constraint truth missing");
      if (cj.a_priori && cj.bias)
        throw std::invalid_argument("SyntheticSpec: a priori constraints take no bias");
      if (cj.representative_from < 0.0 || cj.representative_from > 1.0)
        throw std::invalid_argument("SyntheticSpec: representative_from outside [0,1]");
    }
    if (spec.time_min < 0.0 || spec.time_max < spec.time_min)
      throw std::invalid_argument("SyntheticSpec: need 0 <= time_min <= time_max");
    if (!spec.time_model && spec.time_exponent < 1.0)
      throw std::invalid_argument("SyntheticSpec: time_exponent must be >= 1");
    if (spec.time_model) {
      // Custom cost hooks must still be monotone increasing in phi.
      std::vector<TrialPoint> probes;
      TrialPoint mid(spec.dimension), lo(spec.dimension), hi(spec.dimension);
      for (std::size_t i = 0; i < spec.dimension; ++i) {
        lo[i] = spec.bounds.lower[i];
        hi[i] = spec.bounds.upper[i];
        mid[i] = 0.5 * (lo[i] + hi[i]);
      }
      probes = {lo, mid, hi};
      for (const TrialPoint& x : probes) {
        double prev = spec.time_model(x, 0.0);
        if (prev < 0.0)
          throw std::invalid_argument("SyntheticSpec: negative evaluation time");
        for (int k = 1; k <= 64; ++k) {
          double t = spec.time_model(x, k / 64.0);
          if (t < prev)
            throw std::invalid_argument("SyntheticSpec: cost model not monotone in phi");
          prev = t;
        }
      }
    }
  }

  SyntheticSpec spec_;
  BlackboxDescriptor desc_;
};

inline std::unique_ptr<MultiFidelityBlackbox> make_synthetic(SyntheticSpec spec) {
  return std::make_unique<SyntheticBlackbox>(std::move(spec));
}

// Ground truth r/p/t tables for a synthetic spec over a region, by dense
// cell-centered grid sweep restricted to the a-priori-feasible set. Rows are
// ladder indexes, columns constraints. Falls back to a Halton set when the
// full grid would exceed `max_points`.
struct GroundTruthStats {
  std::vector<std::vector<double>> r;  // L x m
  std::vector<std::vector<double>> p;  // L x m
  std::vector<double> t;               // L
  std::size_t points_used = 0;
};

namespace detail {

inline double halton(std::size_t index, unsigned base) {
  double f = 1.0, r = 0.0;
  std::size_t i = index;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

constexpr unsigned kSmallPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                     31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
                                     73, 79, 83, 89, 97, 101, 103, 107, 109, 113};

}  // namespace detail

inline GroundTruthStats true_stats(const SyntheticSpec& spec,
                                   const FidelityLadder& ladder,
                                   const BoxBounds& region, std::size_t grid_density,
                                   std::size_t max_points = 4000000) {
  if (grid_density < 2)
    throw std::invalid_argument("true_stats: grid_density must be >= 2");
  region.validate();
  if (region.dimension() != spec.dimension)
    throw std::invalid_argument("true_stats: region dimension mismatch");
  if (spec.dimension > sizeof(detail::kSmallPrimes) / sizeof(unsigned))
    throw std::invalid_argument("true_stats: dimension too large");

  const std::size_t n = spec.dimension;
  const std::size_t L = ladder.size();
  const std::size_t m = spec.constraints.size();

  double grid_total = 1.0;
  for (std::size_t i = 0; i < n; ++i) grid_total *= static_cast<double>(grid_density);
  const bool use_grid = grid_total <= static_cast<double>(max_points);
  const std::size_t total =
      use_grid ? static_cast<std::size_t>(grid_total) : max_points;

  GroundTruthStats out;
  out.r.assign(L, std::vector<double>(m, 0.0));
  out.p.assign(L, std::vector<double>(m, 0.0));
  out.t.assign(L, 0.0);

  TrialPoint x(n);
  std::vector<int> ind(L);  // -1 not computed, else 0/1
  std::size_t used = 0;

  for (std::size_t idx = 0; idx < total; ++idx) {
    if (use_grid) {
      std::size_t rem = idx;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t k = rem % grid_density;
        rem /= grid_density;
        x[i] = region.lower[i] + (static_cast<double>(k) + 0.5) *
                                     (region.upper[i] - region.lower[i]) /
                                     static_cast<double>(grid_density);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i)
        x[i] = region.lower[i] + detail::halton(idx + 1, detail::kSmallPrimes[i]) *
                                     (region.upper[i] - region.lower[i]);
    }

    bool apriori_bad = false;
    for (std::size_t j = 0; j < m && !apriori_bad; ++j)
      if (spec.constraints[j].a_priori && spec.constraints[j].truth(x) > 0.0)
        apriori_bad = true;
    if (apriori_bad) continue;
    ++used;

    for (std::size_t i = 0; i < L; ++i) out.t[i] += synthetic_time(spec, x, ladder[i]);

    for (std::size_t j = 0; j < m; ++j) {
      const bool ap = spec.constraints[j].a_priori;
      for (std::size_t i = 0; i < L; ++i) {
        double phi = ladder[i];
        if (phi == 0.0 && !ap) {
          ind[i] = -1;
          continue;
        }
        if (!ap && spec.failure && spec.failure(x, phi)) {
          ind[i] = 1;  // failed evaluations report infinite outputs
          continue;
        }
        ind[i] = synthetic_constraint_value(spec, j, x, phi) > 0.0 ? 1 : 0;
      }
      const int truth_ind = ind[L - 1];
      bool suffix_ok = true;
      for (std::size_t ii = L; ii-- > 0;) {
        if (ind[ii] != truth_ind) suffix_ok = false;
        if (suffix_ok) out.r[ii][j] += 1.0;
        if (ind[ii] == 1) out.p[ii][j] += 1.0;
      }
    }
  }

  if (used == 0)
    throw std::runtime_error("true_stats: no a-priori-feasible points in region");

  const double inv = 1.0 / static_cast<double>(used);
  for (std::size_t i = 0; i < L; ++i) {
    out.t[i] *= inv;
    for (std::size_t j = 0; j < m; ++j) {
      out.r[i][j] *= inv;
      out.p[i][j] *= inv;
    }
  }
  out.points_used = used;
  return out;
}

}  // namespace fidopt
