#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fidopt/ext_real.hpp"

namespace fidopt {

// A trial point is a plain coordinate vector of the problem dimension.
using TrialPoint = std::vector<double>;

// Box X = [lower, upper] of unrelaxable bound constraints.
struct BoxBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dimension() const { return lower.size(); }

  void validate() const {
    if (lower.size() != upper.size())
      throw std::invalid_argument("BoxBounds: lower/upper length mismatch");
    for (std::size_t i = 0; i < lower.size(); ++i)
      if (!(lower[i] <= upper[i]))
        throw std::invalid_argument("BoxBounds: lower[" + std::to_string(i) +
                                    "] > upper[" + std::to_string(i) + "]");
  }

  bool contains(const TrialPoint& x) const {
    if (x.size() != lower.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] < lower[i] || x[i] > upper[i]) return false;
    return true;
  }

  TrialPoint clamp(TrialPoint x) const {
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = std::min(std::max(x[i], lower[i]), upper[i]);
    return x;
  }
};

// The ordered fidelity set: values in [0,1], strictly increasing, topped by
// an exact 1. Index L-1 is the true blackbox.
class FidelityLadder {
 public:
  FidelityLadder() = default;
  explicit FidelityLadder(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty())
      throw std::invalid_argument("FidelityLadder: empty");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (values_[i] < 0.0 || values_[i] > 1.0)
        throw std::invalid_argument("FidelityLadder: value outside [0,1]");
      if (i > 0 && !(values_[i - 1] < values_[i]))
        throw std::invalid_argument("FidelityLadder: values not strictly increasing");
    }
    if (values_.back() != 1.0)
      throw std::invalid_argument("FidelityLadder: last value must be exactly 1");
  }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::size_t top_index() const { return values_.size() - 1; }
  bool has_zero() const { return values_.front() == 0.0; }

 private:
  std::vector<double> values_;
};

// Constraint layout: total count m and which indexes are a priori, i.e.
// checkable from an explicit formula without running the expensive model.
struct ConstraintMeta {
  std::size_t count = 0;
  std::vector<std::size_t> a_priori;  // sorted, unique, each < count

  void validate() const {
    std::size_t prev = 0;
    bool first = true;
    for (std::size_t j : a_priori) {
      if (j >= count)
        throw std::invalid_argument("ConstraintMeta: a priori index out of range");
      if (!first && j <= prev)
        throw std::invalid_argument("ConstraintMeta: a priori indexes not sorted unique");
      prev = j;
      first = false;
    }
  }

  bool is_a_priori(std::size_t j) const {
    return std::binary_search(a_priori.begin(), a_priori.end(), j);
  }
};

// One blackbox sub-evaluation. `time` is model seconds t(x, phi). When the
// blackbox aborts on a violated a priori constraint, the remaining outputs
// are not-computed sentinels and `apriori_violated` is set. A hard failure
// (hidden constraint) yields all-infinity outputs with `failed` set.
struct EvalOutput {
  ExtReal f = ExtReal::not_computed();
  std::vector<ExtReal> c;
  double fidelity = 1.0;
  double time = 0.0;
  bool apriori_violated = false;
  bool failed = false;
};

// Constraint violation h: sum of squared positive parts, infinity outside X
// or on a hidden-constraint (+inf) output. Not-computed entries contribute
// nothing; they can only occur alongside a violated a priori constraint.
inline ExtReal violation_h(std::span<const ExtReal> c, bool in_x) {
  if (!in_x) return ExtReal::infinity();
  double sum = 0.0;
  for (ExtReal cj : c) {
    if (!cj.computed()) continue;
    if (cj.infinite()) return ExtReal::infinity();
    double over = std::max(cj.value(), 0.0);
    sum += over * over;
  }
  return ExtReal(sum);
}

inline ExtReal violation_h(const std::vector<ExtReal>& c, bool in_x = true) {
  return violation_h(std::span<const ExtReal>(c.data(), c.size()), in_x);
}

// Feasible iff every constraint value is computed and <= 0, exactly.
inline bool is_feasible(std::span<const ExtReal> c) {
  for (ExtReal cj : c) {
    if (!cj.computed()) return false;
    if (!(cj <= ExtReal(0.0))) return false;
  }
  return true;
}

inline bool is_feasible(const std::vector<ExtReal>& c) {
  return is_feasible(std::span<const ExtReal>(c.data(), c.size()));
}

}  // namespace fidopt
