#pragma once

#include <cassert>
#include <cstddef>

#include "fidopt/core.hpp"

namespace fidopt {

struct BlackboxDescriptor {
  std::size_t dimension = 0;
  BoxBounds bounds;
  ConstraintMeta constraints;
  bool objective_varies_with_fidelity = false;

  void validate() const {
    if (dimension == 0)
      throw std::invalid_argument("BlackboxDescriptor: dimension must be >= 1");
    bounds.validate();
    if (bounds.dimension() != dimension)
      throw std::invalid_argument("BlackboxDescriptor: bounds dimension mismatch");
    constraints.validate();
  }
};

// The multi-fidelity blackbox contract.
//
// evaluate(x, phi) returns objective, constraints and model time at one
// fidelity. Implementations check a priori constraints first and return
// immediately (apriori_violated set, other outputs suppressed) when one is
// violated, at any fidelity. At phi = 0 only a priori constraints are
// computed. Instances must be safe for concurrent evaluate() calls.
class MultiFidelityBlackbox {
 public:
  virtual ~MultiFidelityBlackbox() = default;

  virtual const BlackboxDescriptor& descriptor() const = 0;
  virtual EvalOutput evaluate(const TrialPoint& x, double fidelity) const = 0;
};

// Model-time accumulator for one optimization run. Advances only by the
// time fields of the evaluations charged to it; single writer per run.
class VirtualClock {
 public:
  double elapsed() const { return elapsed_; }

  void charge(double seconds) {
    if (seconds < 0.0)
      throw std::invalid_argument("VirtualClock: negative charge");
    elapsed_ += seconds;
  }

  void charge(const EvalOutput& out) { charge(out.time); }

 private:
  double elapsed_ = 0.0;
};

}  // namespace fidopt
