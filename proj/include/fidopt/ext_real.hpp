#pragma once

#include <cmath>
#include <limits>

namespace fidopt {

// Extended real value: a finite double, +infinity, or a "not computed"
// sentinel for blackbox outputs that a sub-evaluation did not produce
// (e.g. non-a-priori constraints at fidelity 0).
//
// Computed values are totally ordered with +inf greater than every finite
// value; addition and max absorb +inf. The not-computed sentinel takes part
// in no ordering and no arithmetic; callers check computed() before use.
class ExtReal {
 public:
  constexpr ExtReal() : v_(0.0) {}
  constexpr ExtReal(double v) : v_(v) {}  // NOLINT: implicit by design

  static constexpr ExtReal infinity() {
    return ExtReal(std::numeric_limits<double>::infinity());
  }
  static constexpr ExtReal not_computed() {
    return ExtReal(std::numeric_limits<double>::quiet_NaN());
  }

  constexpr double value() const { return v_; }
  bool computed() const { return !std::isnan(v_); }
  bool finite() const { return std::isfinite(v_); }
  bool infinite() const { return std::isinf(v_) && v_ > 0.0; }

  friend constexpr bool operator<(ExtReal a, ExtReal b) { return a.v_ < b.v_; }
  friend constexpr bool operator>(ExtReal a, ExtReal b) { return a.v_ > b.v_; }
  friend constexpr bool operator<=(ExtReal a, ExtReal b) { return a.v_ <= b.v_; }
  friend constexpr bool operator>=(ExtReal a, ExtReal b) { return a.v_ >= b.v_; }
  friend constexpr bool operator==(ExtReal a, ExtReal b) { return a.v_ == b.v_; }
  friend constexpr bool operator!=(ExtReal a, ExtReal b) { return a.v_ != b.v_; }

  friend constexpr ExtReal operator+(ExtReal a, ExtReal b) {
    return ExtReal(a.v_ + b.v_);
  }

 private:
  double v_;
};

inline ExtReal ext_min(ExtReal a, ExtReal b) { return a < b ? a : b; }
inline ExtReal ext_max(ExtReal a, ExtReal b) { return a < b ? b : a; }

}  // namespace fidopt
