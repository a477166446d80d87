#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fidopt/core.hpp"
#include "fidopt/synthetic.hpp"

namespace fidopt {

// A ready-to-run benchmark: synthetic spec plus the ladder and sampling
// defaults a run would otherwise have to configure by hand.
struct NamedProblem {
  std::string name;
  std::string summary;
  SyntheticSpec spec;
  FidelityLadder ladder{{1.0}};
  double rho = 0.25;
  std::optional<TrialPoint> x0;  // known feasible start when available
  bool force_top = false;
};

namespace detail {

// The ladder used by the larger benchmarks: a screening rung, a near-zero
// rung, a dyadic ramp, then tenths up to 1.
inline FidelityLadder bench_ladder() {
  std::vector<double> phi{0.0, 1e-10};
  for (int k = 10; k >= 4; --k) phi.push_back(std::pow(2.0, -k));
  for (int d = 1; d <= 9; ++d) phi.push_back(d / 10.0);
  phi.push_back(1.0);
  return FidelityLadder(phi);
}

inline NamedProblem make_gate() {
  NamedProblem p;
  p.name = "gate";
  p.summary =
      "2D, one disk constraint covering under 5% of the box, exact at every "
      "fidelity; the cheap rung costs about 2% of a full evaluation";
  SyntheticSpec s;
  s.dimension = 2;
  s.bounds = BoxBounds{{0.0, 0.0}, {1.0, 1.0}};
  s.objective = [](const TrialPoint& x) { return x[0] + x[1]; };
  SyntheticConstraint disk;
  disk.truth = [](const TrialPoint& x) {
    const double dx = x[0] - 0.15, dy = x[1] - 0.15;
    return dx * dx + dy * dy - 0.0144;
  };
  disk.representative_from = 0.0;
  s.constraints = {disk};
  s.time_min = 0.01;
  s.time_max = 1.0;
  s.time_exponent = 2.0;
  p.spec = std::move(s);
  p.ladder = FidelityLadder({0.1, 1.0});
  p.x0 = TrialPoint{0.15, 0.15};
  return p;
}

inline NamedProblem make_mirage() {
  NamedProblem p;
  p.name = "mirage";
  p.summary =
      "2D, two linear constraints whose low-fidelity values are so distorted "
      "that no rung below 1 is representative";
  SyntheticSpec s;
  s.dimension = 2;
  s.bounds = BoxBounds{{0.0, 0.0}, {1.0, 1.0}};
  s.objective = [](const TrialPoint& x) { return x[0] + x[1]; };
  s.objective_bias = [](double phi) { return 0.5 * (1.0 - phi); };
  SyntheticConstraint c0;
  c0.truth = [](const TrialPoint& x) { return x[0] - 0.55; };
  c0.representative_from = 1.0;
  c0.bias = [](double phi, const TrialPoint& x) {
    return 0.9 * std::cos(7.0 * x[0] + 13.0 * x[1]) * (1.0 - phi);
  };
  SyntheticConstraint c1;
  c1.truth = [](const TrialPoint& x) { return x[1] - 0.6; };
  c1.representative_from = 1.0;
  c1.bias = [](double phi, const TrialPoint& x) {
    return 0.95 * std::sin(9.0 * x[0] - 11.0 * x[1]) * (1.0 - phi);
  };
  s.constraints = {c0, c1};
  s.time_min = 0.05;
  s.time_max = 1.0;
  s.time_exponent = 1.0;
  p.spec = std::move(s);
  p.ladder = FidelityLadder({0.25, 0.5, 1.0});
  p.x0 = TrialPoint{0.9, 0.9};
  return p;
}

inline NamedProblem make_checker() {
  NamedProblem p;
  p.name = "checker";
  p.summary =
      "2D, mixed constraint kinds (one a priori, one exact, two becoming "
      "representative at 0.5 and 0.75) on a five-rung ladder with screening";
  SyntheticSpec s;
  s.dimension = 2;
  s.bounds = BoxBounds{{0.0, 0.0}, {1.0, 1.0}};
  s.objective = [](const TrialPoint& x) {
    const double dx = x[0] - 0.6, dy = x[1] - 0.3;
    return dx * dx + dy * dy;
  };
  SyntheticConstraint waves;
  waves.truth = [](const TrialPoint& x) {
    const double w = 3.0 * std::numbers::pi;
    return std::sin(w * x[0]) * std::sin(w * x[1]) - 0.2;
  };
  waves.representative_from = 0.5;
  waves.bias = [](double phi, const TrialPoint& x) {
    return 0.35 * std::cos(5.0 * x[0] + 9.0 * x[1]) * (1.0 - phi / 0.5);
  };
  SyntheticConstraint ring;
  ring.truth = [](const TrialPoint& x) {
    return x[0] * x[0] + x[1] * x[1] - 0.8;
  };
  ring.representative_from = 0.75;
  ring.bias = [](double phi, const TrialPoint& x) {
    return 0.3 * std::sin(11.0 * x[0] - 6.0 * x[1] + 1.0) * (1.0 - phi / 0.75);
  };
  SyntheticConstraint wall;
  wall.truth = [](const TrialPoint& x) { return 0.3 - x[0]; };
  wall.representative_from = 0.0;
  SyntheticConstraint cap;
  cap.truth = [](const TrialPoint& x) { return x[1] - 0.95; };
  cap.a_priori = true;
  s.constraints = {waves, ring, wall, cap};
  s.time_min = 0.02;
  s.time_max = 1.0;
  s.time_exponent = 1.5;
  p.spec = std::move(s);
  p.ladder = FidelityLadder({0.0, 0.25, 0.5, 0.75, 1.0});
  p.x0 = TrialPoint{0.65, 0.1};
  return p;
}

inline NamedProblem make_plant() {
  NamedProblem p;
  p.name = "plant";
  p.summary =
      "14D,13 constraints (5 a priori, 4 fidelity-sensitive, 4 exact) on the "
      "full benchmark ladder; shaped like an industrial sizing problem";
  SyntheticSpec s;
  s.dimension = 14;
  s.bounds = BoxBounds{TrialPoint(14, 0.0), TrialPoint(14, 1.0)};
  s.objective = [](const TrialPoint& x) {
    double v = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double a = 0.25 + 0.04 * static_cast<double>(i);
      v += (x[i] - a) * (x[i] - a);
    }
    return v;
  };

  std::vector<SyntheticConstraint> cs(13);
  cs[0].truth = [](const TrialPoint& x) { return x[0] + x[1] - 1.8; };
  cs[1].truth = [](const TrialPoint& x) { return 0.05 - x[2]; };
  cs[2].truth = [](const TrialPoint& x) { return x[3] - 0.95; };
  cs[3].truth = [](const TrialPoint& x) { return 0.1 - x[4]; };
  cs[4].truth = [](const TrialPoint& x) { return x[5] + x[6] - 1.9; };
  for (int j = 0; j < 5; ++j) cs[j].a_priori = true;

  cs[5].truth = [](const TrialPoint& x) {
    return x[0] * x[0] + x[1] * x[1] - 1.5;
  };
  cs[5].representative_from = 0.1;
  cs[5].bias = [](double phi, const TrialPoint& x) {
    return 0.3 * std::cos(4.0 * x[0] + 6.0 * x[2]) * (1.0 - phi / 0.1);
  };
  cs[6].truth = [](const TrialPoint& x) {
    return std::sin(2.0 * x[2]) + x[3] - 1.6;
  };
  cs[6].representative_from = 0.2;
  cs[6].bias = [](double phi, const TrialPoint& x) {
    return 0.4 * std::sin(5.0 * x[3] - 3.0 * x[6]) * (1.0 - phi / 0.2);
  };
  cs[7].truth = [](const TrialPoint& x) { return x[4] * x[5] - 0.7; };
  cs[7].representative_from = 0.4;
  cs[7].bias = [](double phi, const TrialPoint& x) {
    return 0.35 * std::cos(7.0 * x[4] - 2.0 * x[8] + 1.0) * (1.0 - phi / 0.4);
  };
  cs[8].truth = [](const TrialPoint& x) {
    return x[6] + x[7] + x[8] + x[9] - 3.2;
  };
  cs[8].representative_from = 0.6;
  cs[8].bias = [](double phi, const TrialPoint& x) {
    return 0.5 * std::sin(3.0 * x[9] + 4.0 * x[10]) * (1.0 - phi / 0.6);
  };

  cs[9].truth = [](const TrialPoint& x) { return x[10] - 0.98; };
  cs[10].truth = [](const TrialPoint& x) { return 0.02 - x[11]; };
  cs[11].truth = [](const TrialPoint& x) { return x[12] + x[13] - 1.9; };
  cs[12].truth = [](const TrialPoint& x) {
    const double dx = x[0] - 0.5, dy = x[7] - 0.5;
    return dx * dx + dy * dy - 0.9;
  };
  s.constraints = std::move(cs);
  s.time_min = 0.01;
  s.time_max = 1.0;
  s.time_exponent = 1.3;
  p.spec = std::move(s);
  p.ladder = bench_ladder();
  p.x0 = TrialPoint(14, 0.5);
  return p;
}

inline NamedProblem make_quadbox() {
  NamedProblem p;
  p.name = "quadbox";
  p.summary =
      "4D unconstrained separable quadratic at fixed cost; solver sanity "
      "target with a known minimizer";
  SyntheticSpec s;
  s.dimension = 4;
  s.bounds = BoxBounds{TrialPoint(4, -1.0), TrialPoint(4, 1.0)};
  s.objective = [](const TrialPoint& x) {
    const double a[4] = {0.3, -0.4, 0.7, 0.0};
    double v = 0.0;
    for (int i = 0; i < 4; ++i) v += (x[i] - a[i]) * (x[i] - a[i]);
    return v;
  };
  s.time_min = 0.1;
  s.time_max = 0.1;
  s.time_exponent = 1.0;
  p.spec = std::move(s);
  p.ladder = FidelityLadder({1.0});
  p.x0 = TrialPoint(4, 0.0);
  return p;
}

}  // namespace detail

inline std::vector<std::string> problem_names() {
  return {"gate", "mirage", "checker", "plant", "quadbox"};
}

inline NamedProblem make_problem(const std::string& name) {
  if (name == "gate") return detail::make_gate();
  if (name == "mirage") return detail::make_mirage();
  if (name == "checker") return detail::make_checker();
  if (name == "plant") return detail::make_plant();
  if (name == "quadbox") return detail::make_quadbox();
  throw std::invalid_argument("make_problem: unknown problem \"" + name + "\"");
}

}  // namespace fidopt
