#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "fidopt/rng.hpp"
#include "fidopt/sampling.hpp"
#include "fidopt/synthetic.hpp"

using namespace fidopt;

namespace {

SyntheticSpec screen_spec() {
  SyntheticSpec s;
  s.dimension = 2;
  s.bounds = BoxBounds{{0.0, 0.0}, {1.0, 1.0}};
  s.objective = [](const TrialPoint& x) { return x[0] + x[1]; };
  SyntheticConstraint soft;
  soft.truth = [](const TrialPoint& x) { return x[0] - 0.5; };
  soft.representative_from = 0.5;
  soft.bias = [](double phi, const TrialPoint& x) {
    return 0.4 * std::cos(9.0 * x[0] + 5.0 * x[1]) * (1.0 - phi / 0.5);
  };
  SyntheticConstraint hard;
  hard.truth = [](const TrialPoint& x) { return x[1] - 0.7; };
  hard.a_priori = true;
  s.constraints = {soft, hard};
  s.time_min = 0.02;
  s.time_max = 1.0;
  s.time_exponent = 1.0;
  return s;
}

SampleSet tiny_manual_set() {
  // Two points, two rungs, times 1,2 and 3,4.
  SampleSet set;
  set.region = BoxBounds{{0.0}, {1.0}};
  set.ladder = FidelityLadder({0.5, 1.0});
  set.points = {TrialPoint{0.2}, TrialPoint{0.8}};
  set.retained = {1, 1};
  set.outputs.resize(2);
  double t = 1.0;
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t i = 0; i < 2; ++i) {
      EvalOutput out;
      out.fidelity = set.ladder[i];
      out.time = t;
      t += 1.0;
      out.f = ExtReal(0.0);
      out.c = {ExtReal(-1.0)};
      set.outputs[k].push_back(out);
    }
  return set;
}

}  // namespace

TEST_CASE("centered bounds formula and saturation", "[sampling]") {
  const BoxBounds box{{0.0}, {10.0}};
  const TrialPoint x0{5.0};

  const BoxBounds full = centered_bounds(x0, box, 1.0);
  CHECK(full.lower == box.lower);
  CHECK(full.upper == box.upper);

  const BoxBounds collapsed = centered_bounds(x0, box, 0.0);
  CHECK(collapsed.lower == TrialPoint{5.0});
  CHECK(collapsed.upper == TrialPoint{5.0});

  const BoxBounds quarter = centered_bounds(x0, box, 0.25);
  CHECK(quarter.lower == TrialPoint{2.5});
  CHECK(quarter.upper == TrialPoint{7.5});

  // Near the edge the window saturates at the box.
  const BoxBounds edge = centered_bounds({1.0}, box, 0.25);
  CHECK(edge.lower == TrialPoint{0.0});
  CHECK(edge.upper == TrialPoint{3.5});

  CHECK_THROWS_AS(centered_bounds({11.0}, box, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(centered_bounds(x0, box, 1.5), std::invalid_argument);
}

TEST_CASE("latin hypercube hits every stratum once", "[sampling]") {
  const BoxBounds box{{0.0, -2.0}, {1.0, 2.0}};
  const std::size_t n_h = 4;
  const std::vector<TrialPoint> pts = latin_hypercube(box, n_h, 9);
  REQUIRE(pts.size() == n_h);
  for (std::size_t axis = 0; axis < 2; ++axis) {
    std::vector<int> hits(n_h, 0);
    for (const TrialPoint& x : pts) {
      const double u = (x[axis] - box.lower[axis]) /
                       (box.upper[axis] - box.lower[axis]);
      const std::size_t stratum =
          std::min(n_h - 1, static_cast<std::size_t>(u * n_h));
      ++hits[stratum];
    }
    for (int h : hits) CHECK(h == 1);
  }
}

TEST_CASE("latin hypercube on a degenerate box repeats the point", "[sampling]") {
  const BoxBounds box{{3.0, 1.0}, {3.0, 1.0}};
  for (const TrialPoint& x : latin_hypercube(box, 8, 1))
    CHECK(x == TrialPoint{3.0, 1.0});
}

TEST_CASE("latin hypercube is seed-deterministic", "[sampling]") {
  const BoxBounds box{{0.0}, {1.0}};
  CHECK(latin_hypercube(box, 16, 5) == latin_hypercube(box, 16, 5));
  CHECK(latin_hypercube(box, 16, 5) != latin_hypercube(box, 16, 6));
}

TEST_CASE("sample evaluation screens a priori failures once", "[sampling]") {
  SyntheticBlackbox bb(screen_spec());
  const FidelityLadder phi({0.25, 0.5, 1.0});
  const std::vector<TrialPoint> pts{{0.2, 0.2}, {0.2, 0.9}};
  const SampleSet set = evaluate_sample(bb, phi, pts, bb.descriptor().bounds);
  CHECK(set.retained[0] == 1);
  CHECK(set.retained[1] == 0);
  CHECK(set.outputs[0].size() == 3);
  CHECK(set.outputs[1].size() == 1);
  CHECK(set.retained_count() == 1);
}

TEST_CASE("estimator columns honor their invariants", "[sampling]") {
  SyntheticBlackbox bb(screen_spec());
  const FidelityLadder phi({0.0, 0.25, 0.5, 1.0});
  const SampleSet set = evaluate_sample(
      bb, phi, latin_hypercube(bb.descriptor().bounds, 400, 3),
      bb.descriptor().bounds);
  const FeasibilityStats stats = estimate_stats(set, bb.descriptor().constraints);

  const std::size_t L = phi.size();
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(stats.r[L - 1][j] == 1.0);
    for (std::size_t i = 0; i + 1 < L; ++i)
      CHECK(stats.r[i][j] <= stats.r[i + 1][j]);
  }
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(stats.r[i][j] >= 0.0);
      CHECK(stats.r[i][j] <= 1.0);
      CHECK(stats.p[i][j] >= 0.0);
      CHECK(stats.p[i][j] <= 1.0);
    }
  // The constraint with a representativity threshold of 0.5 is exact from
  // that rung on.
  CHECK(stats.r[2][0] == 1.0);
  // Times follow the linear cost model.
  CHECK(stats.t[0] == Catch::Approx(0.02));
  CHECK(stats.t[3] == Catch::Approx(1.0));
  CHECK(stats.apriori_pass_count < stats.sample_count);
  CHECK(stats.apriori_pass_count > 0);
}

TEST_CASE("all-violated column estimates to one at every rung", "[sampling]") {
  SyntheticSpec s;
  s.dimension = 1;
  s.bounds = BoxBounds{{0.0}, {1.0}};
  s.objective = [](const TrialPoint&) { return 0.0; };
  SyntheticConstraint always;
  always.truth = [](const TrialPoint&) { return 2.0; };
  s.constraints = {always};
  SyntheticBlackbox bb(std::move(s));
  const FidelityLadder phi({0.5, 1.0});
  const SampleSet set =
      evaluate_sample(bb, phi, latin_hypercube(bb.descriptor().bounds, 50, 1),
                      bb.descriptor().bounds);
  const FeasibilityStats stats = estimate_stats(set, bb.descriptor().constraints);
  CHECK(stats.p[0][0] == 1.0);
  CHECK(stats.r[0][0] == 1.0);
}

TEST_CASE("estimators ignore sample order", "[sampling]") {
  SyntheticBlackbox bb(screen_spec());
  const FidelityLadder phi({0.25, 1.0});
  SampleSet set = evaluate_sample(
      bb, phi, latin_hypercube(bb.descriptor().bounds, 64, 12),
      bb.descriptor().bounds);
  const FeasibilityStats a = estimate_stats(set, bb.descriptor().constraints);

  // Reverse the recorded points and re-estimate.
  std::reverse(set.points.begin(), set.points.end());
  std::reverse(set.outputs.begin(), set.outputs.end());
  std::reverse(set.retained.begin(), set.retained.end());
  const FeasibilityStats b = estimate_stats(set, bb.descriptor().constraints);
  CHECK(a.r == b.r);
  CHECK(a.p == b.p);
  CHECK(a.t == b.t);
}

TEST_CASE("empty a priori survivor set is an explicit error", "[sampling]") {
  SyntheticSpec s;
  s.dimension = 1;
  s.bounds = BoxBounds{{0.0}, {1.0}};
  s.objective = [](const TrialPoint&) { return 0.0; };
  SyntheticConstraint wall;
  wall.truth = [](const TrialPoint&) { return 1.0; };
  wall.a_priori = true;
  s.constraints = {wall};
  SyntheticBlackbox bb(std::move(s));
  const FidelityLadder phi({1.0});
  const SampleSet set =
      evaluate_sample(bb, phi, latin_hypercube(bb.descriptor().bounds, 10, 1),
                      bb.descriptor().bounds);
  CHECK_THROWS_WITH(estimate_stats(set, bb.descriptor().constraints),
                    Catch::Matchers::ContainsSubstring("increase rho or n_h"));
  CHECK_THROWS_AS(best_sample_index(set), std::runtime_error);
}

TEST_CASE("time offset divides the sequential total by the workers", "[sampling]") {
  const SampleSet set = tiny_manual_set();
  CHECK(lh_time_offset(set, 1) == 10.0);
  CHECK(lh_time_offset(set, 2) == 5.0);
  CHECK(lh_time_offset(set, 4) == 2.5);
  CHECK_THROWS_AS(lh_time_offset(set, 0), std::invalid_argument);
}

TEST_CASE("screened-out points still pay the screening cost", "[sampling]") {
  SyntheticBlackbox bb(screen_spec());
  const FidelityLadder phi({0.25, 1.0});
  const std::vector<TrialPoint> pts{{0.2, 0.9}};  // rejected a priori
  const SampleSet set = evaluate_sample(bb, phi, pts, bb.descriptor().bounds);
  CHECK(lh_time_offset(set, 1) == Catch::Approx(0.02));
}

TEST_CASE("best sample prefers feasibility, then violation, then objective",
          "[sampling]") {
  SampleSet set = tiny_manual_set();
  // Point 0: infeasible with h=4; point 1: feasible with higher f.
  set.outputs[0][1].c = {ExtReal(2.0)};
  set.outputs[0][1].f = ExtReal(-10.0);
  set.outputs[1][1].c = {ExtReal(-1.0)};
  set.outputs[1][1].f = ExtReal(3.0);
  CHECK(best_sample_index(set) == 1);

  // Both infeasible: lowest h wins regardless of f.
  set.outputs[1][1].c = {ExtReal(3.0)};
  CHECK(best_sample_index(set) == 0);

  // Equal h: lower f wins.
  set.outputs[1][1].c = {ExtReal(2.0)};
  CHECK(best_sample_index(set) == 0);

  // Screened-out points are never candidates.
  set.retained[0] = 0;
  CHECK(best_sample_index(set) == 1);
}

TEST_CASE("lh config validation", "[sampling]") {
  LHConfig cfg;
  cfg.validate();
  cfg.rho = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.rho = 0.25;
  cfg.n_h = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
