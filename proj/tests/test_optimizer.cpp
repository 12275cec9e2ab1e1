#include <cmath>

#include "cvmdi/optimizer.hpp"
#include "doctest.h"

using namespace cvmdi;

namespace {

OptimizationSpec modulation_spec(double xi, std::optional<std::int64_t> n_bar) {
  OptimizationSpec spec;
  spec.scenario.channel = make_channel(Attack::pure_loss, 0.98, 0.7, 1.0, 1.0);
  spec.scenario.xi = xi;
  spec.scenario.n_bar = n_bar;
  return spec;
}

}  // namespace

TEST_CASE("GridAxis") {
  const auto lin = GridAxis{0.1, 0.9, 9, false}.values();
  REQUIRE(lin.size() == 9);
  CHECK(lin.front() == 0.1);
  CHECK(lin.back() == 0.9);
  CHECK(lin[4] == doctest::Approx(0.5));

  const auto log = GridAxis{1.0, 1e3, 4, true}.values();
  CHECK(log[1] == doctest::Approx(10.0));
  CHECK(log[3] == 1e3);
  CHECK(GridAxis{5.0, 7.0, 1, false}.values() == std::vector<double>{5.0});

  CHECK_THROWS_AS((GridAxis{1.0, 2.0, 0, false}.validate("x")), ConfigError);
  CHECK_THROWS_AS((GridAxis{2.0, 1.0, 3, false}.validate("x")), ConfigError);
  CHECK_THROWS_AS((GridAxis{0.0, 1.0, 3, true}.validate("x")), ConfigError);
}

TEST_CASE("ideal reconciliation pushes V_M to the top of the grid") {
  const OptimizationResult res = optimize_key_rate(modulation_spec(1.0, std::nullopt));
  CHECK(res.v_m_star == 1e3);
  CHECK(res.positive_rate);
  CHECK(res.r_star == 1.0);
}

TEST_CASE("imperfect reconciliation has an interior optimum") {
  const OptimizationResult res = optimize_key_rate(modulation_spec(0.95, 1'000'000));
  CHECK(res.v_m_star > 1.0);
  CHECK(res.v_m_star < 1e3);
  CHECK(res.positive_rate);
  CHECK(res.r_star > 0.0);
  CHECK(res.r_star < 1.0);
}

TEST_CASE("heavy loss on both links gives no positive rate") {
  OptimizationSpec spec;
  const double tau = db_to_transmissivity(60.0);
  spec.scenario.channel = make_channel(Attack::two_mode_optimal, tau, tau, 1.01, 1.01);
  spec.scenario.n_bar = 1'000'000;
  OptimizationResult res;
  CHECK_NOTHROW(res = optimize_key_rate(spec));
  CHECK_FALSE(res.positive_rate);
  CHECK(res.k_star <= 0.0);
  for (const Evaluation& e : res.trace) CHECK(e.rate <= 0.0);
}

TEST_CASE("trace consistency and refinement") {
  OptimizationSpec spec;
  spec.scenario.channel = make_channel(Attack::two_mode_optimal, 0.98, db_to_transmissivity(2.0), 1.01, 1.01);
  spec.scenario.n_bar = 1'000'000'000;
  const OptimizationResult res = optimize_key_rate(spec);

  const std::size_t per_round = 25 * 9;
  REQUIRE(res.trace.size() == 3 * per_round);
  double coarse_best = -1e300;
  for (std::size_t i = 0; i < per_round; ++i) coarse_best = std::max(coarse_best, res.trace[i].rate);
  CHECK(res.k_star >= coarse_best);

  double trace_best = -1e300;
  for (const Evaluation& e : res.trace) trace_best = std::max(trace_best, e.rate);
  CHECK(res.k_star == trace_best);

  CHECK(res.k_star == scenario_rate(spec.scenario, res.v_m_star, res.r_star));
  const PointEvaluation point = evaluate_point(spec.scenario, res.v_m_star, res.r_star);
  CHECK(point.breakdown.key_rate == res.k_star);
  CHECK(res.k_star > 1e-2);

  for (const Evaluation& e : res.trace) {
    CHECK(e.v_m >= spec.v_m_min);
    CHECK(e.v_m <= spec.v_m_max);
    CHECK(e.r >= spec.r_min);
    CHECK(e.r <= spec.r_max);
  }

  spec.refinement_rounds = 0;
  const OptimizationResult coarse = optimize_key_rate(spec);
  CHECK(coarse.trace.size() == per_round);
  CHECK(coarse.k_star == coarse_best);
}

TEST_CASE("optimization is deterministic") {
  OptimizationSpec spec = modulation_spec(0.95, 1'000'000);
  const OptimizationResult a = optimize_key_rate(spec);
  const OptimizationResult b = optimize_key_rate(spec);
  CHECK(a.v_m_star == b.v_m_star);
  CHECK(a.r_star == b.r_star);
  CHECK(a.k_star == b.k_star);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].rate == b.trace[i].rate);

  spec.mode = EstimationMode::protocol;
  spec.v_m_grid = {5.0, 50.0, 3, true};
  spec.v_m_min = 5.0;
  spec.v_m_max = 50.0;
  spec.r_grid = {0.5, 0.9, 3, false};
  spec.refinement_rounds = 1;
  const OptimizationResult p1 = optimize_key_rate(spec);
  const OptimizationResult p2 = optimize_key_rate(spec);
  CHECK(p1.k_star == p2.k_star);
  CHECK(p1.v_m_star == p2.v_m_star);
}

TEST_CASE("ties go to smaller V_M, then larger r") {
  CHECK(preferred({10.0, 0.5, 0.2}, {5.0, 0.9, 0.1}));
  CHECK(preferred({5.0, 0.5, 0.1}, {10.0, 0.5, 0.1}));
  CHECK_FALSE(preferred({10.0, 0.5, 0.1}, {5.0, 0.5, 0.1}));
  CHECK(preferred({5.0, 0.9, 0.1}, {5.0, 0.5, 0.1}));
  CHECK_FALSE(preferred({5.0, 0.5, 0.1}, {5.0, 0.5, 0.1}));

  // A single repeated V_M makes every coarse point tie on V_M; the larger r wins when the rates tie.
  OptimizationSpec spec;
  spec.scenario.channel = make_channel(Attack::pure_loss, 0.9, 0.9, 1.0, 1.0);
  spec.v_m_grid = {10.0, 10.0, 3, true};
  spec.refinement_rounds = 0;
  const OptimizationResult res = optimize_key_rate(spec);
  CHECK(res.v_m_star == 10.0);
  CHECK(res.trace.size() == 3);
  CHECK(res.trace[0].rate == res.trace[2].rate);
}

TEST_CASE("protocol mode tracks analysis mode") {
  Scenario s;
  s.channel = make_channel(Attack::two_mode_optimal, 0.98, db_to_transmissivity(2.0), 1.01, 1.01);
  s.n_bar = 1'000'000'000;
  const double analysis = scenario_rate(s, 30.0, 0.999);
  const double protocol = scenario_rate(s, 30.0, 0.999, EstimationMode::protocol, 3);
  CHECK(protocol == doctest::Approx(analysis).epsilon(0.05));
  CHECK_THROWS_AS(evaluate_point(Scenario{}, 10.0, 0.5), ConfigError);
}

TEST_CASE("spec validation") {
  OptimizationSpec spec = modulation_spec(1.0, 1'000'000);
  spec.r_grid = {0.0, 0.9, 9, false};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = modulation_spec(1.0, 1'000'000);
  spec.shrink = 1.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = modulation_spec(0.0, 1'000'000);
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}
