#include <cmath>

#include "cvmdi/finite_size.hpp"
#include "doctest.h"

using namespace cvmdi;

namespace {

const ChannelParams kReferencePoint = make_channel(Attack::two_mode_optimal, 0.98, db_to_transmissivity(2.0), 1.01, 1.01);

ChannelTruth truth_of(const ChannelParams& ch) { return {ch.tau_a, ch.tau_b, noise_from_attack(ch)}; }

double rate_at(std::int64_t n_bar, double r, double v_m = 50.0, const ChannelParams& ch = kReferencePoint) {
  const FiniteSizeParams fs = FiniteSizeParams::from_ratio(n_bar, r);
  const EstimationReport report = analytic_report(truth_of(ch), v_m, static_cast<double>(fs.m));
  return finite_size_key_rate({v_m, 0.98}, report, fs);
}

}  // namespace

TEST_CASE("delta_n") {
  // log2(2e10) = 1 + 10 log2(10)
  const double log_term = 1.0 + 10.0 * std::log2(10.0);
  CHECK(log_term == doctest::Approx(34.2193).epsilon(1e-5));
  CHECK(delta_n(1e6, 1e-10) == doctest::Approx(std::sqrt(log_term / 1e6)).epsilon(1e-14));
  CHECK(delta_n(1e6, 1e-10) == doctest::Approx(5.850e-3).epsilon(1e-3));
  CHECK(delta_n(4e6, 1e-10) == doctest::Approx(delta_n(1e6, 1e-10) / 2.0).epsilon(1e-14));
  CHECK(delta_n(1e6, 1e-10, 3.0) == doctest::Approx(3.0 * delta_n(1e6, 1e-10)).epsilon(1e-14));

  CHECK_THROWS_AS(delta_n(1e6, 2.0), DomainError);
  CHECK_THROWS_AS(delta_n(1e6, 0.0), DomainError);
  CHECK_THROWS_AS(delta_n(0.0, 1e-10), DomainError);

  double previous = 1e9;
  for (double n = 1.0; n <= 1e15; n *= 10.0) {
    const double d = delta_n(n, 1e-10);
    CHECK(d < previous);
    previous = d;
  }
  CHECK(previous < 1e-6);
}

TEST_CASE("FiniteSizeParams bookkeeping") {
  const FiniteSizeParams fs = FiniteSizeParams::from_ratio(1'000'000'000, 0.9);
  CHECK(fs.m == 100'000'000);
  CHECK(fs.n() == 900'000'000);
  CHECK(fs.ratio() == doctest::Approx(0.9).epsilon(1e-15));

  CHECK_THROWS_AS(FiniteSizeParams::from_ratio(1000, 0.0), DomainError);
  CHECK_THROWS_AS(FiniteSizeParams::from_ratio(1000, 1.0), DomainError);
  CHECK_THROWS_AS(FiniteSizeParams::from_ratio(1000, 0.9999), DomainError);  // rounds to m = 0

  FiniteSizeParams bad = fs;
  bad.eps_pa = 1.5;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = fs;
  bad.m = fs.n_bar;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("finite-size rate reduces to the asymptotic rate in the limit") {
  const ChannelTruth truth = truth_of(kReferencePoint);
  const ProtocolParams p{50.0, 0.98};
  const double k_inf = asymptotic_key_rate(p, truth.tau_a, truth.tau_b, truth.noise);

  // Exact parameters (no confidence shift), eps_pa close to 1, r close to 1, huge block.
  FiniteSizeParams fs = FiniteSizeParams::from_ratio(4'000'000'000'000'000'000LL, 1.0 - 1e-9);
  fs.eps_pa = 1.0 - 1e-12;
  EstimationReport exact = analytic_report(truth, p.v_m, 1e9, 0.0);
  const FiniteSizeBreakdown b = finite_size_breakdown(p, exact, fs);
  CHECK(b.delta < 1e-9);
  CHECK(b.key_rate == doctest::Approx(k_inf).epsilon(1e-8));
  CHECK(b.worst_case.key_rate == doctest::Approx(k_inf).epsilon(1e-14));
}

TEST_CASE("K never exceeds r K_inf at the worst-case parameters") {
  for (std::int64_t n_bar : {1'000'000LL, 1'000'000'000LL}) {
    for (double r : {0.2, 0.5, 0.9}) {
      const FiniteSizeParams fs = FiniteSizeParams::from_ratio(n_bar, r);
      const EstimationReport report = analytic_report(truth_of(kReferencePoint), 50.0, static_cast<double>(fs.m));
      const FiniteSizeBreakdown b = finite_size_breakdown({50.0, 0.98}, report, fs);
      CHECK(b.key_rate < b.ratio * b.worst_case.key_rate);
      CHECK(b.key_rate == doctest::Approx(b.ratio * (b.worst_case.key_rate - b.delta)).epsilon(1e-15));
    }
  }
}

TEST_CASE("K is non-decreasing in the block size at fixed r") {
  for (double r : {0.3, 0.5, 0.8}) {
    double previous = -1e9;
    for (std::int64_t n_bar = 1'000'000; n_bar <= 1'000'000'000'000LL; n_bar *= 10) {
      const double k = rate_at(n_bar, r);
      CHECK(k >= previous);
      previous = k;
    }
  }
}

TEST_CASE("K approaches r K_inf(true) for large blocks") {
  const ChannelTruth truth = truth_of(kReferencePoint);
  const double r = 0.5;
  const double target = r * asymptotic_key_rate({50.0, 0.98}, truth.tau_a, truth.tau_b, truth.noise);
  double previous_gap = 1e9;
  for (std::int64_t n_bar : {100'000'000LL, 10'000'000'000LL, 1'000'000'000'000LL, 100'000'000'000'000LL}) {
    const double gap = std::abs(rate_at(n_bar, r) - target);
    CHECK(gap < previous_gap);
    previous_gap = gap;
  }
  CHECK(previous_gap / target < 1e-3);
}

TEST_CASE("block size ordering at the asymmetric operating point") {
  const ChannelTruth truth = truth_of(kReferencePoint);
  const double k_inf = asymptotic_key_rate({50.0, 0.98}, truth.tau_a, truth.tau_b, truth.noise);
  const double k9 = rate_at(1'000'000'000, 0.9);
  const double k6 = rate_at(1'000'000, 0.9);
  CHECK(k6 < k9);
  CHECK(k9 < k_inf);
}
