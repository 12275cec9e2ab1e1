#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cvmdi/channel.hpp"
#include "cvmdi/estimation.hpp"

namespace cvmdi {

/// Standard-normal stream: mt19937_64 seeded from splitmix64(seed, stream), uniforms
/// from the top 53 bits, Gaussians from the Marsaglia polar transform. Bit-reproducible
/// on any conforming standard library.
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t stream);

  double operator()();

 private:
  double uniform_symmetric();  // (-1, 1)

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream);

struct SimulationSpec {
  ChannelParams channel;
  double v_m = 10.0;
  std::size_t m = 100000;
  std::size_t trials = 10000;
  std::uint64_t seed = 1;

  void validate() const;
  ChannelTruth truth() const;
};

/// One dataset of the relay protocol:
///   R_q = (sqrt(tau_b) B_q - sqrt(tau_a) A_q)/sqrt(2) + q_N
///   R_p = (sqrt(tau_b) B_p + sqrt(tau_a) A_p)/sqrt(2) + p_N
/// with A, B ~ N(0, V_M) and q_N ~ N(0, 1 + V_q), p_N ~ N(0, 1 + V_p).
/// Var(R_q) = (tau_a + tau_b) V_M / 2 + 1 + V_q.
QuadratureDataset sample_dataset(const SimulationSpec& spec, std::uint64_t trial_index);
void sample_dataset_into(const SimulationSpec& spec, std::uint64_t trial_index, QuadratureDataset& out);

/// Y = sum_i ((R_q - (sqrt(tau_b) B_q - sqrt(tau_a) A_q)/sqrt(2))^2 / V_qN) at the true parameters.
double residual_chi_square(const QuadratureDataset& data, const ChannelTruth& truth);

struct ValidationTolerances {
  double variance_relative = 0.10;
  double mean_standard_errors = 3.0;
  double chi_square_relative = 0.05;
};

/// Analytic-vs-empirical record for one estimator over all trials.
struct Comparison {
  std::string quantity;
  double analytic_mean = 0.0;
  double empirical_mean = 0.0;
  std::optional<double> standard_error;  ///< empty when trials < 2
  std::optional<double> mean_deviation_se;
  double analytic_variance = 0.0;
  std::optional<double> empirical_variance;
  std::optional<double> variance_relative_deviation;
  bool mean_ok = false;
  bool variance_ok = false;
};

/// Bias of the combined Alice transmissivity estimate.
struct BiasEstimate {
  double analytic = 0.0;  ///< 2 Var(C_hat)/V_M^2, combined over quadratures
  double raw = 0.0;       ///< mean(tau_hat) - tau
  /// raw with the zero-mean control variate (4 C/V_M^2)(C_hat - C) subtracted
  double control_variate = 0.0;
  std::optional<double> control_variate_se;
};

struct ChiSquareCheck {
  double degrees_of_freedom = 0.0;
  double empirical_mean = 0.0;
  std::optional<double> empirical_variance;
  double mean_relative_deviation = 0.0;
  std::optional<double> variance_relative_deviation;
  bool mean_ok = false;
  bool variance_ok = false;
};

struct TrialStatistics {
  std::size_t trials = 0;
  std::vector<Comparison> comparisons;
  BiasEstimate tau_a_bias;
  ChiSquareCheck chi_square;
  bool insufficient_data = false;
  bool all_ok = false;

  const Comparison& find(const std::string& quantity) const;
};

/// Simulates spec.trials datasets, runs the estimation pipeline on each and compares the
/// trial moments with the closed-form means and variances. Trials run on `threads`
/// workers (0 = hardware concurrency); results do not depend on the thread count.
TrialStatistics run_estimator_trials(const SimulationSpec& spec, EstimationMode mode = EstimationMode::analysis,
                                     const ValidationTolerances& tolerances = {}, unsigned threads = 0);

}  // namespace cvmdi
