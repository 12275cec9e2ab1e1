#include "cvmdi/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

namespace cvmdi {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct TrialRecord {
  double c_ar_q, c_ar_p;
  double tau_a_q, tau_a_p, tau_a;
  double tau_b_q, tau_b_p, tau_b;
  double v_q_eps, v_p_eps;
  double chi_square;
  double tau_a_control;  // tau_a minus its zero-mean control variate
};

struct Moments {
  double mean = 0.0;
  std::optional<double> variance;  // unbiased, needs >= 2 samples
};

Moments moments(const std::vector<TrialRecord>& records, double TrialRecord::*field) {
  Moments out;
  const double n = static_cast<double>(records.size());
  for (const auto& r : records) out.mean += r.*field;
  out.mean /= n;
  if (records.size() >= 2) {
    double ss = 0.0;
    for (const auto& r : records) {
      const double d = r.*field - out.mean;
      ss += d * d;
    }
    out.variance = ss / (n - 1.0);
  }
  return out;
}

Comparison compare(std::string name, const std::vector<TrialRecord>& records, double TrialRecord::*field,
                   double analytic_mean, double analytic_variance, const ValidationTolerances& tol) {
  const Moments mo = moments(records, field);
  Comparison c;
  c.quantity = std::move(name);
  c.analytic_mean = analytic_mean;
  c.empirical_mean = mo.mean;
  c.analytic_variance = analytic_variance;
  if (mo.variance) {
    c.empirical_variance = *mo.variance;
    c.standard_error = std::sqrt(*mo.variance / static_cast<double>(records.size()));
    c.mean_deviation_se = *c.standard_error > 0.0 ? std::abs(mo.mean - analytic_mean) / *c.standard_error : 0.0;
    c.variance_relative_deviation = std::abs(*mo.variance - analytic_variance) / analytic_variance;
    c.mean_ok = *c.mean_deviation_se <= tol.mean_standard_errors;
    c.variance_ok = *c.variance_relative_deviation <= tol.variance_relative;
  }
  return c;
}

}  // namespace

std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

GaussianStream::GaussianStream(std::uint64_t seed, std::uint64_t stream) : engine_(derive_stream_seed(seed, stream)) {}

double GaussianStream::uniform_symmetric() {
  // 53-bit uniform in [0, 1), mapped to [-1, 1).
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

double GaussianStream::operator()() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double x, y, s;
  do {
    x = uniform_symmetric();
    y = uniform_symmetric();
    s = x * x + y * y;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = y * factor;
  has_spare_ = true;
  return x * factor;
}

void SimulationSpec::validate() const {
  channel.validate();
  if (!(v_m >= 0.0)) throw ConfigError("v_m must be >= 0");
  if (m < 2) throw ConfigError("m must be >= 2 samples per trial");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  static_cast<void>(noise_from_attack(channel));
}

ChannelTruth SimulationSpec::truth() const {
  return {channel.tau_a, channel.tau_b, noise_from_attack(channel)};
}

void sample_dataset_into(const SimulationSpec& spec, std::uint64_t trial_index, QuadratureDataset& out) {
  const NoiseVars noise = noise_from_attack(spec.channel);
  if (!(noise.v_q_n() > 0.0) || !(noise.v_p_n() > 0.0)) throw ConfigError("relay noise variance must be positive");
  out.resize(spec.m);
  GaussianStream gauss(spec.seed, trial_index);
  const double sd_mod = std::sqrt(spec.v_m);
  const double sd_q = std::sqrt(noise.v_q_n());
  const double sd_p = std::sqrt(noise.v_p_n());
  const double ka = std::sqrt(spec.channel.tau_a / 2.0);
  const double kb = std::sqrt(spec.channel.tau_b / 2.0);
  for (std::size_t i = 0; i < spec.m; ++i) {
    const double a_q = sd_mod * gauss();
    const double a_p = sd_mod * gauss();
    const double b_q = sd_mod * gauss();
    const double b_p = sd_mod * gauss();
    const double n_q = sd_q * gauss();
    const double n_p = sd_p * gauss();
    out.a_q[i] = a_q;
    out.a_p[i] = a_p;
    out.b_q[i] = b_q;
    out.b_p[i] = b_p;
    out.r_q[i] = kb * b_q - ka * a_q + n_q;
    out.r_p[i] = kb * b_p + ka * a_p + n_p;
  }
}

QuadratureDataset sample_dataset(const SimulationSpec& spec, std::uint64_t trial_index) {
  spec.validate();
  QuadratureDataset data;
  sample_dataset_into(spec, trial_index, data);
  return data;
}

double residual_chi_square(const QuadratureDataset& data, const ChannelTruth& truth) {
  data.validate();
  const double ka = std::sqrt(truth.tau_a / 2.0);
  const double kb = std::sqrt(truth.tau_b / 2.0);
  double y = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double residual = data.r_q[i] - (kb * data.b_q[i] - ka * data.a_q[i]);
    y += residual * residual;
  }
  return y / truth.noise.v_q_n();
}

const Comparison& TrialStatistics::find(const std::string& quantity) const {
  const auto it = std::find_if(comparisons.begin(), comparisons.end(),
                               [&](const Comparison& c) { return c.quantity == quantity; });
  if (it == comparisons.end()) throw ConfigError("no comparison record named " + quantity);
  return *it;
}

TrialStatistics run_estimator_trials(const SimulationSpec& spec, EstimationMode mode,
                                     const ValidationTolerances& tol, unsigned threads) {
  spec.validate();
  if (!(spec.v_m > 0.0)) throw ConfigError("estimator trials need V_M > 0");

  const ChannelTruth truth = spec.truth();
  const double m = static_cast<double>(spec.m);
  const double v_m = spec.v_m;
  const CombinationWeights fixed_weights = inverse_variance_weights(truth.tau_a, truth.tau_b, v_m, truth.noise);
  const double c_a = std::sqrt(truth.tau_a / 2.0) * v_m;  // |C_AR|; q carries a minus sign
  const std::optional<ChannelTruth> truth_arg = mode == EstimationMode::analysis
                                                    ? std::optional<ChannelTruth>(truth)
                                                    : std::nullopt;

  std::vector<TrialRecord> records(spec.trials);
  const auto worker = [&](std::size_t first, std::size_t stride) {
    QuadratureDataset data;
    for (std::size_t t = first; t < spec.trials; t += stride) {
      sample_dataset_into(spec, t, data);
      const CovarianceEstimates cov = estimate_covariances(data);
      const TransmissivityEstimates tau = estimate_transmissivities(data, v_m, fixed_weights);
      const EstimationReport report = estimate_channel(data, v_m, kDefaultZ, truth_arg);
      const double control = fixed_weights.a_q * 4.0 * (-c_a) / (v_m * v_m) * (cov.c_ar_q + c_a) +
                             (1.0 - fixed_weights.a_q) * 4.0 * c_a / (v_m * v_m) * (cov.c_ar_p - c_a);
      records[t] = TrialRecord{cov.c_ar_q,           cov.c_ar_p,
                               tau.tau_a_q,          tau.tau_a_p,
                               report.tau_a_hat,     tau.tau_b_q,
                               tau.tau_b_p,          report.tau_b_hat,
                               report.v_q_eps_hat,   report.v_p_eps_hat,
                               residual_chi_square(data, truth),
                               tau.tau_a - control};
    }
  };

  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, spec.trials));
  if (workers <= 1) {
    worker(0, 1);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker, w, workers);
  }

  const TransmissivityVariance var_a = transmissivity_variance(truth.tau_a, truth.tau_b, v_m, truth.noise, m);
  const TransmissivityVariance var_b = transmissivity_variance(truth.tau_b, truth.tau_a, v_m, truth.noise, m);
  const ExcessNoiseVariance var_eps = excess_noise_variance(truth.noise, m);
  const double mix_a = truth.tau_a + truth.tau_b / 2.0;
  const double var_c_q = (mix_a * v_m * v_m + v_m * truth.noise.v_q_n()) / m;
  const double var_c_p = (mix_a * v_m * v_m + v_m * truth.noise.v_p_n()) / m;

  TrialStatistics stats;
  stats.trials = spec.trials;
  stats.insufficient_data = spec.trials < 2;
  stats.comparisons = {
      compare("c_ar_q", records, &TrialRecord::c_ar_q, -c_a, var_c_q, tol),
      compare("c_ar_p", records, &TrialRecord::c_ar_p, c_a, var_c_p, tol),
      compare("tau_a_q", records, &TrialRecord::tau_a_q, truth.tau_a, var_a.var_q, tol),
      compare("tau_a_p", records, &TrialRecord::tau_a_p, truth.tau_a, var_a.var_p, tol),
      compare("tau_a", records, &TrialRecord::tau_a, truth.tau_a, var_a.combined, tol),
      compare("tau_b_q", records, &TrialRecord::tau_b_q, truth.tau_b, var_b.var_q, tol),
      compare("tau_b_p", records, &TrialRecord::tau_b_p, truth.tau_b, var_b.var_p, tol),
      compare("tau_b", records, &TrialRecord::tau_b, truth.tau_b, var_b.combined, tol),
      compare("v_q_eps", records, &TrialRecord::v_q_eps, truth.noise.v_q_eps, var_eps.s_q_sq, tol),
      compare("v_p_eps", records, &TrialRecord::v_p_eps, truth.noise.v_p_eps, var_eps.s_p_sq, tol),
  };

  const Moments tau_a = moments(records, &TrialRecord::tau_a);
  const Moments controlled = moments(records, &TrialRecord::tau_a_control);
  stats.tau_a_bias.analytic =
      2.0 / (v_m * v_m) * (fixed_weights.a_q * var_c_q + (1.0 - fixed_weights.a_q) * var_c_p);
  stats.tau_a_bias.raw = tau_a.mean - truth.tau_a;
  stats.tau_a_bias.control_variate = controlled.mean - truth.tau_a;
  if (controlled.variance) {
    stats.tau_a_bias.control_variate_se = std::sqrt(*controlled.variance / static_cast<double>(spec.trials));
  }

  const Moments chi = moments(records, &TrialRecord::chi_square);
  stats.chi_square.degrees_of_freedom = m;
  stats.chi_square.empirical_mean = chi.mean;
  stats.chi_square.mean_relative_deviation = std::abs(chi.mean - m) / m;
  stats.chi_square.mean_ok = stats.chi_square.mean_relative_deviation <= tol.chi_square_relative;
  if (chi.variance) {
    stats.chi_square.empirical_variance = *chi.variance;
    stats.chi_square.variance_relative_deviation = std::abs(*chi.variance - 2.0 * m) / (2.0 * m);
    stats.chi_square.variance_ok = *stats.chi_square.variance_relative_deviation <= tol.chi_square_relative;
  }

  stats.all_ok = !stats.insufficient_data && stats.chi_square.mean_ok && stats.chi_square.variance_ok;
  for (const auto& c : stats.comparisons) stats.all_ok = stats.all_ok && c.mean_ok && c.variance_ok;
  return stats;
}

}  // namespace cvmdi
