#include "cvmdi/estimation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "cvmdi/csv.hpp"

namespace cvmdi {

namespace {

constexpr std::array<std::string_view, 6> kColumns = {"a_q", "a_p", "b_q", "b_p", "r_q", "r_p"};

double clamp_unit(double tau) { return std::clamp(tau, 0.0, 1.0); }

double mean_product(const std::vector<double>& x, const std::vector<double>& y) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * y[i];
  return sum / static_cast<double>(x.size());
}

// (1/m) sum [r - (sqrt(tb) b + sign_a sqrt(ta) a)/sqrt(2)]^2 - 1
double residual_excess(const std::vector<double>& r, const std::vector<double>& a, const std::vector<double>& b,
                       double sqrt_tau_a, double sqrt_tau_b, double sign_a) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double residual = r[i] - (sqrt_tau_b * b[i] + sign_a * sqrt_tau_a * a[i]) * inv_sqrt2;
    sum += residual * residual;
  }
  return sum / static_cast<double>(r.size()) - 1.0;
}

double combine(double var_q, double var_p) {
  const double total = var_q + var_p;
  return total > 0.0 ? var_q * var_p / total : 0.0;
}

void check_sample_count(double m) {
  if (!(m >= 1.0)) throw DomainError("sample count m must be >= 1, got " + detail::format_value(m));
}

}  // namespace

void QuadratureDataset::resize(std::size_t m) {
  for (auto* column : {&a_q, &a_p, &b_q, &b_p, &r_q, &r_p}) column->resize(m);
}

void QuadratureDataset::validate() const {
  const std::size_t m = a_q.size();
  for (const auto* column : {&a_p, &b_q, &b_p, &r_q, &r_p}) {
    if (column->size() != m) {
      throw DatasetError("dataset columns differ in length (" + std::to_string(m) + " vs " +
                         std::to_string(column->size()) + ")");
    }
  }
  if (m < 2) throw DatasetError("dataset needs at least 2 samples, got " + std::to_string(m));
}

QuadratureDataset read_dataset_csv(std::istream& in) {
  QuadratureDataset data;
  std::array<std::vector<double>*, 6> columns = {&data.a_q, &data.a_p, &data.b_q, &data.b_p, &data.r_q, &data.r_p};
  std::array<std::size_t, 6> index{};
  bool header_seen = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = csv::trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = csv::split(view);
    if (!header_seen) {
      if (fields.size() != kColumns.size()) {
        throw DatasetError("dataset header must have 6 columns a_q,a_p,b_q,b_p,r_q,r_p");
      }
      for (std::size_t c = 0; c < kColumns.size(); ++c) {
        const auto it = std::find(fields.begin(), fields.end(), kColumns[c]);
        if (it == fields.end()) throw DatasetError("dataset header is missing column " + std::string(kColumns[c]));
        index[c] = static_cast<std::size_t>(it - fields.begin());
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != kColumns.size()) {
      throw DatasetError("line " + std::to_string(line_no) + ": expected 6 fields, got " +
                         std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < kColumns.size(); ++c) columns[c]->push_back(csv::parse_double(fields[index[c]]));
  }
  if (!header_seen) throw DatasetError("dataset has no header row");
  data.validate();
  return data;
}

void write_dataset_csv(std::ostream& out, const QuadratureDataset& data, std::string_view metadata) {
  data.validate();
  if (!metadata.empty()) out << metadata;
  out << "a_q,a_p,b_q,b_p,r_q,r_p\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << csv::format_double(data.a_q[i]) << ',' << csv::format_double(data.a_p[i]) << ','
        << csv::format_double(data.b_q[i]) << ',' << csv::format_double(data.b_p[i]) << ','
        << csv::format_double(data.r_q[i]) << ',' << csv::format_double(data.r_p[i]) << '\n';
  }
}

CovarianceEstimates estimate_covariances(const QuadratureDataset& data) {
  data.validate();
  return {mean_product(data.a_q, data.r_q), mean_product(data.a_p, data.r_p), mean_product(data.b_q, data.r_q),
          mean_product(data.b_p, data.r_p)};
}

TransmissivityEstimates estimate_transmissivities(const QuadratureDataset& data, double v_m,
                                                  CombinationWeights weights) {
  if (!(v_m > 0.0)) {
    throw ConfigError("transmissivity estimation needs a known V_M > 0, got " + detail::format_value(v_m));
  }
  const CovarianceEstimates c = estimate_covariances(data);
  const double scale = 2.0 / (v_m * v_m);
  TransmissivityEstimates t;
  t.tau_a_q = scale * c.c_ar_q * c.c_ar_q;
  t.tau_a_p = scale * c.c_ar_p * c.c_ar_p;
  t.tau_b_q = scale * c.c_br_q * c.c_br_q;
  t.tau_b_p = scale * c.c_br_p * c.c_br_p;
  t.tau_a = weights.a_q * t.tau_a_q + (1.0 - weights.a_q) * t.tau_a_p;
  t.tau_b = weights.b_q * t.tau_b_q + (1.0 - weights.b_q) * t.tau_b_p;
  return t;
}

TransmissivityVariance transmissivity_variance(double tau, double tau_other, double v_m, const NoiseVars& noise,
                                               double m) {
  check_sample_count(m);
  if (!(v_m > 0.0)) throw ConfigError("transmissivity variance needs V_M > 0");
  const double mix = tau + tau_other / 2.0;
  // Written as 8 tau/m * (mix + V_N/V_M) so that mix = 0 stays finite.
  const double var_q = 8.0 * tau / m * (mix + noise.v_q_n() / v_m);
  const double var_p = 8.0 * tau / m * (mix + noise.v_p_n() / v_m);
  return {var_q, var_p, combine(var_q, var_p)};
}

CombinationWeights inverse_variance_weights(double tau_a, double tau_b, double v_m, const NoiseVars& noise) {
  // Weights do not depend on m; any positive count works.
  const auto weight_q = [](const TransmissivityVariance& v) {
    const double total = v.var_q + v.var_p;
    return total > 0.0 ? v.var_p / total : 0.5;
  };
  return {weight_q(transmissivity_variance(tau_a, tau_b, v_m, noise, 1.0)),
          weight_q(transmissivity_variance(tau_b, tau_a, v_m, noise, 1.0))};
}

NoiseVars estimate_excess_noise(const QuadratureDataset& data, double tau_a_hat, double tau_b_hat) {
  data.validate();
  const double sqrt_a = std::sqrt(clamp_unit(tau_a_hat));
  const double sqrt_b = std::sqrt(clamp_unit(tau_b_hat));
  return {residual_excess(data.r_q, data.a_q, data.b_q, sqrt_a, sqrt_b, -1.0),
          residual_excess(data.r_p, data.a_p, data.b_p, sqrt_a, sqrt_b, +1.0)};
}

ExcessNoiseVariance excess_noise_variance(const NoiseVars& noise, double m) {
  check_sample_count(m);
  return {2.0 * noise.v_q_n() * noise.v_q_n() / m, 2.0 * noise.v_p_n() * noise.v_p_n() / m};
}

EstimationReport worst_case(const ParameterEstimates& e, double z) {
  if (!(z >= 0.0)) throw DomainError("confidence multiplier z must be >= 0");
  EstimationReport report;
  report.tau_a_hat = e.tau_a;
  report.tau_b_hat = e.tau_b;
  report.sigma_a = e.sigma_a;
  report.sigma_b = e.sigma_b;
  report.v_q_eps_hat = e.noise.v_q_eps;
  report.v_p_eps_hat = e.noise.v_p_eps;
  report.s_q = e.s_q;
  report.s_p = e.s_p;
  report.z = z;
  report.tau_a_low = std::min(clamp_unit(e.tau_a - z * e.sigma_a), std::max(e.tau_a, 0.0));
  report.tau_b_low = std::min(clamp_unit(e.tau_b - z * e.sigma_b), std::max(e.tau_b, 0.0));
  report.v_q_eps_up = e.noise.v_q_eps + z * e.s_q;
  report.v_p_eps_up = e.noise.v_p_eps + z * e.s_p;
  return report;
}

EstimationMode parse_mode(std::string_view name) {
  if (name == "analysis") return EstimationMode::analysis;
  if (name == "protocol") return EstimationMode::protocol;
  throw ConfigError("unknown mode '" + std::string(name) + "' (expected analysis or protocol)");
}

std::string_view to_string(EstimationMode mode) {
  return mode == EstimationMode::analysis ? "analysis" : "protocol";
}

EstimationReport estimate_channel(const QuadratureDataset& data, double v_m, double z,
                                  const std::optional<ChannelTruth>& truth) {
  data.validate();
  const double m = static_cast<double>(data.size());

  CombinationWeights weights;
  if (truth) {
    weights = inverse_variance_weights(truth->tau_a, truth->tau_b, v_m, truth->noise);
  } else {
    // First pass with equal weights to obtain the plug-in noise for the weights.
    const TransmissivityEstimates first = estimate_transmissivities(data, v_m);
    const NoiseVars first_noise = estimate_excess_noise(data, first.tau_a, first.tau_b);
    if (first_noise.v_q_n() > 0.0 && first_noise.v_p_n() > 0.0) {
      weights = inverse_variance_weights(clamp_unit(first.tau_a), clamp_unit(first.tau_b), v_m, first_noise);
    }
  }

  const TransmissivityEstimates tau = estimate_transmissivities(data, v_m, weights);
  ParameterEstimates estimates;
  estimates.tau_a = tau.tau_a;
  estimates.tau_b = tau.tau_b;
  estimates.noise = estimate_excess_noise(data, tau.tau_a, tau.tau_b);

  const ChannelTruth at = truth ? *truth
                                : ChannelTruth{clamp_unit(tau.tau_a), clamp_unit(tau.tau_b), estimates.noise};
  estimates.sigma_a = std::sqrt(transmissivity_variance(at.tau_a, at.tau_b, v_m, at.noise, m).combined);
  estimates.sigma_b = std::sqrt(transmissivity_variance(at.tau_b, at.tau_a, v_m, at.noise, m).combined);
  const ExcessNoiseVariance s = excess_noise_variance(at.noise, m);
  estimates.s_q = std::sqrt(s.s_q_sq);
  estimates.s_p = std::sqrt(s.s_p_sq);
  return worst_case(estimates, z);
}

EstimationReport analytic_report(const ChannelTruth& truth, double v_m, double m, double z) {
  ParameterEstimates estimates;
  estimates.tau_a = truth.tau_a;
  estimates.tau_b = truth.tau_b;
  estimates.noise = truth.noise;
  estimates.sigma_a = std::sqrt(transmissivity_variance(truth.tau_a, truth.tau_b, v_m, truth.noise, m).combined);
  estimates.sigma_b = std::sqrt(transmissivity_variance(truth.tau_b, truth.tau_a, v_m, truth.noise, m).combined);
  const ExcessNoiseVariance s = excess_noise_variance(truth.noise, m);
  estimates.s_q = std::sqrt(s.s_q_sq);
  estimates.s_p = std::sqrt(s.s_p_sq);
  return worst_case(estimates, z);
}

}  // namespace cvmdi
