#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "cvmdi/channel.hpp"

namespace cvmdi {

/// Confidence multiplier for the worst-case bounds (Gaussian tail ~1e-10).
inline constexpr double kDefaultZ = 6.5;
inline constexpr double kDefaultEpsPe = 1e-10;

/// Parameter-estimation samples: Alice/Bob modulations and the relay broadcast, all in SNU.
struct QuadratureDataset {
  std::vector<double> a_q, a_p, b_q, b_p, r_q, r_p;

  std::size_t size() const { return a_q.size(); }
  void resize(std::size_t m);
  /// Throws DatasetError unless all six columns share a length m >= 2.
  void validate() const;
};

/// CSV with header a_q,a_p,b_q,b_p,r_q,r_p; '#' lines are skipped.
QuadratureDataset read_dataset_csv(std::istream& in);
void write_dataset_csv(std::ostream& out, const QuadratureDataset& data, std::string_view metadata = {});

struct CovarianceEstimates {
  double c_ar_q = 0.0;
  double c_ar_p = 0.0;
  double c_br_q = 0.0;
  double c_br_p = 0.0;
};

/// Empirical means of A_q R_q, A_p R_p, B_q R_q, B_p R_p.
CovarianceEstimates estimate_covariances(const QuadratureDataset& data);

/// Weight of the q-quadrature estimator in each combined transmissivity.
struct CombinationWeights {
  double a_q = 0.5;
  double b_q = 0.5;
};

struct TransmissivityEstimates {
  double tau_a_q = 0.0;
  double tau_a_p = 0.0;
  double tau_b_q = 0.0;
  double tau_b_p = 0.0;
  double tau_a = 0.0;
  double tau_b = 0.0;
};

/// tau_hat = 2 C_hat^2 / V_M^2 per quadrature, combined with the given weights.
TransmissivityEstimates estimate_transmissivities(const QuadratureDataset& data, double v_m,
                                                  CombinationWeights weights = {});

struct TransmissivityVariance {
  double var_q = 0.0;
  double var_p = 0.0;
  double combined = 0.0;  ///< var_q var_p / (var_q + var_p)
};

/// Variance of the transmissivity estimators of the link with transmissivity `tau`
/// (`tau_other` is the opposite link) from m samples. Pass (tau_a, tau_b) for
/// Alice's link and (tau_b, tau_a) for Bob's.
TransmissivityVariance transmissivity_variance(double tau, double tau_other, double v_m, const NoiseVars& noise,
                                               double m);

/// Inverse-variance weights for the q/p combination.
CombinationWeights inverse_variance_weights(double tau_a, double tau_b, double v_m, const NoiseVars& noise);

/// Mean squared residual of the relay output after removing the fitted signal, minus shot noise.
/// Transmissivities are clamped to [0, 1]. The result may be negative.
NoiseVars estimate_excess_noise(const QuadratureDataset& data, double tau_a_hat, double tau_b_hat);

struct ExcessNoiseVariance {
  double s_q_sq = 0.0;
  double s_p_sq = 0.0;
};

/// 2 V_N^2 / m per quadrature.
ExcessNoiseVariance excess_noise_variance(const NoiseVars& noise, double m);

/// Point estimates with their standard deviations, before the worst-case shift.
struct ParameterEstimates {
  double tau_a = 0.0;
  double tau_b = 0.0;
  NoiseVars noise;
  double sigma_a = 0.0;
  double sigma_b = 0.0;
  double s_q = 0.0;
  double s_p = 0.0;
};

struct EstimationReport {
  double tau_a_hat = 0.0;
  double tau_b_hat = 0.0;
  double sigma_a = 0.0;
  double sigma_b = 0.0;
  double v_q_eps_hat = 0.0;
  double v_p_eps_hat = 0.0;
  double s_q = 0.0;
  double s_p = 0.0;
  double tau_a_low = 0.0;
  double tau_b_low = 0.0;
  double v_q_eps_up = 0.0;
  double v_p_eps_up = 0.0;
  double z = kDefaultZ;

  NoiseVars worst_noise() const { return {v_q_eps_up, v_p_eps_up}; }
};

/// tau_low = clamp(tau_hat - z sigma, 0, 1), V_up = V_hat + z s.
EstimationReport worst_case(const ParameterEstimates& estimates, double z = kDefaultZ);

/// Which parameters the variance formulas are evaluated at.
enum class EstimationMode {
  analysis,  ///< true channel parameters (known in simulation)
  protocol,  ///< plug-in estimates from the data
};

EstimationMode parse_mode(std::string_view name);
std::string_view to_string(EstimationMode mode);

struct ChannelTruth {
  double tau_a = 1.0;
  double tau_b = 1.0;
  NoiseVars noise;
};

/// Complete estimation pipeline on one dataset. With `truth` the variances (and
/// combination weights) use the true parameters; without it they use plug-in estimates.
EstimationReport estimate_channel(const QuadratureDataset& data, double v_m, double z = kDefaultZ,
                                  const std::optional<ChannelTruth>& truth = std::nullopt);

/// Report centred on the true parameters with variances for m samples; no data involved.
EstimationReport analytic_report(const ChannelTruth& truth, double v_m, double m, double z = kDefaultZ);

}  // namespace cvmdi
