#include "cvmdi/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

namespace cvmdi {

namespace {

void check_transmissivity(double tau, const char* name) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw DomainError(std::string(name) + " must lie in [0, 1], got " + detail::format_value(tau));
  }
}

void check_thermal(double omega, const char* name) {
  if (!(omega >= 1.0)) {
    throw DomainError(std::string(name) + " must be >= 1 SNU, got " + detail::format_value(omega));
  }
}

}  // namespace

void ChannelParams::validate() const {
  check_transmissivity(tau_a, "tau_a");
  check_transmissivity(tau_b, "tau_b");
  static_cast<void>(eve_cm(*this));
}

Attack parse_attack(std::string_view name) {
  if (name == "pure-loss") return Attack::pure_loss;
  if (name == "collective") return Attack::collective;
  if (name == "two-mode-optimal") return Attack::two_mode_optimal;
  throw ConfigError("unknown attack '" + std::string(name) +
                    "' (expected pure-loss, collective or two-mode-optimal)");
}

std::string_view to_string(Attack attack) {
  switch (attack) {
    case Attack::pure_loss: return "pure-loss";
    case Attack::collective: return "collective";
    case Attack::two_mode_optimal: return "two-mode-optimal";
  }
  return "unknown";
}

CovMatrixd eve_cm(const ChannelParams& params) {
  check_thermal(params.omega_a, "omega_a");
  check_thermal(params.omega_b, "omega_b");
  CovMatrixd::Matrix v(4, 4);
  v << params.omega_a, 0, params.g, 0,
       0, params.omega_a, 0, params.g_prime,
       params.g, 0, params.omega_b, 0,
       0, params.g_prime, 0, params.omega_b;
  CovMatrixd cm(std::move(v));
  const auto nu = symplectic_eigenvalues(cm);
  if (nu.back() < 1.0 - kPhysicalityTolerance) {
    throw PhysicalityError("attack covariance matrix is unphysical: symplectic eigenvalue " +
                           detail::format_value(nu.back()) + " < 1 (g=" + detail::format_value(params.g) +
                           ", g'=" + detail::format_value(params.g_prime) + ")");
  }
  return cm;
}

std::pair<double, double> optimal_two_mode_attack(double omega_a, double omega_b) {
  check_thermal(omega_a, "omega_a");
  check_thermal(omega_b, "omega_b");
  const double g = std::min(std::sqrt((omega_a - 1.0) * (omega_b + 1.0)),
                            std::sqrt((omega_b - 1.0) * (omega_a + 1.0)));
  return {g, -g};
}

NoiseVars noise_from_attack(const ChannelParams& params) {
  check_transmissivity(params.tau_a, "tau_a");
  check_transmissivity(params.tau_b, "tau_b");
  check_thermal(params.omega_a, "omega_a");
  check_thermal(params.omega_b, "omega_b");
  const double k = ((1.0 - params.tau_b) * (params.omega_b - 1.0) + (1.0 - params.tau_a) * (params.omega_a - 1.0)) / 2.0;
  const double u = std::sqrt((1.0 - params.tau_b) * (1.0 - params.tau_a));
  NoiseVars noise{k - params.g * u, k + params.g_prime * u};
  if (!(noise.v_q_n() > 0.0) || !(noise.v_p_n() > 0.0)) {
    throw ConfigError("attack leaves non-positive total relay noise (V_qN=" + detail::format_value(noise.v_q_n()) +
                      ", V_pN=" + detail::format_value(noise.v_p_n()) + ")");
  }
  return noise;
}

double db_to_transmissivity(double attenuation_db) {
  if (!(attenuation_db >= 0.0)) {
    throw DomainError("attenuation must be >= 0 dB, got " + detail::format_value(attenuation_db));
  }
  return std::pow(10.0, -attenuation_db / 10.0);
}

ChannelParams make_channel(Attack attack, double tau_a, double tau_b, double omega_a, double omega_b) {
  ChannelParams params{tau_a, tau_b, omega_a, omega_b, 0.0, 0.0};
  switch (attack) {
    case Attack::pure_loss:
      params.omega_a = params.omega_b = 1.0;
      break;
    case Attack::collective:
      break;
    case Attack::two_mode_optimal:
      std::tie(params.g, params.g_prime) = optimal_two_mode_attack(omega_a, omega_b);
      break;
  }
  return params;
}

}  // namespace cvmdi
