#pragma once

#include <string_view>
#include <utility>

#include "cvmdi/gaussian.hpp"

namespace cvmdi {

/// Two links to the relay plus Eve's correlated thermal ancillas.
struct ChannelParams {
  double tau_a = 1.0;
  double tau_b = 1.0;
  double omega_a = 1.0;  ///< Eve's thermal variance on Alice's link (SNU)
  double omega_b = 1.0;
  double g = 0.0;        ///< q-q correlation of Eve's ancillas
  double g_prime = 0.0;  ///< p-p correlation of Eve's ancillas

  /// Range checks plus physicality of the ancilla state; throws on failure.
  void validate() const;
};

/// Excess-noise variance per relay output quadrature. Total noise is 1 + excess.
struct NoiseVars {
  double v_q_eps = 0.0;
  double v_p_eps = 0.0;

  double v_q_n() const { return 1.0 + v_q_eps; }
  double v_p_n() const { return 1.0 + v_p_eps; }

  friend bool operator==(const NoiseVars&, const NoiseVars&) = default;
};

enum class Attack { pure_loss, collective, two_mode_optimal };

Attack parse_attack(std::string_view name);
std::string_view to_string(Attack attack);

/// Eve's ancilla covariance [[omega_a I, G], [G, omega_b I]], G = diag(g, g').
CovMatrixd eve_cm(const ChannelParams& params);

/// Correlations of the optimal two-mode attack: g = min[sqrt((wa-1)(wb+1)), sqrt((wb-1)(wa+1))], g' = -g.
std::pair<double, double> optimal_two_mode_attack(double omega_a, double omega_b);

/// Relay-output excess noise V_q = k - g u, V_p = k + g' u.
NoiseVars noise_from_attack(const ChannelParams& params);

double db_to_transmissivity(double attenuation_db);

/// Builds ChannelParams for one of the named attack families.
/// pure_loss ignores the omegas; collective sets g = g' = 0.
ChannelParams make_channel(Attack attack, double tau_a, double tau_b, double omega_a, double omega_b);

}  // namespace cvmdi
