#include "cvmdi/keyrate.hpp"

#include <cmath>
#include <string>

namespace cvmdi {

void ProtocolParams::validate() const {
  if (!(v_m >= 0.0)) throw DomainError("modulation variance V_M must be >= 0, got " + detail::format_value(v_m));
  if (!(xi > 0.0 && xi <= 1.0)) {
    throw DomainError("reconciliation efficiency xi must lie in (0, 1], got " + detail::format_value(xi));
  }
}

ConditionalState conditional_cms(const ProtocolParams& p, double tau_a, double tau_b, const NoiseVars& noise) {
  p.validate();
  if (!(tau_a >= 0.0 && tau_a <= 1.0) || !(tau_b >= 0.0 && tau_b <= 1.0)) {
    throw DomainError("transmissivities must lie in [0, 1], got tau_a=" + detail::format_value(tau_a) +
                      ", tau_b=" + detail::format_value(tau_b));
  }
  if (!(noise.v_q_n() > 0.0) || !(noise.v_p_n() > 0.0)) {
    throw ConfigError("total relay noise must be positive");
  }

  const double v_m = p.v_m;
  const double phi = (tau_a + tau_b) * v_m + 2.0 + 2.0 * noise.v_q_eps;
  const double phi_prime = (tau_a + tau_b) * v_m + 2.0 + 2.0 * noise.v_p_eps;
  if (!(phi > 0.0) || !(phi_prime > 0.0)) {
    throw ConfigError("degenerate configuration: phi=" + detail::format_value(phi) +
                      ", phi'=" + detail::format_value(phi_prime));
  }

  const double mu = v_m + 1.0;
  const double gain = v_m * (v_m + 2.0);
  const double cross = std::sqrt(tau_a * tau_b);

  CovMatrixd::Matrix ab(4, 4);
  ab << mu - gain * tau_a / phi, 0, gain * cross / phi, 0,
        0, mu - gain * tau_a / phi_prime, 0, -gain * cross / phi_prime,
        gain * cross / phi, 0, mu - gain * tau_b / phi, 0,
        0, -gain * cross / phi_prime, 0, mu - gain * tau_b / phi_prime;

  const double w_q = 1.0 + noise.v_q_eps;
  const double w_p = 1.0 + noise.v_p_eps;
  CovMatrixd::Matrix b(2, 2);
  b << (2.0 * mu * w_q - tau_b * v_m) / (2.0 * w_q + tau_b * v_m), 0,
       0, (2.0 * mu * w_p - tau_b * v_m) / (2.0 * w_p + tau_b * v_m);

  CovMatrixd b_cm(std::move(b));
  const double det_b = b_cm.matrix().determinant();
  if (!(det_b >= 0.0)) {
    throw NumericalError("conditional single-mode state has negative determinant " + detail::format_value(det_b));
  }
  const double nu_bar = std::sqrt(det_b);
  return ConditionalState{CovMatrixd(std::move(ab)), std::move(b_cm), phi, phi_prime, nu_bar};
}

double mutual_information(const ConditionalState& state) {
  const auto& ab = state.ab_given_gamma;
  const auto& b = state.b_given_gamma_alpha;
  return 0.5 * std::log2((ab(2, 2) + 1.0) / (b(0, 0) + 1.0)) + 0.5 * std::log2((ab(3, 3) + 1.0) / (b(1, 1) + 1.0));
}

double holevo_bound(const ConditionalState& state) {
  const double tolerance = physicality_tolerance(state.b_given_gamma_alpha);
  return von_neumann_entropy(state.ab_given_gamma) -
         entropy_term(clamp_symplectic_eigenvalue(state.nu_bar, tolerance));
}

RateBreakdown asymptotic_rate_breakdown(const ProtocolParams& p, double tau_a, double tau_b, const NoiseVars& noise) {
  const ConditionalState state = conditional_cms(p, tau_a, tau_b, noise);
  const double i_ab = mutual_information(state);
  const double i_h = holevo_bound(state);
  return {i_ab, i_h, p.xi * i_ab - i_h};
}

double asymptotic_key_rate(const ProtocolParams& p, double tau_a, double tau_b, const NoiseVars& noise) {
  return asymptotic_rate_breakdown(p, tau_a, tau_b, noise).key_rate;
}

}  // namespace cvmdi
