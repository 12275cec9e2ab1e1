#pragma once

#include "cvmdi/channel.hpp"
#include "cvmdi/gaussian.hpp"

namespace cvmdi {

struct ProtocolParams {
  double v_m = 0.0;  ///< Gaussian modulation variance (SNU)
  double xi = 1.0;   ///< reconciliation efficiency

  void validate() const;
};

/// Alice-Bob state after the relay broadcast (ab|gamma) and after Alice's
/// heterodyne on top of it (b|gamma,alpha).
struct ConditionalState {
  CovMatrixd ab_given_gamma;
  CovMatrixd b_given_gamma_alpha;
  double phi;
  double phi_prime;
  double nu_bar;  ///< sqrt(det b_given_gamma_alpha)
};

ConditionalState conditional_cms(const ProtocolParams& p, double tau_a, double tau_b, const NoiseVars& noise);

/// Alice-Bob mutual information in bits, heterodyne convention.
double mutual_information(const ConditionalState& state);

/// Holevo bound S(ab|gamma) - S(b|gamma,alpha) in bits.
double holevo_bound(const ConditionalState& state);

struct RateBreakdown {
  double mutual_information;
  double holevo_bound;
  double key_rate;  ///< xi * I_AB - I_H; may be negative
};

RateBreakdown asymptotic_rate_breakdown(const ProtocolParams& p, double tau_a, double tau_b, const NoiseVars& noise);

/// Asymptotic key rate in bits per channel use.
double asymptotic_key_rate(const ProtocolParams& p, double tau_a, double tau_b, const NoiseVars& noise);

}  // namespace cvmdi
