#pragma once

#include <cstdint>

#include "cvmdi/estimation.hpp"
#include "cvmdi/keyrate.hpp"

namespace cvmdi {

inline constexpr double kDefaultEpsPa = 1e-10;

/// Block bookkeeping: n_bar signals, m of them spent on estimation, n = n_bar - m for the key.
struct FiniteSizeParams {
  std::int64_t n_bar = 0;
  std::int64_t m = 0;
  double eps_pe = kDefaultEpsPe;
  double eps_pa = kDefaultEpsPa;
  double z = kDefaultZ;
  double delta_prefactor = 1.0;

  std::int64_t n() const { return n_bar - m; }
  double ratio() const { return static_cast<double>(n()) / static_cast<double>(n_bar); }

  /// Splits n_bar so that n = round(r n_bar).
  static FiniteSizeParams from_ratio(std::int64_t n_bar, double r);

  void validate() const;
};

/// Finite-size penalty prefactor * sqrt(log2(2 / eps_pa) / n).
double delta_n(double n, double eps_pa, double prefactor = 1.0);

struct FiniteSizeBreakdown {
  RateBreakdown worst_case;  ///< asymptotic quantities at the pessimistic parameters
  double delta = 0.0;
  double ratio = 0.0;
  double key_rate = 0.0;  ///< ratio * (K_inf(worst) - delta)
};

FiniteSizeBreakdown finite_size_breakdown(const ProtocolParams& p, const EstimationReport& report,
                                          const FiniteSizeParams& fs);

double finite_size_key_rate(const ProtocolParams& p, const EstimationReport& report, const FiniteSizeParams& fs);

}  // namespace cvmdi
