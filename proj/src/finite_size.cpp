#include "cvmdi/finite_size.hpp"

#include <cmath>
#include <string>

namespace cvmdi {

FiniteSizeParams FiniteSizeParams::from_ratio(std::int64_t n_bar, double r) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError("ratio r = n/N must lie in (0, 1), got " + detail::format_value(r));
  FiniteSizeParams fs;
  fs.n_bar = n_bar;
  fs.m = n_bar - std::llround(r * static_cast<double>(n_bar));
  fs.validate();
  return fs;
}

void FiniteSizeParams::validate() const {
  if (n_bar < 2) throw DomainError("block size N must be >= 2, got " + std::to_string(n_bar));
  if (m <= 0 || m >= n_bar) {
    throw DomainError("estimation sample count m must satisfy 0 < m < N (m=" + std::to_string(m) +
                      ", N=" + std::to_string(n_bar) + ")");
  }
  if (!(eps_pe > 0.0 && eps_pe < 1.0)) throw DomainError("eps_pe must lie in (0, 1)");
  if (!(eps_pa > 0.0 && eps_pa < 1.0)) throw DomainError("eps_pa must lie in (0, 1)");
  if (!(z >= 0.0)) throw DomainError("z must be >= 0");
  if (!(delta_prefactor >= 0.0)) throw DomainError("delta prefactor must be >= 0");
}

double delta_n(double n, double eps_pa, double prefactor) {
  if (!(n >= 1.0)) throw DomainError("delta_n needs n >= 1, got " + detail::format_value(n));
  if (!(eps_pa > 0.0 && eps_pa < 1.0)) {
    throw DomainError("eps_pa must lie in (0, 1), got " + detail::format_value(eps_pa));
  }
  return prefactor * std::sqrt(std::log2(2.0 / eps_pa) / n);
}

FiniteSizeBreakdown finite_size_breakdown(const ProtocolParams& p, const EstimationReport& report,
                                          const FiniteSizeParams& fs) {
  fs.validate();
  FiniteSizeBreakdown out;
  out.worst_case = asymptotic_rate_breakdown(p, report.tau_a_low, report.tau_b_low, report.worst_noise());
  out.delta = delta_n(static_cast<double>(fs.n()), fs.eps_pa, fs.delta_prefactor);
  out.ratio = fs.ratio();
  out.key_rate = out.ratio * (out.worst_case.key_rate - out.delta);
  return out;
}

double finite_size_key_rate(const ProtocolParams& p, const EstimationReport& report, const FiniteSizeParams& fs) {
  return finite_size_breakdown(p, report, fs).key_rate;
}

}  // namespace cvmdi
