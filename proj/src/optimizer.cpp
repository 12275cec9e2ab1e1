#include "cvmdi/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cvmdi/simulator.hpp"

namespace cvmdi {

namespace {

GridAxis refine(const GridAxis& axis, double centre, double lo_bound, double hi_bound, double shrink) {
  GridAxis out = axis;
  if (axis.points <= 1) return out;
  if (axis.log_spaced) {
    const double half = (std::log10(axis.hi) - std::log10(axis.lo)) / (2.0 * shrink);
    const double c = std::log10(centre);
    out.lo = std::max(std::pow(10.0, c - half), lo_bound);
    out.hi = std::min(std::pow(10.0, c + half), hi_bound);
  } else {
    const double half = (axis.hi - axis.lo) / (2.0 * shrink);
    out.lo = std::max(centre - half, lo_bound);
    out.hi = std::min(centre + half, hi_bound);
  }
  return out;
}

}  // namespace

bool preferred(const Evaluation& candidate, const Evaluation& incumbent) {
  if (candidate.rate != incumbent.rate) return candidate.rate > incumbent.rate;
  if (candidate.v_m != incumbent.v_m) return candidate.v_m < incumbent.v_m;
  return candidate.r > incumbent.r;
}

std::vector<double> GridAxis::values() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max(points, 0)));
  if (points == 1) {
    out.push_back(lo);
    return out;
  }
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(points - 1);
    if (log_spaced) {
      out.push_back(std::pow(10.0, std::log10(lo) + t * (std::log10(hi) - std::log10(lo))));
    } else {
      out.push_back(lo + t * (hi - lo));
    }
  }
  // Pin the end points exactly.
  out.front() = lo;
  out.back() = hi;
  return out;
}

void GridAxis::validate(const char* name) const {
  if (points < 1) throw ConfigError(std::string(name) + " grid needs at least one point");
  if (!(lo <= hi)) throw ConfigError(std::string(name) + " grid has lo > hi");
  if (log_spaced && !(lo > 0.0)) throw ConfigError(std::string(name) + " log grid needs lo > 0");
}

void OptimizationSpec::validate() const {
  scenario.channel.validate();
  v_m_grid.validate("v_m");
  if (!(v_m_grid.lo > 0.0)) throw ConfigError("v_m grid must be positive");
  if (!(v_m_min > 0.0 && v_m_min <= v_m_grid.lo && v_m_grid.hi <= v_m_max)) {
    throw ConfigError("v_m refinement bounds must contain the v_m grid");
  }
  if (scenario.n_bar) {
    r_grid.validate("r");
    if (!(r_min > 0.0 && r_max < 1.0 && r_min <= r_grid.lo && r_grid.hi <= r_max)) {
      throw ConfigError("r grid and bounds must lie inside (0, 1)");
    }
  }
  if (refinement_rounds < 0) throw ConfigError("refinement rounds must be >= 0");
  if (!(shrink > 1.0)) throw ConfigError("refinement shrink factor must be > 1");
  if (!(scenario.xi > 0.0 && scenario.xi <= 1.0)) throw ConfigError("xi must lie in (0, 1]");
}

PointEvaluation evaluate_point(const Scenario& scenario, double v_m, double r, EstimationMode mode,
                               std::uint64_t seed) {
  if (!scenario.n_bar) throw ConfigError("finite-size evaluation needs a block size");
  const ProtocolParams protocol{v_m, scenario.xi};
  const NoiseVars noise = noise_from_attack(scenario.channel);
  PointEvaluation out;
  out.block = FiniteSizeParams::from_ratio(*scenario.n_bar, r);
  out.block.eps_pe = scenario.eps_pe;
  out.block.eps_pa = scenario.eps_pa;
  out.block.z = scenario.z;
  out.block.delta_prefactor = scenario.delta_prefactor;
  out.block.validate();

  const ChannelTruth truth{scenario.channel.tau_a, scenario.channel.tau_b, noise};
  if (mode == EstimationMode::analysis) {
    out.report = analytic_report(truth, v_m, static_cast<double>(out.block.m), out.block.z);
  } else {
    SimulationSpec sim;
    sim.channel = scenario.channel;
    sim.v_m = v_m;
    sim.m = static_cast<std::size_t>(std::max<std::int64_t>(out.block.m, 2));
    sim.trials = 1;
    sim.seed = seed;
    out.report = estimate_channel(sample_dataset(sim, 0), v_m, out.block.z);
  }
  out.breakdown = finite_size_breakdown(protocol, out.report, out.block);
  return out;
}

double scenario_rate(const Scenario& scenario, double v_m, double r, EstimationMode mode, std::uint64_t seed) {
  if (!scenario.n_bar) {
    const NoiseVars noise = noise_from_attack(scenario.channel);
    return asymptotic_key_rate(ProtocolParams{v_m, scenario.xi}, scenario.channel.tau_a, scenario.channel.tau_b,
                               noise);
  }
  return evaluate_point(scenario, v_m, r, mode, seed).breakdown.key_rate;
}

OptimizationResult optimize_key_rate(const OptimizationSpec& spec) {
  spec.validate();
  OptimizationResult result;
  const bool finite = spec.scenario.n_bar.has_value();

  GridAxis v_axis = spec.v_m_grid;
  GridAxis r_axis = finite ? spec.r_grid : GridAxis{1.0, 1.0, 1, false};
  std::optional<Evaluation> best;

  for (int round = 0; round <= spec.refinement_rounds; ++round) {
    for (double v_m : v_axis.values()) {
      for (double r : r_axis.values()) {
        const Evaluation e{v_m, r, scenario_rate(spec.scenario, v_m, r, spec.mode, spec.seed)};
        result.trace.push_back(e);
        if (!best || preferred(e, *best)) best = e;
      }
    }
    if (round == spec.refinement_rounds) break;
    v_axis = refine(v_axis, best->v_m, spec.v_m_min, spec.v_m_max, spec.shrink);
    if (finite) r_axis = refine(r_axis, best->r, spec.r_min, spec.r_max, spec.shrink);
  }

  result.v_m_star = best->v_m;
  result.r_star = best->r;
  result.k_star = best->rate;
  result.positive_rate = best->rate > 0.0;
  return result;
}

}  // namespace cvmdi
