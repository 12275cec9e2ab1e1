#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cvmdi/channel.hpp"
#include "cvmdi/estimation.hpp"
#include "cvmdi/finite_size.hpp"

namespace cvmdi {

/// Evenly spaced candidates, in log10 space when `log_spaced`.
struct GridAxis {
  double lo = 1.0;
  double hi = 1.0;
  int points = 1;
  bool log_spaced = false;

  std::vector<double> values() const;
  void validate(const char* name) const;
};

/// Physical scenario plus the finite-size bookkeeping that does not depend on r.
struct Scenario {
  ChannelParams channel;
  double xi = 0.98;
  std::optional<std::int64_t> n_bar;  ///< empty: asymptotic rate
  double eps_pe = kDefaultEpsPe;
  double eps_pa = kDefaultEpsPa;
  double z = kDefaultZ;
  double delta_prefactor = 1.0;
};

struct OptimizationSpec {
  Scenario scenario;
  GridAxis v_m_grid{1.0, 1e3, 25, true};
  GridAxis r_grid{0.1, 0.9, 9, false};
  /// Refinement windows are clipped to these boxes.
  double v_m_min = 1.0, v_m_max = 1e3;
  double r_min = 1e-3, r_max = 1.0 - 1e-3;
  int refinement_rounds = 2;
  double shrink = 4.0;
  EstimationMode mode = EstimationMode::analysis;
  std::uint64_t seed = 1;  ///< protocol mode only

  void validate() const;
};

struct Evaluation {
  double v_m = 0.0;
  double r = 0.0;
  double rate = 0.0;
};

/// Strict ordering of evaluations: higher rate, then smaller V_M, then larger r.
bool preferred(const Evaluation& candidate, const Evaluation& incumbent);

struct OptimizationResult {
  double v_m_star = 0.0;
  double r_star = 0.0;
  double k_star = 0.0;
  bool positive_rate = false;
  std::vector<Evaluation> trace;
};

/// Everything behind one finite-size rate evaluation.
struct PointEvaluation {
  FiniteSizeParams block;
  EstimationReport report;
  FiniteSizeBreakdown breakdown;
};

/// Finite-size evaluation at (V_M, r); the scenario must carry a block size.
PointEvaluation evaluate_point(const Scenario& scenario, double v_m, double r,
                               EstimationMode mode = EstimationMode::analysis, std::uint64_t seed = 1);

/// Key rate at one (V_M, r) point. Asymptotic scenarios ignore r. Analysis mode bounds the
/// parameters with the closed-form variances at the true values; protocol mode simulates
/// the m estimation samples and runs the estimator on them.
double scenario_rate(const Scenario& scenario, double v_m, double r, EstimationMode mode = EstimationMode::analysis,
                     std::uint64_t seed = 1);

/// Coarse grid over (V_M, r) followed by `refinement_rounds` local grids of the same size,
/// each `shrink` times narrower and centred on the incumbent. Ties go to smaller V_M, then
/// larger r.
OptimizationResult optimize_key_rate(const OptimizationSpec& spec);

}  // namespace cvmdi
