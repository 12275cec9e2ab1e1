#pragma once

// Subcommands behind the cvmdi executable. Each returns its complete output
// (metadata header included) as text so it can be tested without a process.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cvmdi/channel.hpp"
#include "cvmdi/estimation.hpp"
#include "cvmdi/finite_size.hpp"
#include "cvmdi/optimizer.hpp"

namespace cvmdi::cli {

enum class Command { rate, sweep, modscan, simulate, optimize };
enum class Format { csv, json };
/// Bob's link only (relay next to Alice) or both links equal.
enum class Geometry { asymmetric, symmetric };

Command parse_command(std::string_view name);
std::string_view to_string(Command command);

struct RunConfig {
  Command command = Command::rate;
  Geometry geometry = Geometry::asymmetric;
  double tau_a = 0.98;
  std::vector<double> attenuation_db{2.0};  ///< Bob's (or the common) attenuation; one value except for sweep
  Attack attack = Attack::two_mode_optimal;
  double omega_a = 1.01;
  double omega_b = 1.01;
  double xi = 0.98;
  std::optional<std::int64_t> n_bar = 1'000'000'000;  ///< empty: asymptotic
  std::optional<double> v_m;    ///< fixed modulation; empty: optimize
  std::optional<double> ratio;  ///< fixed n/N; empty: optimize
  GridAxis v_m_grid{1.0, 1e3, 25, true};
  GridAxis r_grid{0.1, 0.9, 9, false};
  double eps_pa = kDefaultEpsPa;
  double eps_pe = kDefaultEpsPe;
  double z = kDefaultZ;
  double delta_prefactor = 1.0;
  EstimationMode mode = EstimationMode::analysis;
  std::size_t m = 100000;
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  Format format = Format::json;
  std::string dump_dataset;  ///< simulate: optional CSV dump of trial 0

  /// Throws ConfigError naming the first offending field.
  void validate() const;
  /// Channel at a given attenuation (dB) for this geometry and attack.
  ChannelParams channel_at(double attenuation_db) const;
};

/// Per-command defaults; each matches the reference scenario for that command.
RunConfig default_config(Command command);

nlohmann::json to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);

/// Recovers the resolved configuration embedded in an earlier output (CSV or JSON).
RunConfig config_from_output(std::string_view text);

/// "lo:hi:step" (inclusive), "a,b,c" or a single number.
std::vector<double> parse_db_range(std::string_view text);
/// "lo:hi:points".
GridAxis parse_grid(std::string_view text, bool log_spaced);

std::string cmd_rate(const RunConfig& config);
std::string cmd_sweep(const RunConfig& config);
std::string cmd_modscan(const RunConfig& config);
std::string cmd_simulate(const RunConfig& config);
std::string cmd_optimize(const RunConfig& config);

std::string run(const RunConfig& config);

/// Process exit code for an exception escaping run(): 2 config, 3 numerical/physicality.
int exit_code_for(const std::exception& error);

}  // namespace cvmdi::cli
