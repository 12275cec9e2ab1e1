#include "cvmdi/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cvmdi/csv.hpp"
#include "cvmdi/keyrate.hpp"
#include "cvmdi/simulator.hpp"

namespace cvmdi::cli {

using nlohmann::json;

namespace {

constexpr std::int64_t kSweepLargeBlock = 1'000'000'000;
constexpr std::int64_t kSweepSmallBlock = 1'000'000;

std::string_view to_string(Geometry g) { return g == Geometry::asymmetric ? "asymmetric" : "symmetric"; }
std::string_view to_string(Format f) { return f == Format::csv ? "csv" : "json"; }

Geometry parse_geometry(std::string_view name) {
  if (name == "asymmetric") return Geometry::asymmetric;
  if (name == "symmetric") return Geometry::symmetric;
  throw ConfigError("geometry: expected asymmetric or symmetric, got '" + std::string(name) + "'");
}

Format parse_format(std::string_view name) {
  if (name == "csv") return Format::csv;
  if (name == "json") return Format::json;
  throw ConfigError("format: expected csv or json, got '" + std::string(name) + "'");
}

json grid_json(const GridAxis& g) { return {{"lo", g.lo}, {"hi", g.hi}, {"points", g.points}, {"log", g.log_spaced}}; }

GridAxis grid_from_json(const json& j) {
  return {j.at("lo").get<double>(), j.at("hi").get<double>(), j.at("points").get<int>(), j.at("log").get<bool>()};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

double clipped(double k) { return std::max(k, 0.0); }

// '#'-prefixed metadata block shared by every CSV output.
std::string csv_metadata(const RunConfig& config) {
  std::ostringstream os;
  os << "# cvmdi " << to_string(config.command) << '\n';
  os << "# config: " << to_json(config).dump() << '\n';
  os << "# assumption: eps_pa=" << csv::format_double(config.eps_pa)
     << " and Delta(n) prefactor=" << csv::format_double(config.delta_prefactor) << " are configurable choices\n";
  os << "# assumption: omega = 1 + excess noise; variances evaluated in " << to_string(config.mode) << " mode\n";
  return os.str();
}

json assumptions(const RunConfig& config) {
  return json::array({"eps_pa=" + csv::format_double(config.eps_pa) + " and Delta(n) prefactor=" +
                          csv::format_double(config.delta_prefactor) + " are configurable choices",
                      "omega = 1 + excess noise; variances evaluated in " + std::string(to_string(config.mode)) +
                          " mode"});
}

Scenario make_scenario(const RunConfig& c, const ChannelParams& channel, std::optional<std::int64_t> n_bar) {
  Scenario s;
  s.channel = channel;
  s.xi = c.xi;
  s.n_bar = n_bar;
  s.eps_pe = c.eps_pe;
  s.eps_pa = c.eps_pa;
  s.z = c.z;
  s.delta_prefactor = c.delta_prefactor;
  return s;
}

OptimizationSpec make_spec(const RunConfig& c, const Scenario& scenario) {
  OptimizationSpec spec;
  spec.scenario = scenario;
  spec.mode = c.mode;
  spec.seed = c.seed;
  if (c.v_m) {
    spec.v_m_grid = GridAxis{*c.v_m, *c.v_m, 1, true};
    spec.v_m_min = spec.v_m_max = *c.v_m;
  } else {
    spec.v_m_grid = c.v_m_grid;
    spec.v_m_min = c.v_m_grid.lo;
    spec.v_m_max = c.v_m_grid.hi;
  }
  if (c.ratio) {
    spec.r_grid = GridAxis{*c.ratio, *c.ratio, 1, false};
    spec.r_min = spec.r_max = *c.ratio;
  } else {
    spec.r_grid = c.r_grid;
    spec.r_min = std::min(1e-3, c.r_grid.lo);
    spec.r_max = std::max(1.0 - 1e-3, c.r_grid.hi);
  }
  return spec;
}

json channel_json(const ChannelParams& ch) {
  const NoiseVars noise = noise_from_attack(ch);
  return {{"tau_a", ch.tau_a},     {"tau_b", ch.tau_b},         {"omega_a", ch.omega_a},
          {"omega_b", ch.omega_b}, {"g", ch.g},                 {"g_prime", ch.g_prime},
          {"v_q_eps", noise.v_q_eps}, {"v_p_eps", noise.v_p_eps}};
}

json breakdown_json(const RateBreakdown& b) {
  return {{"i_ab", b.mutual_information}, {"i_h", b.holevo_bound}, {"k", b.key_rate}};
}

json report_json(const EstimationReport& r) {
  return {{"tau_a_hat", r.tau_a_hat},     {"tau_b_hat", r.tau_b_hat},     {"sigma_a", r.sigma_a},
          {"sigma_b", r.sigma_b},         {"v_q_eps_hat", r.v_q_eps_hat}, {"v_p_eps_hat", r.v_p_eps_hat},
          {"s_q", r.s_q},                 {"s_p", r.s_p},                 {"tau_a_low", r.tau_a_low},
          {"tau_b_low", r.tau_b_low},     {"v_q_eps_up", r.v_q_eps_up},   {"v_p_eps_up", r.v_p_eps_up},
          {"z", r.z}};
}

std::string json_output(const RunConfig& config, json result) {
  json out;
  out["command"] = to_string(config.command);
  out["config"] = to_json(config);
  out["assumptions"] = assumptions(config);
  out["result"] = std::move(result);
  return out.dump(2) + "\n";
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json("insufficient-data"); }

void require_format(const RunConfig& c, Format expected) {
  if (c.format != expected) {
    throw ConfigError("format: " + std::string(to_string(c.command)) + " only supports " +
                      std::string(to_string(expected)));
  }
}

}  // namespace

Command parse_command(std::string_view name) {
  if (name == "rate") return Command::rate;
  if (name == "sweep") return Command::sweep;
  if (name == "modscan") return Command::modscan;
  if (name == "simulate") return Command::simulate;
  if (name == "optimize") return Command::optimize;
  throw ConfigError("unknown command '" + std::string(name) + "'");
}

std::string_view to_string(Command command) {
  switch (command) {
    case Command::rate: return "rate";
    case Command::sweep: return "sweep";
    case Command::modscan: return "modscan";
    case Command::simulate: return "simulate";
    case Command::optimize: return "optimize";
  }
  return "unknown";
}

RunConfig default_config(Command command) {
  RunConfig c;
  c.command = command;
  switch (command) {
    case Command::rate:
    case Command::optimize:
      break;
    case Command::sweep:
      c.format = Format::csv;
      c.attenuation_db = parse_db_range("0:10:0.5");
      break;
    case Command::modscan:
      // Pure loss with tau_b = 0.7 and N = 1e6.
      c.format = Format::csv;
      c.attack = Attack::pure_loss;
      c.omega_a = c.omega_b = 1.0;
      c.attenuation_db = {-10.0 * std::log10(0.7)};
      c.n_bar = 1'000'000;
      break;
    case Command::simulate:
      c.attack = Attack::pure_loss;
      c.omega_a = c.omega_b = 1.0;
      c.attenuation_db = {-10.0 * std::log10(0.5)};
      c.v_m = 10.0;
      break;
  }
  return c;
}

void RunConfig::validate() const {
  if (!(tau_a >= 0.0 && tau_a <= 1.0)) throw ConfigError("tau-a: must lie in [0, 1]");
  if (attenuation_db.empty()) throw ConfigError("attenuation: the dB grid is empty");
  for (double db : attenuation_db) {
    if (!(db >= 0.0) || !std::isfinite(db)) throw ConfigError("attenuation: dB values must be finite and >= 0");
  }
  if (command != Command::sweep && attenuation_db.size() != 1) {
    throw ConfigError("attenuation: only sweep accepts a range of dB values");
  }
  if (!(omega_a >= 1.0)) throw ConfigError("omega-a: must be >= 1");
  if (!(omega_b >= 1.0)) throw ConfigError("omega-b: must be >= 1");
  if (!(xi > 0.0 && xi <= 1.0)) throw ConfigError("xi: must lie in (0, 1]");
  if (n_bar && *n_bar < 2) throw ConfigError("n-bar: must be >= 2");
  if (v_m && !(*v_m > 0.0)) throw ConfigError("v-m: must be > 0");
  if (ratio && !(*ratio > 0.0 && *ratio < 1.0)) throw ConfigError("ratio: must lie in (0, 1)");
  try {
    v_m_grid.validate("vm-grid");
    r_grid.validate("r-grid");
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  if (!(v_m_grid.lo > 0.0)) throw ConfigError("vm-grid: must be positive");
  if (!(r_grid.lo > 0.0 && r_grid.hi < 1.0)) throw ConfigError("r-grid: must lie inside (0, 1)");
  if (!(eps_pa > 0.0 && eps_pa < 1.0)) throw ConfigError("eps-pa: must lie in (0, 1)");
  if (!(eps_pe > 0.0 && eps_pe < 1.0)) throw ConfigError("eps-pe: must lie in (0, 1)");
  if (!(z >= 0.0)) throw ConfigError("z: must be >= 0");
  if (!(delta_prefactor >= 0.0)) throw ConfigError("delta-prefactor: must be >= 0");
  if (command == Command::simulate) {
    if (m < 2) throw ConfigError("m: must be >= 2");
    if (trials < 1) throw ConfigError("trials: must be >= 1");
    if (!v_m) throw ConfigError("v-m: simulate needs a fixed modulation variance");
  }
  try {
    for (double db : attenuation_db) static_cast<void>(noise_from_attack(channel_at(db)));
  } catch (const Error& e) {
    throw ConfigError(std::string("attack: ") + e.what());
  }
}

ChannelParams RunConfig::channel_at(double attenuation) const {
  const double tau = db_to_transmissivity(attenuation);
  const double ta = geometry == Geometry::symmetric ? tau : tau_a;
  ChannelParams ch = make_channel(attack, ta, tau, omega_a, omega_b);
  ch.validate();
  return ch;
}

json to_json(const RunConfig& c) {
  json j;
  j["command"] = to_string(c.command);
  j["geometry"] = to_string(c.geometry);
  j["tau_a"] = c.tau_a;
  j["attenuation_db"] = c.attenuation_db;
  j["attack"] = to_string(c.attack);
  j["omega_a"] = c.omega_a;
  j["omega_b"] = c.omega_b;
  j["xi"] = c.xi;
  j["n_bar"] = c.n_bar ? json(*c.n_bar) : json(nullptr);
  j["v_m"] = optional_json(c.v_m);
  j["ratio"] = optional_json(c.ratio);
  j["v_m_grid"] = grid_json(c.v_m_grid);
  j["r_grid"] = grid_json(c.r_grid);
  j["eps_pa"] = c.eps_pa;
  j["eps_pe"] = c.eps_pe;
  j["z"] = c.z;
  j["delta_prefactor"] = c.delta_prefactor;
  j["mode"] = to_string(c.mode);
  j["m"] = c.m;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["format"] = to_string(c.format);
  j["dump_dataset"] = c.dump_dataset;
  return j;
}

RunConfig config_from_json(const json& j) {
  try {
    RunConfig c;
    c.command = parse_command(j.at("command").get<std::string>());
    c.geometry = parse_geometry(j.at("geometry").get<std::string>());
    c.tau_a = j.at("tau_a").get<double>();
    c.attenuation_db = j.at("attenuation_db").get<std::vector<double>>();
    c.attack = parse_attack(j.at("attack").get<std::string>());
    c.omega_a = j.at("omega_a").get<double>();
    c.omega_b = j.at("omega_b").get<double>();
    c.xi = j.at("xi").get<double>();
    c.n_bar = j.at("n_bar").is_null() ? std::nullopt : std::optional<std::int64_t>(j.at("n_bar").get<std::int64_t>());
    c.v_m = j.at("v_m").is_null() ? std::nullopt : std::optional<double>(j.at("v_m").get<double>());
    c.ratio = j.at("ratio").is_null() ? std::nullopt : std::optional<double>(j.at("ratio").get<double>());
    c.v_m_grid = grid_from_json(j.at("v_m_grid"));
    c.r_grid = grid_from_json(j.at("r_grid"));
    c.eps_pa = j.at("eps_pa").get<double>();
    c.eps_pe = j.at("eps_pe").get<double>();
    c.z = j.at("z").get<double>();
    c.delta_prefactor = j.at("delta_prefactor").get<double>();
    c.mode = parse_mode(j.at("mode").get<std::string>());
    c.m = j.at("m").get<std::size_t>();
    c.trials = j.at("trials").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.format = parse_format(j.at("format").get<std::string>());
    c.dump_dataset = j.at("dump_dataset").get<std::string>();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: malformed embedded configuration: ") + e.what());
  }
}

RunConfig config_from_output(std::string_view text) {
  const std::string_view trimmed = csv::trim(text);
  if (!trimmed.empty() && trimmed.front() == '{') {
    json j;
    try {
      j = json::parse(trimmed);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("replay: not valid JSON: ") + e.what());
    }
    if (!j.contains("config")) throw ConfigError("replay: JSON output has no config field");
    return config_from_json(j.at("config"));
  }
  constexpr std::string_view marker = "# config: ";
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    const std::string_view line = text.substr(start, end - start);
    if (line.substr(0, marker.size()) == marker) {
      try {
        return config_from_json(json::parse(line.substr(marker.size())));
      } catch (const json::exception& e) {
        throw ConfigError(std::string("replay: bad config line: ") + e.what());
      }
    }
    start = end + 1;
  }
  throw ConfigError("replay: no '# config:' metadata line found");
}

std::vector<double> parse_db_range(std::string_view text) {
  text = csv::trim(text);
  if (text.empty()) throw ConfigError("attenuation: empty dB specification");
  try {
    if (text.find(':') != std::string_view::npos) {
      const auto parts = csv::split(text, ':');
      if (parts.size() != 3) throw ConfigError("attenuation: range must be lo:hi:step");
      const double lo = csv::parse_double(parts[0]);
      const double hi = csv::parse_double(parts[1]);
      const double step = csv::parse_double(parts[2]);
      if (!(step > 0.0)) throw ConfigError("attenuation: range step must be > 0");
      std::vector<double> out;
      if (hi < lo) return out;  // zero-length; rejected by validate()
      const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
      for (long i = 0; i <= count; ++i) out.push_back(lo + static_cast<double>(i) * step);
      return out;
    }
    std::vector<double> out;
    for (auto field : csv::split(text, ',')) out.push_back(csv::parse_double(field));
    return out;
  } catch (const DatasetError& e) {
    throw ConfigError(std::string("attenuation: ") + e.what());
  }
}

GridAxis parse_grid(std::string_view text, bool log_spaced) {
  const auto parts = csv::split(csv::trim(text), ':');
  if (parts.size() != 3) throw ConfigError("grid: expected lo:hi:points, got '" + std::string(text) + "'");
  try {
    GridAxis g;
    g.lo = csv::parse_double(parts[0]);
    g.hi = csv::parse_double(parts[1]);
    const double points = csv::parse_double(parts[2]);
    if (points != std::floor(points) || points < 1) throw ConfigError("grid: point count must be a positive integer");
    g.points = static_cast<int>(points);
    g.log_spaced = log_spaced;
    return g;
  } catch (const DatasetError& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

std::string cmd_rate(const RunConfig& config) {
  config.validate();
  require_format(config, Format::json);
  const ChannelParams channel = config.channel_at(config.attenuation_db.front());
  const Scenario scenario = make_scenario(config, channel, config.n_bar);
  const OptimizationResult opt = optimize_key_rate(make_spec(config, scenario));

  const NoiseVars noise = noise_from_attack(channel);
  const RateBreakdown asymptotic =
      asymptotic_rate_breakdown(ProtocolParams{opt.v_m_star, config.xi}, channel.tau_a, channel.tau_b, noise);

  json result;
  result["attenuation_db"] = config.attenuation_db.front();
  result["channel"] = channel_json(channel);
  result["v_m"] = opt.v_m_star;
  result["asymptotic"] = breakdown_json(asymptotic);
  double k = asymptotic.key_rate;
  if (config.n_bar) {
    const PointEvaluation point = evaluate_point(scenario, opt.v_m_star, opt.r_star, config.mode, config.seed);
    k = point.breakdown.key_rate;
    result["finite_size"] = {{"n_bar", point.block.n_bar},
                             {"m", point.block.m},
                             {"n", point.block.n()},
                             {"r", point.breakdown.ratio},
                             {"delta", point.breakdown.delta},
                             {"estimation", report_json(point.report)},
                             {"worst_case", breakdown_json(point.breakdown.worst_case)},
                             {"k", k}};
  } else {
    result["finite_size"] = nullptr;
  }
  result["k"] = k;
  result["k_clipped"] = clipped(k);
  result["no_positive_rate"] = !(k > 0.0);
  return json_output(config, std::move(result));
}

std::string cmd_sweep(const RunConfig& config) {
  config.validate();
  require_format(config, Format::csv);
  std::ostringstream os;
  os << csv_metadata(config);
  os << "attenuation_db,k_asymptotic,k_N1e9,k_N1e6,v_m_star,r_star,"
        "k_asymptotic_clipped,k_N1e9_clipped,k_N1e6_clipped,v_m_star_asymptotic,v_m_star_N1e6,r_star_N1e6\n";
  for (double db : config.attenuation_db) {
    const ChannelParams channel = config.channel_at(db);
    const OptimizationResult asym = optimize_key_rate(make_spec(config, make_scenario(config, channel, std::nullopt)));
    const OptimizationResult large =
        optimize_key_rate(make_spec(config, make_scenario(config, channel, kSweepLargeBlock)));
    const OptimizationResult small =
        optimize_key_rate(make_spec(config, make_scenario(config, channel, kSweepSmallBlock)));
    using csv::format_double;
    os << format_double(db) << ',' << format_double(asym.k_star) << ',' << format_double(large.k_star) << ','
       << format_double(small.k_star) << ',' << format_double(large.v_m_star) << ',' << format_double(large.r_star)
       << ',' << format_double(clipped(asym.k_star)) << ',' << format_double(clipped(large.k_star)) << ','
       << format_double(clipped(small.k_star)) << ',' << format_double(asym.v_m_star) << ','
       << format_double(small.v_m_star) << ',' << format_double(small.r_star) << '\n';
  }
  return os.str();
}

std::string cmd_modscan(const RunConfig& config) {
  config.validate();
  require_format(config, Format::csv);
  const ChannelParams channel = config.channel_at(config.attenuation_db.front());
  const Scenario scenario = make_scenario(config, channel, config.n_bar);
  const std::vector<double> v_values = config.v_m ? std::vector<double>{*config.v_m} : config.v_m_grid.values();

  std::ostringstream os;
  os << csv_metadata(config);
  os << "v_m,rate,r_star,rate_clipped\n";
  for (double v_m : v_values) {
    RunConfig fixed = config;
    fixed.v_m = v_m;
    const OptimizationResult opt = optimize_key_rate(make_spec(fixed, scenario));
    using csv::format_double;
    os << format_double(v_m) << ',' << format_double(opt.k_star) << ','
       << format_double(config.n_bar ? opt.r_star : 1.0) << ',' << format_double(clipped(opt.k_star)) << '\n';
  }
  return os.str();
}

std::string cmd_simulate(const RunConfig& config) {
  config.validate();
  require_format(config, Format::json);
  SimulationSpec spec;
  spec.channel = config.channel_at(config.attenuation_db.front());
  spec.v_m = *config.v_m;
  spec.m = config.m;
  spec.trials = config.trials;
  spec.seed = config.seed;
  spec.validate();

  if (!config.dump_dataset.empty()) {
    std::ofstream out(config.dump_dataset);
    if (!out) throw ConfigError("dump-dataset: cannot open " + config.dump_dataset);
    write_dataset_csv(out, sample_dataset(spec, 0), csv_metadata(config));
  }

  const ValidationTolerances tol;
  const TrialStatistics stats = run_estimator_trials(spec, config.mode, tol);

  json comparisons = json::array();
  for (const auto& c : stats.comparisons) {
    comparisons.push_back({{"quantity", c.quantity},
                           {"analytic_mean", c.analytic_mean},
                           {"empirical_mean", c.empirical_mean},
                           {"standard_error", optional_number(c.standard_error)},
                           {"mean_deviation_se", optional_number(c.mean_deviation_se)},
                           {"analytic_variance", c.analytic_variance},
                           {"empirical_variance", optional_number(c.empirical_variance)},
                           {"variance_relative_deviation", optional_number(c.variance_relative_deviation)},
                           {"mean_ok", c.mean_ok},
                           {"variance_ok", c.variance_ok}});
  }
  json result;
  result["channel"] = channel_json(spec.channel);
  result["v_m"] = spec.v_m;
  result["m"] = spec.m;
  result["trials"] = spec.trials;
  result["insufficient_data"] = stats.insufficient_data;
  result["tolerances"] = {{"variance_relative", tol.variance_relative},
                          {"mean_standard_errors", tol.mean_standard_errors},
                          {"chi_square_relative", tol.chi_square_relative}};
  result["comparisons"] = std::move(comparisons);
  result["tau_a_bias"] = {{"analytic", stats.tau_a_bias.analytic},
                          {"raw", stats.tau_a_bias.raw},
                          {"control_variate", stats.tau_a_bias.control_variate},
                          {"control_variate_se", optional_number(stats.tau_a_bias.control_variate_se)}};
  result["chi_square"] = {{"degrees_of_freedom", stats.chi_square.degrees_of_freedom},
                          {"empirical_mean", stats.chi_square.empirical_mean},
                          {"empirical_variance", optional_number(stats.chi_square.empirical_variance)},
                          {"mean_relative_deviation", stats.chi_square.mean_relative_deviation},
                          {"variance_relative_deviation",
                           optional_number(stats.chi_square.variance_relative_deviation)},
                          {"mean_ok", stats.chi_square.mean_ok},
                          {"variance_ok", stats.chi_square.variance_ok}};
  result["pass"] = stats.all_ok;
  return json_output(config, std::move(result));
}

std::string cmd_optimize(const RunConfig& config) {
  config.validate();
  const ChannelParams channel = config.channel_at(config.attenuation_db.front());
  const OptimizationResult opt = optimize_key_rate(make_spec(config, make_scenario(config, channel, config.n_bar)));
  if (config.format == Format::csv) {
    std::ostringstream os;
    os << csv_metadata(config);
    os << "v_m,r,rate\n";
    for (const auto& e : opt.trace) {
      os << csv::format_double(e.v_m) << ',' << csv::format_double(e.r) << ',' << csv::format_double(e.rate) << '\n';
    }
    return os.str();
  }
  json result;
  result["channel"] = channel_json(channel);
  result["v_m_star"] = opt.v_m_star;
  result["r_star"] = config.n_bar ? json(opt.r_star) : json(nullptr);
  result["k_star"] = opt.k_star;
  result["no_positive_rate"] = !opt.positive_rate;
  result["evaluations"] = opt.trace.size();
  return json_output(config, std::move(result));
}

std::string run(const RunConfig& config) {
  switch (config.command) {
    case Command::rate: return cmd_rate(config);
    case Command::sweep: return cmd_sweep(config);
    case Command::modscan: return cmd_modscan(config);
    case Command::simulate: return cmd_simulate(config);
    case Command::optimize: return cmd_optimize(config);
  }
  throw ConfigError("unknown command");
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const PhysicalityError*>(&error) || dynamic_cast<const NumericalError*>(&error)) return 3;
  return 2;
}

}  // namespace cvmdi::cli
