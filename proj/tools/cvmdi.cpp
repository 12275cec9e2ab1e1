// cvmdi: key rates and estimator validation for relay-based CV QKD.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "cvmdi/commands.hpp"
#include "cvmdi/csv.hpp"
#include "cvmdi/errors.hpp"

namespace {

using cvmdi::ConfigError;
using namespace cvmdi::cli;

struct RawFlags {
  std::optional<double> tau_a, omega_a, omega_b, eps, xi, v_m, ratio, eps_pa, eps_pe, z, delta_prefactor;
  std::optional<std::string> bob_db, common_db, attack, n_bar, vm_grid, r_grid, mode, format, replay;
  std::optional<std::size_t> m, trials;
  std::optional<std::uint64_t> seed;
  bool optimize_vm = false;
  bool optimize_ratio = false;
  std::string out;
  std::string dump_dataset;
};

void add_flags(CLI::App& sub, RawFlags& f) {
  sub.add_option("--tau-a", f.tau_a, "Alice's link transmissivity");
  sub.add_option("--bob-db", f.bob_db, "Bob's attenuation in dB (sweep: lo:hi:step)");
  sub.add_option("--common-db", f.common_db, "attenuation of both links in dB (symmetric relay)");
  sub.add_option("--omega-a", f.omega_a, "Eve's thermal variance on Alice's link (SNU)");
  sub.add_option("--omega-b", f.omega_b, "Eve's thermal variance on Bob's link (SNU)");
  sub.add_option("--eps", f.eps, "excess noise; sets omega-a = omega-b = 1 + eps");
  sub.add_option("--attack", f.attack, "pure-loss | collective | two-mode-optimal");
  sub.add_option("--xi", f.xi, "reconciliation efficiency");
  sub.add_option("--n-bar", f.n_bar, "block size N (or 'inf' for the asymptotic rate)");
  sub.add_option("--ratio", f.ratio, "fixed n/N");
  sub.add_flag("--optimize-ratio", f.optimize_ratio, "optimize n/N (default unless --ratio)");
  sub.add_option("--v-m", f.v_m, "fixed modulation variance (SNU)");
  sub.add_flag("--optimize-vm", f.optimize_vm, "optimize V_M (default unless --v-m)");
  sub.add_option("--vm-grid", f.vm_grid, "log-spaced V_M grid lo:hi:points");
  sub.add_option("--r-grid", f.r_grid, "linear r grid lo:hi:points");
  sub.add_option("--eps-pa", f.eps_pa, "privacy amplification failure probability");
  sub.add_option("--eps-pe", f.eps_pe, "parameter estimation failure probability");
  sub.add_option("--z", f.z, "confidence multiplier for worst-case bounds");
  sub.add_option("--delta-prefactor", f.delta_prefactor, "prefactor of the finite-size penalty");
  sub.add_option("--mode", f.mode, "analysis | protocol");
  sub.add_option("--m", f.m, "samples per trial");
  sub.add_option("--trials", f.trials, "Monte Carlo trials");
  sub.add_option("--seed", f.seed, "RNG seed");
  sub.add_option("--out", f.out, "output file (default stdout)");
  sub.add_option("--format", f.format, "csv | json");
  sub.add_option("--dump-dataset", f.dump_dataset, "simulate: write trial 0 as CSV");
  sub.add_option("--replay", f.replay, "re-run the configuration embedded in an earlier output");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("replay: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig resolve(Command command, const RawFlags& f) {
  if (f.replay) return config_from_output(read_file(*f.replay));

  RunConfig c = default_config(command);
  if (f.tau_a) c.tau_a = *f.tau_a;
  if (f.bob_db && f.common_db) throw ConfigError("bob-db: conflicts with --common-db");
  if (f.bob_db) {
    c.geometry = Geometry::asymmetric;
    c.attenuation_db = parse_db_range(*f.bob_db);
  }
  if (f.common_db) {
    c.geometry = Geometry::symmetric;
    c.attenuation_db = parse_db_range(*f.common_db);
  }
  if (f.attack) c.attack = cvmdi::parse_attack(*f.attack);
  if (f.eps) c.omega_a = c.omega_b = 1.0 + *f.eps;
  if (f.omega_a) c.omega_a = *f.omega_a;
  if (f.omega_b) c.omega_b = *f.omega_b;
  if (f.xi) c.xi = *f.xi;
  if (f.n_bar) {
    if (*f.n_bar == "inf") {
      c.n_bar.reset();
    } else {
      double n = 0.0;
      try {
        n = cvmdi::csv::parse_double(*f.n_bar);
      } catch (const cvmdi::Error&) {
        throw ConfigError("n-bar: not a number: " + *f.n_bar);
      }
      if (!(n >= 2.0) || n != std::floor(n) || n > 9e18) throw ConfigError("n-bar: must be an integer >= 2");
      c.n_bar = static_cast<std::int64_t>(n);
    }
  }
  if (f.v_m && f.optimize_vm) throw ConfigError("v-m: conflicts with --optimize-vm");
  if (f.ratio && f.optimize_ratio) throw ConfigError("ratio: conflicts with --optimize-ratio");
  if (f.v_m) c.v_m = *f.v_m;
  if (f.optimize_vm) c.v_m.reset();
  if (f.ratio) c.ratio = *f.ratio;
  if (f.optimize_ratio) c.ratio.reset();
  if (f.vm_grid) c.v_m_grid = parse_grid(*f.vm_grid, true);
  if (f.r_grid) c.r_grid = parse_grid(*f.r_grid, false);
  if (f.eps_pa) c.eps_pa = *f.eps_pa;
  if (f.eps_pe) c.eps_pe = *f.eps_pe;
  if (f.z) c.z = *f.z;
  if (f.delta_prefactor) c.delta_prefactor = *f.delta_prefactor;
  if (f.mode) c.mode = cvmdi::parse_mode(*f.mode);
  if (f.m) c.m = *f.m;
  if (f.trials) c.trials = *f.trials;
  if (f.seed) c.seed = *f.seed;
  if (f.format) {
    if (*f.format == "csv") {
      c.format = Format::csv;
    } else if (*f.format == "json") {
      c.format = Format::json;
    } else {
      throw ConfigError("format: expected csv or json");
    }
  }
  c.dump_dataset = f.dump_dataset;
  c.validate();
  return c;
}

// Writes via a temporary sibling and a rename so readers never see a partial file.
void write_output(const std::string& path, const std::string& payload) {
  if (path.empty()) {
    std::cout << payload;
    return;
  }
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("out: cannot open " + tmp.string());
    out << payload;
    if (!out) throw ConfigError("out: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Key rates and estimator validation for CV measurement-device-independent QKD"};
  app.require_subcommand(1);

  RawFlags flags;
  std::optional<Command> chosen;
  for (Command command : {Command::rate, Command::sweep, Command::modscan, Command::simulate, Command::optimize}) {
    const std::string name(to_string(command));
    CLI::App* sub = app.add_subcommand(name, "");
    add_flags(*sub, flags);
    sub->callback([&chosen, command] { chosen = command; });
  }
  app.get_subcommand("rate")->description("single-point asymptotic and finite-size key rate (JSON)");
  app.get_subcommand("sweep")->description("key rate versus attenuation for N=inf, 1e9, 1e6 (CSV)");
  app.get_subcommand("modscan")->description("key rate versus modulation variance (CSV)");
  app.get_subcommand("simulate")->description("Monte Carlo validation of the channel estimators (JSON)");
  app.get_subcommand("optimize")->description("optimum over (V_M, r) with evaluation trace");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const RunConfig config = resolve(*chosen, flags);
    write_output(flags.out, run(config));
    return 0;
  } catch (const cvmdi::Error& e) {
    std::cerr << "cvmdi: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "cvmdi: " << e.what() << '\n';
    return 3;
  }
}
