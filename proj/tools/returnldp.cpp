// Command-line front end: returnldp <subcommand> --config <file> [options].

#include "returnldp/config.hpp"
#include "returnldp/error.hpp"
#include "returnldp/report.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

std::string preset_list() {
  std::string s;
  for (const auto& p : returnldp::preset_names()) s += (s.empty() ? "" : ", ") + p;
  return s;
}

std::string describe(const std::string& name) {
  if (name == "validate") return "check the system, potential and target and report the domain";
  if (name == "pressure") return "pressure and the Gibbs Markov measure";
  if (name == "cgf") return "cumulant generating function of return times on the alpha grid";
  if (name == "rate") return "rate function by Legendre transform, with an SVG plot";
  if (name == "approx") return "cylinder approximations of a Borel target and their sandwich";
  if (name == "verify") return "exact and Monte Carlo checks of every reported quantity";
  if (name == "report") return "all of the above into one output directory";
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace returnldp;

  CLI::App app{"Large deviations of return times in subshifts of finite type"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = "out";
  bool crosscheck = false;
  bool no_timestamps = false;
  std::optional<std::uint64_t> seed;

  for (const auto& name : subcommand_names()) {
    CLI::App* sub = app.add_subcommand(name, describe(name));
    sub->add_option("--config", config, "configuration file, or preset:NAME (" + preset_list() + ")")->required();
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_flag("--crosscheck", crosscheck, "recompute with independent methods and enforce tolerances");
    sub->add_option("--seed", seed, "override the configured random seed");
    sub->add_flag("--no-timestamps", no_timestamps, "omit generation time from SVG metadata");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_json(ErrorKind::ConfigError, e.what(), "") << '\n';
    return exit_code_for(ErrorKind::ConfigError);
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();
  try {
    ExperimentConfig cfg = load_config(config);
    if (seed) cfg.seed = *seed;
    RunOptions opts;
    opts.out_dir = out_dir;
    opts.crosscheck = crosscheck;
    opts.timestamps = !no_timestamps;
    const RunOutcome outcome = run_subcommand(subcommand, cfg, opts);
    for (const auto& f : outcome.files) std::cout << (opts.out_dir / f).string() << '\n';
    for (const auto& r : outcome.invariants) {
      if (!r.passed) std::cerr << "FAILED " << r.name << ": " << r.value << " (limit " << r.limit << ") " << r.detail << '\n';
    }
    return outcome.exit_code;
  } catch (const Error& e) {
    std::cerr << error_json(e.kind(), e.what(), subcommand) << '\n';
    return exit_code_for(e.kind());
  } catch (const std::bad_alloc&) {
    std::cerr << error_json(ErrorKind::BudgetExceeded, "out of memory", subcommand) << '\n';
    return exit_code_for(ErrorKind::BudgetExceeded);
  }
}
