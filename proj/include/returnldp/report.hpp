#pragma once

// Subcommand orchestration and report output (CSV tables, JSON summaries,
// SVG curves). Files are written atomically into the output directory.

#include "returnldp/config.hpp"
#include "returnldp/error.hpp"
#include "returnldp/extended_real.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace returnldp {

struct RunOptions {
  std::filesystem::path out_dir = "out";
  bool crosscheck = false;
  bool timestamps = true;  ///< SVG metadata only; tables never carry timestamps
};

struct InvariantResult {
  std::string name;
  std::string value;
  std::string limit;
  bool passed = false;
  std::string detail;
};

struct RunOutcome {
  int exit_code = 0;  ///< 0 success, 1 some verified invariant failed
  std::vector<std::string> files;
  std::vector<InvariantResult> invariants;
};

std::vector<std::string> subcommand_names();

/// Runs one of validate, pressure, cgf, rate, approx, verify, report.
/// Library errors propagate as returnldp::Error.
RunOutcome run_subcommand(std::string_view name, const ExperimentConfig& cfg, const RunOptions& opts);

/// Machine-readable error record for standard error.
std::string error_json(ErrorKind kind, std::string_view message, std::string_view subcommand);

/// Shortest round-trip text of a finite double; "-inf"/"inf" for the tags.
std::string format_real(double x);
std::string format_real(const ExtendedReal& x);

/// Psi in closed form for the uniform full N-shift (constant potential) and
/// a union of k length-1 cylinders: -log((N e^{-alpha} - (N - k)) / k).
std::optional<double> closed_form_cgf(const ExperimentConfig& cfg, double alpha);

/// Writes `content` to dir/name through a temporary file and rename.
void write_atomic(const std::filesystem::path& dir, const std::string& name, const std::string& content);

}  // namespace returnldp
