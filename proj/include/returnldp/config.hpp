#pragma once

// Experiment configuration: JSON ingestion with field-level diagnostics and
// the bundled presets.

#include "returnldp/borel.hpp"
#include "returnldp/symbolic.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace returnldp {

enum class TargetKind { cylinders, interval, external };

struct TargetSpec {
  TargetKind kind = TargetKind::cylinders;
  std::optional<CylinderUnion> cylinders;  ///< kind == cylinders
  std::string lo = "0";                    ///< kind == interval
  std::string hi = "1";
  int threshold_depth = NaryThreshold::default_depth;
  std::string command;  ///< kind == external
};

struct Budgets {
  std::size_t state_cap = BlockSft::default_state_cap;
  double dp_budget = 1e9;
  long mc_samples = 1'000'000;
};

/// Parameters of the individual consistency checks run by `verify`.
struct CheckSettings {
  double v = 3.0;             ///< D_m criterion threshold
  int induced_horizon = 64;   ///< minimal truncation of the induced operator
  std::vector<double> duality_alphas{-1.0, 0.0, 0.3};
  std::optional<CylinderUnion> entrance_set;  ///< default: complement of R
  double entrance_alpha = -0.5;
  std::vector<int> entrance_ns{5, 10, 20, 40};
  double concentration_alpha = 0.2;
  double concentration_delta = 0.1;
  double concentration_margin = 0.05;
  int mc_n = 30;
  double mc_u = 4.0;
  int gibbs_n_max = 10;
  std::vector<double> complement_us{2.5, 3.0, 4.0};
};

struct ExperimentConfig {
  std::string preset;  ///< empty for custom configurations
  Sft system = Sft::full_shift(2);
  LocalPotential potential = LocalPotential::zero(Sft::full_shift(2));
  TargetSpec target;
  std::vector<double> alphas;
  std::vector<double> rate_alphas;  ///< empty: derived from the domain
  std::vector<double> us;
  std::vector<int> ms;
  std::vector<int> ns{10, 20, 40};
  Budgets budgets;
  std::uint64_t seed = 0;
  CheckSettings checks;
  std::string canonical;  ///< normalized JSON text the hash is taken over

  /// R for cylinder targets; throws ConfigError otherwise.
  const CylinderUnion& cylinders() const;
  bool has_oracle_target() const { return target.kind != TargetKind::cylinders; }
  /// Oracle for the target (cylinder targets give an exact oracle).
  std::unique_ptr<BorelOracle> make_oracle() const;
};

/// Parses configuration JSON text. Errors carry the line/column of syntax
/// errors or the JSON pointer of the offending field (ConfigError).
ExperimentConfig parse_config(std::string_view text, std::string_view source = "<config>");

/// Reads a file, or a preset when the argument is "preset:<name>".
ExperimentConfig load_config(const std::string& path_or_preset);

std::vector<std::string> preset_names();
/// Configuration JSON of a bundled preset (ConfigError when unknown).
std::string preset_json(std::string_view name);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace returnldp
