#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "harmrec/array_signal.hpp"
#include "harmrec/experiment.hpp"
#include "harmrec/solvers.hpp"

namespace harmrec::cli {

struct ArraySection {
  int m1_count = 51;
  int m2_count = 16;
  Index element_count = 40;
  std::uint64_t seed = 1;
};

struct ScenarioSection {
  /// Explicit targets; when empty, k_min..k_max random targets are drawn.
  std::vector<Target> targets;
  int k_min = 1;
  int k_max = 3;
  /// Snap random harmonics to the solver grid.
  bool on_grid = false;
  /// noise_variance wins over snr_db when both are set.
  std::optional<double> snr_db = 15.0;
  std::optional<double> noise_variance;
  std::uint64_t seed = 2;
};

struct GridSection {
  Index l1 = 64;
  Index l2 = 32;
};

struct SolverSection {
  Algorithm algorithm = Algorithm::fista;
  Backend backend = Backend::fast;
  int iterations = 400;
  /// Absolute tau; tau_fraction * ||D_s^H y||_inf when unset.
  std::optional<double> tau;
  double tau_fraction = 0.1;
  double rho = 1.0;
  std::optional<double> step_size;
  double support_threshold = 0.1;
};

struct VerifySection {
  double tolerance = 1e-10;
  Index dense_cap = 4096;
  /// Shifts one frequency of grid 1 to break uniformity on purpose.
  bool perturb_grid = false;
};

struct Config {
  ArraySection array;
  ScenarioSection scenario;
  GridSection grid;
  SolverSection solver;
  VerifySection verify;
  ExperimentConfig experiment;
  std::size_t memory_budget_bytes = kDefaultMemoryBudget;
};

nlohmann::ordered_json to_json(const Config& config);
/// Throws ConfigError naming the first missing, unknown or invalid field.
Config from_json(const nlohmann::json& j);

/// Applies "a.b.c=value" to j. The value is parsed as JSON when possible and
/// taken as a string otherwise. The path must already exist in j.
void apply_override(nlohmann::json& j, const std::string& assignment);

/// Defaults, then the file (if any, comments allowed), then the overrides.
Config load_config(const std::string& path, const std::vector<std::string>& overrides);

std::string dump_config(const Config& config);

}  // namespace harmrec::cli
