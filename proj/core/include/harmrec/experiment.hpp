#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "harmrec/array_signal.hpp"
#include "harmrec/dictionary.hpp"
#include "harmrec/solvers.hpp"

namespace harmrec {

/// Runtime and accuracy sweep of regular against fast solvers. Defaults are
/// the 51 x 16 URA thinned to 40 elements, L2 = 32, 15 dB SNR, 1..10 sources.
struct ExperimentConfig {
  int m1_count = 51;
  int m2_count = 16;
  Index element_count = 40;
  Index l2 = 32;
  std::vector<Index> l1_values{64, 128, 256, 512};
  std::vector<int> iteration_values{50, 100, 200, 400};
  double snr_db = 15.0;
  int k_min = 1;
  int k_max = 10;
  int trials = 10;
  /// Fast solves per trial; the minimum loop time is recorded.
  int fast_repeats = 1;
  std::uint64_t base_seed = 20240601;
  std::vector<Algorithm> solvers{Algorithm::ista, Algorithm::fista, Algorithm::admm};
  std::size_t memory_budget_bytes = kDefaultMemoryBudget;
  double tau_fraction = 0.1;  // tau = tau_fraction * ||D_s^H y_s||_inf
  double rho = 1.0;

  /// Throws InvalidArgument naming the offending field.
  void validate() const;
};

struct TrialRecord {
  Algorithm solver = Algorithm::ista;
  Index l1 = 0;
  Index l2 = 0;
  int n_iter = 0;
  int trial_index = 0;
  std::uint64_t seed = 0;
  int source_count = 0;
  Index estimate_nnz = 0;  // nonzero entries of the fast estimate
  std::optional<double> t_reg_ms;  // absent when the dense problem exceeds the budget
  double t_fast_ms = 0.0;
  /// Zero when both estimates are exactly zero, infinite when only the
  /// regular one is.
  std::optional<double> epsilon_r;
  std::optional<double> setup_reg_ms;
  double setup_fast_ms = 0.0;
};

struct CellSummary {
  Algorithm solver = Algorithm::ista;
  Index l1 = 0;
  Index l2 = 0;
  int n_iter = 0;
  int trials = 0;
  std::optional<double> mean_t_reg_ms;
  double mean_t_fast_ms = 0.0;
  std::optional<double> mean_epsilon_r;
};

struct GridResult {
  std::vector<TrialRecord> records;
  std::vector<CellSummary> cells;
};

/// One random draw of the single-snapshot scenario.
struct Scenario {
  ArrayGeometry geometry;
  std::vector<Target> targets;
  Snapshot snapshot;
};

/// Geometry from the seed (aperture-preserving thinning unless element_count
/// is the full grid), K uniform in [k_min, k_max], harmonics uniform in
/// [-1/2, 1/2)^2, unit-modulus amplitudes with uniform phase, noise at snr_db.
Scenario random_scenario(int m1_count, int m2_count, Index element_count, int k_min, int k_max,
                         double snr_db, std::uint64_t seed);

/// Deterministic, well-mixed combination of a base seed with cell indices.
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept;
std::uint64_t trial_seed(std::uint64_t base_seed, Algorithm solver, Index l1, int n_iter, int trial_index) noexcept;

/// ||a - b||_2 / ||a||_2. Throws UndefinedReference when a is zero.
double relative_error(const ComplexVector& a, const ComplexVector& b);

TrialRecord run_trial(const ExperimentConfig& config, Algorithm solver, Index l1, int n_iter, int trial_index);

/// Arithmetic means over the records of one cell.
CellSummary summarize_cell(std::span<const TrialRecord> records);

using TrialCallback = std::function<void(const TrialRecord&)>;

/// Full sweep over solvers x L1 x n_iter x trials, run sequentially.
GridResult run_grid(const ExperimentConfig& config, const TrialCallback& on_trial = {});

/// Upper bound on epsilon_r accepted for each solver family.
double epsilon_tolerance(Algorithm solver) noexcept;

void write_records(std::ostream& out, std::span<const TrialRecord> records);
void write_cell_table(std::ostream& out, std::span<const CellSummary> cells);
/// Whitespace-separated columns for log-scale runtime plots.
void write_plot_data(std::ostream& out, std::span<const CellSummary> cells);

}  // namespace harmrec
