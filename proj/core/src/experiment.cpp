#include "harmrec/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "harmrec/errors.hpp"

namespace harmrec {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent streams carved out of one trial seed.
enum class Stream : std::uint64_t { geometry = 1, targets = 2, noise = 3 };

std::uint64_t stream_seed(std::uint64_t seed, Stream s) noexcept {
  return hash_combine(seed, static_cast<std::uint64_t>(s));
}

std::string format_optional(const std::optional<double>& v) {
  if (!v) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << *v;
  return os.str();
}

}  // namespace

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw InvalidArgument("experiment." + field + ": " + why);
  };
  if (m1_count < 1) fail("m1_count", "must be positive");
  if (m2_count < 1) fail("m2_count", "must be positive");
  if (element_count < 1 || element_count > Index{m1_count} * m2_count) {
    fail("element_count", "must lie in [1, m1_count * m2_count]");
  }
  if (element_count < Index{m1_count} * m2_count && element_count < 4) {
    fail("element_count", "a thinned array needs at least 4 elements to keep its aperture");
  }
  if (l2 < 1) fail("l2", "must be positive");
  if (l1_values.empty()) fail("l1_values", "must not be empty");
  for (auto l1 : l1_values) {
    if (l1 < 1) fail("l1_values", "entries must be positive");
  }
  if (iteration_values.empty()) fail("iteration_values", "must not be empty");
  for (auto n : iteration_values) {
    if (n < 1) fail("iteration_values", "entries must be positive");
  }
  if (k_min < 1 || k_max < k_min) fail("k_range", "must satisfy 1 <= k_min <= k_max");
  if (trials < 1) fail("trials", "must be at least 1");
  if (fast_repeats < 1) fail("fast_repeats", "must be at least 1");
  if (solvers.empty()) fail("solvers", "must not be empty");
  if (!std::isfinite(snr_db)) fail("snr_db", "must be finite");
  if (!(tau_fraction > 0.0)) fail("tau_fraction", "must be positive");
  if (!(rho > 0.0)) fail("rho", "must be positive");
}

std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept {
  return splitmix64(seed ^ (splitmix64(value) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

std::uint64_t trial_seed(std::uint64_t base_seed, Algorithm solver, Index l1, int n_iter, int trial_index) noexcept {
  std::uint64_t h = hash_combine(base_seed, static_cast<std::uint64_t>(solver));
  h = hash_combine(h, static_cast<std::uint64_t>(l1));
  h = hash_combine(h, static_cast<std::uint64_t>(n_iter));
  return hash_combine(h, static_cast<std::uint64_t>(trial_index));
}

Scenario random_scenario(int m1_count, int m2_count, Index element_count, int k_min, int k_max,
                         double snr_db, std::uint64_t seed) {
  const auto ura = make_ura(m1_count, m2_count);
  ArrayGeometry geometry = element_count == ura.element_count()
                               ? ura
                               : subsample_preserving_aperture(ura, element_count, stream_seed(seed, Stream::geometry));

  std::mt19937_64 rng(stream_seed(seed, Stream::targets));
  std::uniform_int_distribution<int> count(k_min, k_max);
  std::uniform_real_distribution<double> harmonic(-0.5, 0.5);
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  const int k = count(rng);
  std::vector<Target> targets;
  targets.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    Target t;
    t.f1 = harmonic(rng);
    t.f2 = harmonic(rng);
    t.amplitude = std::polar(1.0, phase(rng));
    targets.push_back(t);
  }
  const double variance = snr_to_noise_variance(targets, snr_db);
  Snapshot snapshot = synthesize_snapshot(geometry, targets, variance, stream_seed(seed, Stream::noise));
  return Scenario{std::move(geometry), std::move(targets), std::move(snapshot)};
}

double relative_error(const ComplexVector& a, const ComplexVector& b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("relative error needs vectors of equal length");
  }
  const double reference = a.norm();
  if (!(reference > 0.0)) {
    throw UndefinedReference("relative error against a zero reference vector");
  }
  return (a - b).norm() / reference;
}

double epsilon_tolerance(Algorithm solver) noexcept { return solver == Algorithm::admm ? 1e-6 : 1e-8; }

TrialRecord run_trial(const ExperimentConfig& config, Algorithm solver, Index l1, int n_iter, int trial_index) {
  config.validate();
  TrialRecord record;
  record.solver = solver;
  record.l1 = l1;
  record.l2 = config.l2;
  record.n_iter = n_iter;
  record.trial_index = trial_index;
  record.seed = trial_seed(config.base_seed, solver, l1, n_iter, trial_index);

  const Scenario scenario = random_scenario(config.m1_count, config.m2_count, config.element_count, config.k_min,
                                            config.k_max, config.snr_db, record.seed);
  record.source_count = static_cast<int>(scenario.targets.size());

  const auto dict = build_subsampled_dictionary(scenario.geometry, make_uniform_grid(l1),
                                                make_uniform_grid(config.l2), config.memory_budget_bytes);
  const ComplexVector& y = scenario.snapshot.values;

  // The fast problem fixes tau and mu; the regular run reuses both.
  LassoProblem fast = make_lasso_problem(dict, y, 1.0, Backend::fast);
  fast.tau = config.tau_fraction * fast.adjoint_rhs.cwiseAbs().maxCoeff();
  if (!(fast.tau > 0.0)) fast.tau = config.tau_fraction;

  SolverConfig solver_config;
  solver_config.iterations = n_iter;
  solver_config.rho = config.rho;
  solver_config.record_objective = false;
  if (solver != Algorithm::admm) solver_config.step_size = default_step_size(fast.gram);

  solver_config.backend = Backend::fast;
  const SolverResult fast_result = solve(solver, fast, solver_config);
  double fast_seconds = fast_result.total_seconds;
  for (int r = 1; r < config.fast_repeats; ++r) {
    fast_seconds = std::min(fast_seconds, solve(solver, fast, solver_config).total_seconds);
  }
  record.t_fast_ms = fast_seconds * 1e3;
  record.setup_fast_ms = fast_result.setup_seconds * 1e3;
  record.estimate_nnz = (fast_result.estimate.array() != Complex(0.0, 0.0)).count();

  const auto dense_bytes = static_cast<std::size_t>(dict.cols()) * static_cast<std::size_t>(dict.cols()) * sizeof(Complex);
  if (dense_bytes <= config.memory_budget_bytes) {
    const LassoProblem regular{GramOperator::regular(dict), fast.adjoint_rhs, fast.tau, fast.measurement_energy};
    solver_config.backend = Backend::regular;
    const SolverResult regular_result = solve(solver, regular, solver_config);
    record.t_reg_ms = regular_result.total_seconds * 1e3;
    record.setup_reg_ms = regular_result.setup_seconds * 1e3;
    if (regular_result.estimate.norm() > 0.0) {
      record.epsilon_r = relative_error(regular_result.estimate, fast_result.estimate);
    } else {
      record.epsilon_r = fast_result.estimate.norm() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
  }
  return record;
}

CellSummary summarize_cell(std::span<const TrialRecord> records) {
  if (records.empty()) throw InvalidArgument("cannot summarize an empty cell");
  CellSummary cell;
  cell.solver = records.front().solver;
  cell.l1 = records.front().l1;
  cell.l2 = records.front().l2;
  cell.n_iter = records.front().n_iter;
  cell.trials = static_cast<int>(records.size());

  double fast = 0.0;
  double reg = 0.0;
  double eps = 0.0;
  bool have_reg = true;
  for (const auto& r : records) {
    fast += r.t_fast_ms;
    if (r.t_reg_ms && r.epsilon_r) {
      reg += *r.t_reg_ms;
      eps += *r.epsilon_r;
    } else {
      have_reg = false;
    }
  }
  const auto n = static_cast<double>(records.size());
  cell.mean_t_fast_ms = fast / n;
  if (have_reg) {
    cell.mean_t_reg_ms = reg / n;
    cell.mean_epsilon_r = eps / n;
  }
  return cell;
}

GridResult run_grid(const ExperimentConfig& config, const TrialCallback& on_trial) {
  config.validate();
  GridResult result;
  for (const auto solver : config.solvers) {
    for (const auto l1 : config.l1_values) {
      for (const auto n_iter : config.iteration_values) {
        const auto first = result.records.size();
        for (int trial = 0; trial < config.trials; ++trial) {
          try {
            result.records.push_back(run_trial(config, solver, l1, n_iter, trial));
          } catch (const std::exception& e) {
            throw std::runtime_error(std::string(to_string(solver)) + " cell L1=" + std::to_string(l1) +
                                     " n_iter=" + std::to_string(n_iter) + " trial " + std::to_string(trial) +
                                     ": " + e.what());
          }
          if (on_trial) on_trial(result.records.back());
        }
        result.cells.push_back(summarize_cell(std::span(result.records).subspan(first)));
      }
    }
  }
  return result;
}

void write_records(std::ostream& out, std::span<const TrialRecord> records) {
  out << "solver,l1,l2,n_iter,trial_index,seed,source_count,estimate_nnz,t_reg_ms,t_fast_ms,epsilon_r,"
         "setup_reg_ms,setup_fast_ms\n";
  out << std::setprecision(17);
  for (const auto& r : records) {
    out << to_string(r.solver) << ',' << r.l1 << ',' << r.l2 << ',' << r.n_iter << ',' << r.trial_index << ','
        << r.seed << ',' << r.source_count << ',' << r.estimate_nnz << ',' << format_optional(r.t_reg_ms) << ','
        << r.t_fast_ms << ',' << format_optional(r.epsilon_r) << ',' << format_optional(r.setup_reg_ms) << ','
        << r.setup_fast_ms << '\n';
  }
}

void write_cell_table(std::ostream& out, std::span<const CellSummary> cells) {
  out << "solver,l1,l2,n_iter,trials,mean_t_reg_ms,mean_t_fast_ms,speedup,mean_epsilon_r\n";
  out << std::setprecision(17);
  for (const auto& c : cells) {
    std::optional<double> speedup;
    if (c.mean_t_reg_ms && c.mean_t_fast_ms > 0.0) speedup = *c.mean_t_reg_ms / c.mean_t_fast_ms;
    out << to_string(c.solver) << ',' << c.l1 << ',' << c.l2 << ',' << c.n_iter << ',' << c.trials << ','
        << format_optional(c.mean_t_reg_ms) << ',' << c.mean_t_fast_ms << ',' << format_optional(speedup) << ','
        << format_optional(c.mean_epsilon_r) << '\n';
  }
}

void write_plot_data(std::ostream& out, std::span<const CellSummary> cells) {
  out << "# solver l1 L n_iter t_reg_ms t_fast_ms epsilon_r\n";
  out << std::setprecision(17);
  for (const auto& c : cells) {
    out << to_string(c.solver) << ' ' << c.l1 << ' ' << c.l1 * c.l2 << ' ' << c.n_iter << ' '
        << format_optional(c.mean_t_reg_ms) << ' ' << c.mean_t_fast_ms << ' ' << format_optional(c.mean_epsilon_r)
        << '\n';
  }
}

}  // namespace harmrec
