#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "harmrec/array_signal.hpp"
#include "harmrec/bccb.hpp"
#include "harmrec/dictionary.hpp"
#include "harmrec/types.hpp"

namespace harmrec {

enum class Backend { regular, fast };
enum class Algorithm { ista, fista, admm };

std::string_view to_string(Backend backend) noexcept;
std::string_view to_string(Algorithm algorithm) noexcept;
Backend parse_backend(std::string_view name);
Algorithm parse_algorithm(std::string_view name);

/// Linear map applied once per iteration: I - mu G for ISTA/FISTA and
/// (G + rho I)^{-1} for ADMM. The regular backend holds it as a dense
/// matrix, the fast backend as BCCB eigenvalues.
class IterationMap {
 public:
  explicit IterationMap(ComplexMatrix dense);
  explicit IterationMap(BccbOperator op);

  Backend backend() const noexcept;
  Index size() const noexcept;

  /// y = A x. Not reentrant: the fast variant owns one transform workspace.
  void apply(const ComplexVector& x, ComplexVector& y);

  /// Dense matrix, or nullptr for the fast backend.
  const ComplexMatrix* dense() const noexcept { return std::get_if<ComplexMatrix>(&op_); }

 private:
  std::variant<ComplexMatrix, BccbOperator> op_;
  std::optional<BccbOperator::Workspace> workspace_;
};

/// The Gram operator G = D_s^H D_s behind one of the two backends.
///
/// The regular backend is built either from the dictionary (so G is only
/// formed when an iteration map is requested) or from an explicit DenseGram.
/// The fast backend is a BccbOperator. Copies share state.
class GramOperator {
 public:
  static GramOperator regular(const SubsampledDictionary& dict);
  static GramOperator regular(DenseGram gram);
  static GramOperator fast(BccbOperator op);

  Backend backend() const noexcept { return backend_; }
  Index dimension() const noexcept { return dimension_; }

  void apply(const ComplexVector& x, ComplexVector& y) const;
  ComplexVector apply(const ComplexVector& x) const;

  /// I - mu G.
  IterationMap gradient_map(double mu) const;
  /// (G + rho I)^{-1}.
  IterationMap resolvent_map(double rho) const;

  const BccbOperator* bccb() const noexcept;

 private:
  struct State;
  GramOperator(Backend backend, Index dimension, std::shared_ptr<const State> state);

  Backend backend_;
  Index dimension_;
  std::shared_ptr<const State> state_;
};

/// Data of min_c ||y_s - D_s c||^2 + tau ||c||_1 as the solvers see it.
struct LassoProblem {
  GramOperator gram;
  ComplexVector adjoint_rhs;      // b = D_s^H y_s
  double tau = 0.0;
  double measurement_energy = 0.0;  // ||y_s||^2, only used for objective values
};

LassoProblem make_lasso_problem(const SubsampledDictionary& dict, const ComplexVector& y, double tau,
                                Backend backend);

struct IterationState {
  int iteration = 0;  // 1-based
  const ComplexVector& c;
  const ComplexVector* z = nullptr;  // FISTA extrapolation point or ADMM split variable
  const ComplexVector* v = nullptr;  // ADMM scaled dual
};

struct SolverConfig {
  int iterations = 100;
  /// mu for ISTA/FISTA; power iteration on the Gram when unset.
  std::optional<double> step_size;
  double rho = 1.0;
  /// c(0) for ISTA/FISTA, z(0) for ADMM. Zero when unset.
  std::optional<ComplexVector> initial;
  Backend backend = Backend::fast;
  /// Records the objective after each iteration, outside the timed region.
  bool record_objective = true;
  /// Called after every iteration, outside the timed region.
  std::function<void(const IterationState&)> observer;

  double power_tolerance = 1e-10;
  int power_max_iterations = 5000;
  std::uint64_t power_seed = 0;
};

struct SolverResult {
  ComplexVector estimate;
  std::vector<double> objective_trace;
  double per_iteration_seconds = 0.0;
  double total_seconds = 0.0;
  /// Building the iteration map and constant terms; not part of total_seconds.
  double setup_seconds = 0.0;
  Backend backend = Backend::fast;
  double step_size = 0.0;  // mu, or rho for ADMM
  int iterations = 0;
};

/// Entrywise exp(j arg z) max(|z| - kappa, 0).
ComplexVector soft_threshold(const ComplexVector& z, double kappa);
void soft_threshold_in_place(ComplexVector& z, double kappa);

/// Power iteration for the largest eigenvalue of a Hermitian PSD operator.
/// Stops when the Rayleigh quotient changes by at most tol relative.
double max_gram_eigenvalue(const std::function<void(const ComplexVector&, ComplexVector&)>& apply,
                           Index dimension, double tol = 1e-10, int max_iter = 5000,
                           std::uint64_t seed = 0);
double max_gram_eigenvalue(const GramOperator& gram, double tol = 1e-10, int max_iter = 5000,
                           std::uint64_t seed = 0);

/// 1 / (lambda_max (1 + 1e-6)) with lambda_max from power iteration.
double default_step_size(const GramOperator& gram, double tol = 1e-10, int max_iter = 5000,
                         std::uint64_t seed = 0);

/// FISTA momentum recursion alpha' = (sqrt(1 + 4 alpha^2) + 1) / 2.
double fista_next_alpha(double alpha) noexcept;

SolverResult ista_solve(const LassoProblem& problem, const SolverConfig& config);
SolverResult fista_solve(const LassoProblem& problem, const SolverConfig& config);
SolverResult admm_solve(const LassoProblem& problem, const SolverConfig& config);
SolverResult solve(Algorithm algorithm, const LassoProblem& problem, const SolverConfig& config);

/// ||y - D_s c||^2 + tau ||c||_1.
double lasso_objective(const SubsampledDictionary& dict, const ComplexVector& y, const ComplexVector& c,
                       double tau);
/// Same value through the Gram: ||y||^2 - 2 Re(b^H c) + c^H G c + tau ||c||_1.
double lasso_objective(const LassoProblem& problem, const ComplexVector& c);

/// 1/2 ||y - D_s c||^2 + tau ||c||_1, the function the iterations with
/// threshold mu * tau actually descend. This is what objective_trace holds.
double iteration_objective(const LassoProblem& problem, const ComplexVector& c);

struct SupportEntry {
  double f1 = 0.0;
  double f2 = 0.0;
  Complex amplitude{0.0, 0.0};
  Index index = 0;
};

/// Entries with |c(l)| >= threshold_fraction * max |c|, mapped to grid
/// harmonics via l1 = l mod L1, l2 = l / L1, sorted by decreasing magnitude.
std::vector<SupportEntry> extract_support(const ComplexVector& c_hat, const UniformGrid& grid1,
                                          const UniformGrid& grid2, double threshold_fraction);

}  // namespace harmrec
