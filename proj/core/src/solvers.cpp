#include "harmrec/solvers.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "harmrec/errors.hpp"

namespace harmrec {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool all_finite(const ComplexVector& v) {
  const double* p = reinterpret_cast<const double*>(v.data());
  for (Index k = 0; k < 2 * v.size(); ++k) {
    if (!std::isfinite(p[k])) return false;
  }
  return true;
}

double l1_norm(const ComplexVector& c) { return c.cwiseAbs().sum(); }

void check_problem(const LassoProblem& problem, const SolverConfig& config) {
  if (problem.adjoint_rhs.size() != problem.gram.dimension()) {
    throw InvalidArgument("adjoint right-hand side has length " + std::to_string(problem.adjoint_rhs.size()) +
                          ", problem dimension is " + std::to_string(problem.gram.dimension()));
  }
  if (!(problem.tau > 0.0)) {
    throw InvalidArgument("tau must be positive");
  }
  if (config.iterations < 1) {
    throw InvalidArgument("iteration count must be at least 1");
  }
  if (config.backend != problem.gram.backend()) {
    throw InvalidArgument("solver configured for the " + std::string(to_string(config.backend)) +
                          " backend but the problem carries a " +
                          std::string(to_string(problem.gram.backend())) + " Gram operator");
  }
  if (config.initial && config.initial->size() != problem.gram.dimension()) {
    throw InvalidArgument("initial vector has the wrong length");
  }
}

ComplexVector initial_vector(const LassoProblem& problem, const SolverConfig& config) {
  return config.initial ? *config.initial : ComplexVector::Zero(problem.gram.dimension());
}

double resolve_step_size(const LassoProblem& problem, const SolverConfig& config) {
  if (config.step_size) {
    if (!(*config.step_size > 0.0)) throw InvalidArgument("step size must be positive");
    return *config.step_size;
  }
  return default_step_size(problem.gram, config.power_tolerance, config.power_max_iterations,
                           config.power_seed);
}

void check_finite(const ComplexVector& v, int iteration, const char* solver) {
  if (!all_finite(v)) {
    throw DivergenceError(std::string(solver) + " produced a non-finite iterate at iteration " +
                              std::to_string(iteration),
                          iteration);
  }
}

}  // namespace

std::string_view to_string(Backend backend) noexcept {
  return backend == Backend::regular ? "regular" : "fast";
}

std::string_view to_string(Algorithm algorithm) noexcept {
  switch (algorithm) {
    case Algorithm::ista:
      return "ista";
    case Algorithm::fista:
      return "fista";
    case Algorithm::admm:
      return "admm";
  }
  return "unknown";
}

Backend parse_backend(std::string_view name) {
  if (name == "regular") return Backend::regular;
  if (name == "fast") return Backend::fast;
  throw InvalidArgument("unknown backend '" + std::string(name) + "'");
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "ista") return Algorithm::ista;
  if (name == "fista") return Algorithm::fista;
  if (name == "admm") return Algorithm::admm;
  throw InvalidArgument("unknown solver '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// IterationMap

IterationMap::IterationMap(ComplexMatrix dense) : op_(std::move(dense)) {}

IterationMap::IterationMap(BccbOperator op) : op_(std::move(op)) {
  workspace_.emplace(std::get<BccbOperator>(op_).make_workspace());
}

Backend IterationMap::backend() const noexcept {
  return std::holds_alternative<ComplexMatrix>(op_) ? Backend::regular : Backend::fast;
}

Index IterationMap::size() const noexcept {
  if (const auto* m = std::get_if<ComplexMatrix>(&op_)) return m->rows();
  return std::get<BccbOperator>(op_).size();
}

void IterationMap::apply(const ComplexVector& x, ComplexVector& y) {
  if (auto* m = std::get_if<ComplexMatrix>(&op_)) {
    y.noalias() = *m * x;
  } else {
    std::get<BccbOperator>(op_).apply(x, y, *workspace_);
  }
}

// ---------------------------------------------------------------------------
// GramOperator

struct GramOperator::State {
  std::optional<SubsampledDictionary> dict;
  std::optional<DenseGram> dense;
  std::optional<BccbOperator> bccb;
};

GramOperator::GramOperator(Backend backend, Index dimension, std::shared_ptr<const State> state)
    : backend_(backend), dimension_(dimension), state_(std::move(state)) {}

GramOperator GramOperator::regular(const SubsampledDictionary& dict) {
  auto s = std::make_shared<State>();
  s->dict = dict;
  return GramOperator(Backend::regular, dict.cols(), std::move(s));
}

GramOperator GramOperator::regular(DenseGram gram) {
  if (gram.entries.rows() != gram.entries.cols()) {
    throw InvalidArgument("Gram matrix must be square");
  }
  const Index n = gram.size();
  auto s = std::make_shared<State>();
  s->dense = std::move(gram);
  return GramOperator(Backend::regular, n, std::move(s));
}

GramOperator GramOperator::fast(BccbOperator op) {
  const Index n = op.size();
  auto s = std::make_shared<State>();
  s->bccb = std::move(op);
  return GramOperator(Backend::fast, n, std::move(s));
}

const BccbOperator* GramOperator::bccb() const noexcept {
  return state_->bccb ? &*state_->bccb : nullptr;
}

void GramOperator::apply(const ComplexVector& x, ComplexVector& y) const {
  if (x.size() != dimension_) {
    throw InvalidArgument("Gram product expects a vector of length " + std::to_string(dimension_));
  }
  if (state_->dict) {
    const auto& d = state_->dict->matrix();
    const ComplexVector dx = d * x;
    y.noalias() = d.adjoint() * dx;
  } else if (state_->dense) {
    y.noalias() = state_->dense->entries * x;
  } else {
    y = state_->bccb->apply(x);
  }
}

ComplexVector GramOperator::apply(const ComplexVector& x) const {
  ComplexVector y(dimension_);
  apply(x, y);
  return y;
}

IterationMap GramOperator::gradient_map(double mu) const {
  if (!(mu > 0.0)) throw InvalidArgument("step size must be positive");
  if (state_->bccb) {
    return IterationMap(bccb_scale_add_identity(*state_->bccb, -mu, 1.0));
  }
  ComplexMatrix w;
  if (state_->dict) {
    w = std::move(dense_gram(*state_->dict).entries);
  } else {
    w = state_->dense->entries;
  }
  w *= -mu;
  w.diagonal().array() += 1.0;
  return IterationMap(std::move(w));
}

IterationMap GramOperator::resolvent_map(double rho) const {
  if (!(rho > 0.0)) throw InvalidArgument("rho must be positive");
  if (state_->bccb) {
    return IterationMap(bccb_inverse(bccb_scale_add_identity(*state_->bccb, 1.0, rho)));
  }
  if (state_->dict) {
    // (D^H D + rho I)^{-1} = (I - D^H (D D^H + rho I)^{-1} D) / rho, which only
    // needs a Hermitian solve of the M x M capacitance matrix.
    const auto& d = state_->dict->matrix();
    check_dense_budget(d.cols(), d.cols(), state_->dict->memory_budget(), "ADMM resolvent");
    ComplexMatrix capacitance = d * d.adjoint();
    capacitance.diagonal().array() += rho;
    const ComplexMatrix x = capacitance.llt().solve(d);
    ComplexMatrix p(d.cols(), d.cols());
    p.noalias() = d.adjoint() * x;
    p *= -1.0 / rho;
    p.diagonal().array() += 1.0 / rho;
    return IterationMap(std::move(p));
  }
  ComplexMatrix shifted = state_->dense->entries;
  shifted.diagonal().array() += rho;
  const Index n = shifted.rows();
  ComplexMatrix p = shifted.llt().solve(ComplexMatrix::Identity(n, n));
  return IterationMap(std::move(p));
}

LassoProblem make_lasso_problem(const SubsampledDictionary& dict, const ComplexVector& y, double tau,
                                Backend backend) {
  if (y.size() != dict.rows()) {
    throw InvalidArgument("measurement has length " + std::to_string(y.size()) + ", array has " +
                          std::to_string(dict.rows()) + " elements");
  }
  GramOperator gram = backend == Backend::regular
                          ? GramOperator::regular(dict)
                          : GramOperator::fast(gram_operator(dict.geometry(), dict.grid1().length(),
                                                             dict.grid2().length()));
  return LassoProblem{std::move(gram), apply_adjoint(dict, y), tau, y.squaredNorm()};
}

// ---------------------------------------------------------------------------
// Building blocks

void soft_threshold_in_place(ComplexVector& z, double kappa) {
  if (!(kappa >= 0.0)) throw InvalidArgument("threshold must be nonnegative");
  for (Index k = 0; k < z.size(); ++k) {
    const double mag = std::abs(z(k));
    z(k) = mag <= kappa ? Complex{0.0, 0.0} : z(k) * ((mag - kappa) / mag);
  }
}

ComplexVector soft_threshold(const ComplexVector& z, double kappa) {
  ComplexVector out = z;
  soft_threshold_in_place(out, kappa);
  return out;
}

double max_gram_eigenvalue(const std::function<void(const ComplexVector&, ComplexVector&)>& apply,
                           Index dimension, double tol, int max_iter, std::uint64_t seed) {
  if (dimension < 1) throw InvalidArgument("operator dimension must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  ComplexVector x(dimension);
  for (Index k = 0; k < dimension; ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    x(k) = Complex(re, im);
  }
  x.normalize();
  ComplexVector y(dimension);
  double previous = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    apply(x, y);
    const double rayleigh = x.dot(y).real();
    if (it > 1 && std::abs(rayleigh - previous) <= tol * std::abs(rayleigh)) return rayleigh;
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    x = y / norm;
    previous = rayleigh;
  }
  throw ConvergenceError("power iteration did not converge in " + std::to_string(max_iter) +
                             " iterations (last estimate " + std::to_string(previous) + ")",
                         previous);
}

double max_gram_eigenvalue(const GramOperator& gram, double tol, int max_iter, std::uint64_t seed) {
  return max_gram_eigenvalue([&gram](const ComplexVector& x, ComplexVector& y) { gram.apply(x, y); },
                             gram.dimension(), tol, max_iter, seed);
}

double default_step_size(const GramOperator& gram, double tol, int max_iter, std::uint64_t seed) {
  const double lambda = max_gram_eigenvalue(gram, tol, max_iter, seed);
  if (!(lambda > 0.0)) throw InvalidArgument("Gram operator has no positive eigenvalue");
  return 1.0 / (lambda * (1.0 + 1e-6));
}

double fista_next_alpha(double alpha) noexcept { return (std::sqrt(1.0 + 4.0 * alpha * alpha) + 1.0) / 2.0; }

double lasso_objective(const SubsampledDictionary& dict, const ComplexVector& y, const ComplexVector& c,
                       double tau) {
  if (y.size() != dict.rows() || c.size() != dict.cols()) {
    throw InvalidArgument("objective operands do not match the dictionary shape");
  }
  return (y - dict.matrix() * c).squaredNorm() + tau * l1_norm(c);
}

namespace {

double data_term(const LassoProblem& problem, const ComplexVector& c) {
  if (c.size() != problem.gram.dimension()) {
    throw InvalidArgument("objective operand has the wrong length");
  }
  const ComplexVector gc = problem.gram.apply(c);
  return problem.measurement_energy - 2.0 * problem.adjoint_rhs.dot(c).real() + c.dot(gc).real();
}

}  // namespace

double lasso_objective(const LassoProblem& problem, const ComplexVector& c) {
  return data_term(problem, c) + problem.tau * l1_norm(c);
}

double iteration_objective(const LassoProblem& problem, const ComplexVector& c) {
  return 0.5 * data_term(problem, c) + problem.tau * l1_norm(c);
}

// ---------------------------------------------------------------------------
// Solvers

SolverResult ista_solve(const LassoProblem& problem, const SolverConfig& config) {
  check_problem(problem, config);
  SolverResult result;
  result.backend = config.backend;
  result.iterations = config.iterations;

  const auto setup_start = Clock::now();
  const double mu = resolve_step_size(problem, config);
  IterationMap w = problem.gram.gradient_map(mu);
  const ComplexVector mu_b = mu * problem.adjoint_rhs;
  const double kappa = mu * problem.tau;
  result.setup_seconds = seconds_since(setup_start);
  result.step_size = mu;

  ComplexVector c = initial_vector(problem, config);
  ComplexVector next(c.size());
  if (config.record_objective) result.objective_trace.reserve(static_cast<std::size_t>(config.iterations));

  double elapsed = 0.0;
  for (int t = 1; t <= config.iterations; ++t) {
    const auto start = Clock::now();
    w.apply(c, next);
    next += mu_b;
    soft_threshold_in_place(next, kappa);
    c.swap(next);
    check_finite(c, t, "ISTA");
    elapsed += seconds_since(start);

    if (config.record_objective) result.objective_trace.push_back(iteration_objective(problem, c));
    if (config.observer) config.observer(IterationState{t, c});
  }
  result.total_seconds = elapsed;
  result.per_iteration_seconds = elapsed / config.iterations;
  result.estimate = std::move(c);
  return result;
}

SolverResult fista_solve(const LassoProblem& problem, const SolverConfig& config) {
  check_problem(problem, config);
  SolverResult result;
  result.backend = config.backend;
  result.iterations = config.iterations;

  const auto setup_start = Clock::now();
  const double mu = resolve_step_size(problem, config);
  IterationMap w = problem.gram.gradient_map(mu);
  const ComplexVector mu_b = mu * problem.adjoint_rhs;
  const double kappa = mu * problem.tau;
  result.setup_seconds = seconds_since(setup_start);
  result.step_size = mu;

  ComplexVector previous = initial_vector(problem, config);  // c(t-1)
  ComplexVector z = previous;                                // z(1) = c(0)
  ComplexVector c(previous.size());
  double alpha = 1.0;
  if (config.record_objective) result.objective_trace.reserve(static_cast<std::size_t>(config.iterations));

  double elapsed = 0.0;
  for (int t = 1; t <= config.iterations; ++t) {
    const auto start = Clock::now();
    w.apply(z, c);
    c += mu_b;
    soft_threshold_in_place(c, kappa);
    const double alpha_next = fista_next_alpha(alpha);
    const double momentum = (alpha - 1.0) / alpha_next;
    z = c + momentum * (c - previous);
    previous = c;
    alpha = alpha_next;
    check_finite(c, t, "FISTA");
    elapsed += seconds_since(start);

    if (config.record_objective) result.objective_trace.push_back(iteration_objective(problem, c));
    if (config.observer) config.observer(IterationState{t, c, &z});
  }
  result.total_seconds = elapsed;
  result.per_iteration_seconds = elapsed / config.iterations;
  result.estimate = std::move(c);
  return result;
}

SolverResult admm_solve(const LassoProblem& problem, const SolverConfig& config) {
  check_problem(problem, config);
  if (!(config.rho > 0.0)) throw InvalidArgument("rho must be positive");
  SolverResult result;
  result.backend = config.backend;
  result.iterations = config.iterations;
  result.step_size = config.rho;

  const double rho = config.rho;
  const auto setup_start = Clock::now();
  IterationMap p = problem.gram.resolvent_map(rho);
  ComplexVector q(problem.gram.dimension());
  p.apply(problem.adjoint_rhs, q);  // (G + rho I)^{-1} b, precomputed once
  const double kappa = rho * problem.tau;
  result.setup_seconds = seconds_since(setup_start);

  const Index n = problem.gram.dimension();
  ComplexVector z = initial_vector(problem, config);
  ComplexVector v = ComplexVector::Zero(n);
  ComplexVector c(n);
  ComplexVector diff(n);
  if (config.record_objective) result.objective_trace.reserve(static_cast<std::size_t>(config.iterations));

  double elapsed = 0.0;
  for (int t = 1; t <= config.iterations; ++t) {
    const auto start = Clock::now();
    diff = z - v;
    p.apply(diff, c);
    c = q + rho * c;
    z = c + v;
    soft_threshold_in_place(z, kappa);
    v += c - z;
    check_finite(z, t, "ADMM");
    elapsed += seconds_since(start);

    if (config.record_objective) result.objective_trace.push_back(iteration_objective(problem, z));
    if (config.observer) config.observer(IterationState{t, c, &z, &v});
  }
  result.total_seconds = elapsed;
  result.per_iteration_seconds = elapsed / config.iterations;
  result.estimate = std::move(z);
  return result;
}

SolverResult solve(Algorithm algorithm, const LassoProblem& problem, const SolverConfig& config) {
  switch (algorithm) {
    case Algorithm::ista:
      return ista_solve(problem, config);
    case Algorithm::fista:
      return fista_solve(problem, config);
    case Algorithm::admm:
      return admm_solve(problem, config);
  }
  throw InvalidArgument("unknown solver");
}

std::vector<SupportEntry> extract_support(const ComplexVector& c_hat, const UniformGrid& grid1,
                                          const UniformGrid& grid2, double threshold_fraction) {
  if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0)) {
    throw InvalidArgument("threshold fraction must lie in (0, 1)");
  }
  const Index l1 = grid1.length();
  if (c_hat.size() != l1 * grid2.length()) {
    throw InvalidArgument("estimate length does not match the grids");
  }
  std::vector<SupportEntry> support;
  if (c_hat.size() == 0) return support;
  const double peak = c_hat.cwiseAbs().maxCoeff();
  if (peak == 0.0) return support;
  const double cut = threshold_fraction * peak;
  for (Index l = 0; l < c_hat.size(); ++l) {
    if (std::abs(c_hat(l)) >= cut) {
      support.push_back({grid1[l % l1], grid2[l / l1], c_hat(l), l});
    }
  }
  std::stable_sort(support.begin(), support.end(), [](const SupportEntry& a, const SupportEntry& b) {
    return std::abs(a.amplitude) > std::abs(b.amplitude);
  });
  return support;
}

}  // namespace harmrec
