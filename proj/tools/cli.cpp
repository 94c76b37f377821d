#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <set>
#include <utility>

#include <CLI11.hpp>

#include "config.hpp"
#include "harmrec/bccb.hpp"
#include "harmrec/dictionary.hpp"
#include "harmrec/errors.hpp"
#include "harmrec/experiment.hpp"
#include "harmrec/serialize.hpp"
#include "harmrec/solvers.hpp"

namespace harmrec::cli {

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  bool print_config = false;
  std::string output;
  std::string geometry_path;
  std::string snapshot_path;
  std::string omega_out;
  std::string records_path;
  std::string table_path;
  std::string plot_path;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path + "'");
  return in;
}

void close_output(std::ofstream& out, const std::string& path) {
  out.close();
  if (!out) throw IoError("failed while writing '" + path + "'");
}

ArrayGeometry config_geometry(const Config& config) {
  const auto ura = make_ura(config.array.m1_count, config.array.m2_count);
  if (config.array.element_count == ura.element_count()) return ura;
  return subsample_preserving_aperture(ura, config.array.element_count, config.array.seed);
}

ArrayGeometry load_geometry(const Options& opt, const Config& config) {
  if (opt.geometry_path.empty()) return config_geometry(config);
  auto in = open_input(opt.geometry_path);
  return read_geometry(in);
}

std::vector<Target> scenario_targets(const Config& config) {
  const auto& s = config.scenario;
  if (!s.targets.empty()) return s.targets;

  std::mt19937_64 rng(hash_combine(s.seed, 2));
  const int k = std::uniform_int_distribution<int>(s.k_min, s.k_max)(rng);
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  std::vector<Target> targets;
  if (s.on_grid) {
    const auto grid1 = make_uniform_grid(config.grid.l1);
    const auto grid2 = make_uniform_grid(config.grid.l2);
    const Index cells = config.grid.l1 * config.grid.l2;
    if (k > cells) throw ConfigError("scenario.k_max", "more on-grid targets than grid points");
    std::uniform_int_distribution<Index> pick(0, cells - 1);
    std::set<Index> used;
    while (static_cast<int>(used.size()) < k) {
      const Index l = pick(rng);
      if (!used.insert(l).second) continue;
      targets.push_back({grid1[l % config.grid.l1], grid2[l / config.grid.l1], std::polar(1.0, phase(rng))});
    }
  } else {
    std::uniform_real_distribution<double> harmonic(-0.5, 0.5);
    for (int i = 0; i < k; ++i) {
      const double f1 = harmonic(rng);
      const double f2 = harmonic(rng);
      targets.push_back({f1, f2, std::polar(1.0, phase(rng))});
    }
  }
  return targets;
}

double resolve_tau(const SolverSection& solver, const ComplexVector& b) {
  if (solver.tau) return *solver.tau;
  const double tau = solver.tau_fraction * b.cwiseAbs().maxCoeff();
  return tau > 0.0 ? tau : solver.tau_fraction;
}

int cmd_simulate(const Options& opt, const Config& config, std::ostream& out) {
  if (opt.output.empty()) throw ConfigError("--output", "simulate needs an output prefix");
  const auto geometry = load_geometry(opt, config);
  const auto targets = scenario_targets(config);
  double variance = 0.0;
  if (config.scenario.noise_variance) {
    variance = *config.scenario.noise_variance;
  } else if (!targets.empty()) {
    variance = snr_to_noise_variance(targets, *config.scenario.snr_db);
  }
  const auto snapshot = synthesize_snapshot(geometry, targets, variance, hash_combine(config.scenario.seed, 3));

  const std::string geometry_file = opt.output + ".geometry.json";
  const std::string snapshot_file = opt.output + ".snapshot.txt";
  const std::string targets_file = opt.output + ".targets.json";
  {
    auto f = open_output(geometry_file);
    write_geometry(f, geometry);
    close_output(f, geometry_file);
  }
  {
    auto f = open_output(snapshot_file);
    write_snapshot(f, snapshot);
    close_output(f, snapshot_file);
  }
  {
    auto f = open_output(targets_file);
    write_targets(f, targets);
    close_output(f, targets_file);
  }
  out << "elements " << geometry.element_count() << '\n'
      << "targets " << targets.size() << '\n'
      << "noise_variance " << variance << '\n'
      << "wrote " << geometry_file << ", " << snapshot_file << ", " << targets_file << '\n';
  return 0;
}

int cmd_solve(const Options& opt, const Config& config, std::ostream& out) {
  if (opt.snapshot_path.empty()) throw ConfigError("--snapshot", "solve needs a snapshot file");
  if (opt.output.empty()) throw ConfigError("--output", "solve needs an output prefix");
  const auto geometry = load_geometry(opt, config);
  auto snapshot_in = open_input(opt.snapshot_path);
  const auto snapshot = read_snapshot(snapshot_in, geometry);

  const auto grid1 = make_uniform_grid(config.grid.l1);
  const auto grid2 = make_uniform_grid(config.grid.l2);
  const auto dict = build_subsampled_dictionary(geometry, grid1, grid2, config.memory_budget_bytes);
  const ComplexVector b = apply_adjoint(dict, snapshot.values);
  const double tau = resolve_tau(config.solver, b);
  const auto problem = make_lasso_problem(dict, snapshot.values, tau, config.solver.backend);

  SolverConfig sc;
  sc.iterations = config.solver.iterations;
  sc.step_size = config.solver.step_size;
  sc.rho = config.solver.rho;
  sc.backend = config.solver.backend;
  sc.record_objective = false;
  const auto result = solve(config.solver.algorithm, problem, sc);
  const auto support = extract_support(result.estimate, grid1, grid2, config.solver.support_threshold);

  const std::string estimate_file = opt.output + ".estimate.txt";
  const std::string support_file = opt.output + ".support.txt";
  {
    auto f = open_output(estimate_file);
    write_estimate(f, result.estimate, config.grid.l1, config.grid.l2);
    close_output(f, estimate_file);
  }
  {
    auto f = open_output(support_file);
    write_support(f, support);
    close_output(f, support_file);
  }

  out << std::setprecision(10);
  out << "solver " << to_string(config.solver.algorithm) << '\n'
      << "backend " << to_string(result.backend) << '\n'
      << "iterations " << result.iterations << '\n'
      << "tau " << tau << '\n'
      << (config.solver.algorithm == Algorithm::admm ? "rho " : "step_size ") << result.step_size << '\n'
      << "objective " << lasso_objective(dict, snapshot.values, result.estimate, tau) << '\n'
      << "setup_ms " << result.setup_seconds * 1e3 << '\n'
      << "total_ms " << result.total_seconds * 1e3 << '\n'
      << "per_iteration_ms " << result.per_iteration_seconds * 1e3 << '\n'
      << "support " << support.size() << '\n';
  return 0;
}

int cmd_verify(const Options& opt, const Config& config, std::ostream& out, std::ostream& err) {
  const Index l1 = config.grid.l1;
  const Index l2 = config.grid.l2;
  const Index l = l1 * l2;
  if (l > config.verify.dense_cap) {
    err << "error: the dense check needs an " << l << " x " << l << " matrix, above verify.dense_cap = "
        << config.verify.dense_cap << "; reduce grid.l1 or grid.l2 (e.g. --set grid.l1=32)\n";
    return 1;
  }
  const auto geometry = load_geometry(opt, config);
  auto grid1 = make_uniform_grid(l1);
  if (config.verify.perturb_grid) grid1 = perturbed_grid_for_testing(grid1, l1 / 2, 0.25 / double(l1));
  const auto dict = build_subsampled_dictionary(geometry, grid1, make_uniform_grid(l2), config.memory_budget_bytes);
  const auto gram = dense_gram(dict);
  const auto structure = is_bccb(gram.entries, l1, l2, config.verify.tolerance);

  const auto op = gram_operator(geometry, l1, l2);
  const auto spectrum = spectral_summary(op);
  const double ml = double(geometry.element_count()) * double(l);
  const double trace_residual = std::abs(spectrum.sum - Complex(ml, 0.0)) / ml;
  const double operator_residual =
      (bccb_to_dense(op, config.verify.dense_cap) - gram.entries).cwiseAbs().maxCoeff();

  const bool trace_ok = trace_residual <= 1e-8;
  const bool sign_ok = spectrum.min_real >= -1e-8 * spectrum.max_real;
  const bool real_ok = spectrum.max_abs_imag <= 1e-8 * spectrum.max_real;
  const bool operator_ok = operator_residual <= config.verify.tolerance * std::max(1.0, spectrum.max_real);
  const bool pass = structure.is_bccb && trace_ok && sign_ok && real_ok && operator_ok;

  out << std::setprecision(6);
  out << "elements " << geometry.element_count() << '\n'
      << "grid " << l1 << " x " << l2 << (config.verify.perturb_grid ? " (grid 1 perturbed)" : "") << '\n'
      << "bccb_max_deviation " << structure.max_deviation << (structure.is_bccb ? " ok" : " FAIL") << '\n'
      << "fast_vs_dense_max_deviation " << operator_residual << (operator_ok ? " ok" : " FAIL") << '\n'
      << "eigenvalue_sum " << spectrum.sum.real() << " expected " << ml << '\n'
      << "trace_relative_residual " << trace_residual << (trace_ok ? " ok" : " FAIL") << '\n'
      << "min_eigenvalue " << spectrum.min_real << (sign_ok ? " ok" : " FAIL") << '\n'
      << "max_eigenvalue " << spectrum.max_real << '\n'
      << "max_imaginary_residue " << spectrum.max_abs_imag << (real_ok ? " ok" : " FAIL") << '\n'
      << (pass ? "PASS" : "FAIL") << '\n';

  if (!opt.omega_out.empty()) {
    auto f = open_output(opt.omega_out);
    write_eigenvalues(f, op);
    close_output(f, opt.omega_out);
  }
  return pass ? 0 : 1;
}

int cmd_bench(const Options& opt, const Config& config, std::ostream& out, std::ostream& err) {
  const auto& experiment = config.experiment;
  const auto result = run_grid(experiment, [&err](const TrialRecord& r) {
    err << to_string(r.solver) << " L1=" << r.l1 << " n_iter=" << r.n_iter << " trial " << r.trial_index
        << " t_fast_ms=" << r.t_fast_ms;
    if (r.t_reg_ms) err << " t_reg_ms=" << *r.t_reg_ms << " eps=" << *r.epsilon_r;
    err << '\n';
  });

  if (!opt.records_path.empty()) {
    auto f = open_output(opt.records_path);
    write_records(f, result.records);
    close_output(f, opt.records_path);
  }
  if (!opt.table_path.empty()) {
    auto f = open_output(opt.table_path);
    write_cell_table(f, result.cells);
    close_output(f, opt.table_path);
  }
  if (!opt.plot_path.empty()) {
    auto f = open_output(opt.plot_path);
    write_plot_data(f, result.cells);
    close_output(f, opt.plot_path);
  }
  write_cell_table(out, result.cells);

  int violations = 0;
  for (const auto& r : result.records) {
    if (r.epsilon_r && !(*r.epsilon_r <= epsilon_tolerance(r.solver))) ++violations;
  }
  if (violations > 0) {
    err << "error: " << violations << " trial(s) exceed the backend agreement tolerance\n";
    return 1;
  }
  return 0;
}

int cmd_gram_dump(const Options& opt, const Config& config, std::ostream& out) {
  if (opt.output.empty()) throw ConfigError("--output", "gram-dump needs an output path");
  const auto geometry = load_geometry(opt, config);
  const auto op = gram_operator(geometry, config.grid.l1, config.grid.l2);
  auto f = open_output(opt.output);
  write_eigenvalues(f, op);
  close_output(f, opt.output);
  out << "wrote " << op.l1() << " x " << op.l2() << " eigenvalues to " << opt.output << '\n';
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fast single-snapshot 2D harmonic recovery with sparse planar arrays", "harmrec"};
  app.fallthrough();
  app.require_subcommand(0, 1);

  Options opt;
  app.add_option("-c,--config", opt.config_path, "JSON config file (comments allowed)");
  app.add_option("--set", opt.overrides, "Override one config field, e.g. --set solver.iterations=200")
      ->allow_extra_args(false);
  app.add_flag("--print-config", opt.print_config, "Print the effective config and exit");

  auto* simulate = app.add_subcommand("simulate", "Synthesize a snapshot and its planted targets");
  simulate->add_option("-o,--output", opt.output, "Output prefix")->required();
  simulate->add_option("--geometry", opt.geometry_path, "Geometry file instead of the config's array section");

  auto* solve_cmd = app.add_subcommand("solve", "Recover the sparse coefficients of one snapshot");
  solve_cmd->add_option("--snapshot", opt.snapshot_path, "Snapshot file")->required();
  solve_cmd->add_option("--geometry", opt.geometry_path, "Geometry file instead of the config's array section");
  solve_cmd->add_option("-o,--output", opt.output, "Output prefix")->required();

  auto* verify = app.add_subcommand("verify", "Check the Gram's BCCB structure and spectrum");
  verify->add_option("--geometry", opt.geometry_path, "Geometry file instead of the config's array section");
  verify->add_option("--omega-out", opt.omega_out, "Also write the eigenvalues here");

  auto* bench = app.add_subcommand("bench", "Run the regular-vs-fast sweep");
  bench->add_option("--records", opt.records_path, "Per-trial CSV records");
  bench->add_option("--table", opt.table_path, "Per-cell CSV table");
  bench->add_option("--plot", opt.plot_path, "Whitespace-separated plot data");

  auto* gram_dump = app.add_subcommand("gram-dump", "Write the Gram eigenvalues");
  gram_dump->add_option("--geometry", opt.geometry_path, "Geometry file instead of the config's array section");
  gram_dump->add_option("-o,--output", opt.output, "Output path")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    const Config config = load_config(opt.config_path, opt.overrides);
    if (opt.print_config) {
      out << dump_config(config);
      return 0;
    }
    if (simulate->parsed()) return cmd_simulate(opt, config, out);
    if (solve_cmd->parsed()) return cmd_solve(opt, config, out);
    if (verify->parsed()) return cmd_verify(opt, config, out, err);
    if (bench->parsed()) return cmd_bench(opt, config, out, err);
    if (gram_dump->parsed()) return cmd_gram_dump(opt, config, out);
    err << app.help();
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace harmrec::cli
