#include "config.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "harmrec/errors.hpp"

namespace harmrec::cli {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

template <class T>
ordered_json optional_json(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

const json& field(const json& section, const std::string& section_name, const char* key) {
  const std::string name = section_name.empty() ? key : section_name + "." + key;
  if (!section.is_object() || !section.contains(key)) throw ConfigError(name, "missing");
  return section.at(key);
}

class Reader {
 public:
  Reader(const json& root, std::string section) : section_name_(std::move(section)) {
    node_ = section_name_.empty() ? &root : &field(root, "", section_name_.c_str());
    if (!node_->is_object()) throw ConfigError(section_name_, "must be an object");
  }

  std::string name(const char* key) const { return section_name_.empty() ? key : section_name_ + "." + key; }
  const json& raw(const char* key) const { return field(*node_, section_name_, key); }

  double real(const char* key) const {
    const auto& v = raw(key);
    if (!v.is_number()) throw ConfigError(name(key), "must be a number");
    return v.get<double>();
  }

  std::optional<double> optional_real(const char* key) const {
    if (raw(key).is_null()) return std::nullopt;
    return real(key);
  }

  long long integer(const char* key, long long min, long long max = std::numeric_limits<long long>::max()) const {
    const auto& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(name(key), "must be an integer");
    const auto x = v.get<long long>();
    if (x < min || x > max) {
      throw ConfigError(name(key), "must lie in [" + std::to_string(min) + ", " + std::to_string(max) + "]");
    }
    return x;
  }

  std::uint64_t seed(const char* key) const {
    const auto& v = raw(key);
    if (!v.is_number_unsigned()) throw ConfigError(name(key), "must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const char* key) const {
    const auto& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(name(key), "must be true or false");
    return v.get<bool>();
  }

  std::string string(const char* key) const {
    const auto& v = raw(key);
    if (!v.is_string()) throw ConfigError(name(key), "must be a string");
    return v.get<std::string>();
  }

  void reject_unknown(std::initializer_list<const char*> keys) const {
    for (const auto& item : node_->items()) {
      bool known = false;
      for (const char* k : keys) known |= item.key() == k;
      if (!known) throw ConfigError(name(item.key().c_str()), "unknown field");
    }
  }

 private:
  std::string section_name_;
  const json* node_;
};

void require(bool ok, const std::string& field_name, const std::string& why) {
  if (!ok) throw ConfigError(field_name, why);
}

// Overlays src onto dst. Objects merge key by key; anything else replaces.
void overlay(json& dst, const json& src, const std::string& path) {
  if (!src.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "must be an object");
  for (const auto& item : src.items()) {
    const std::string name = path.empty() ? item.key() : path + "." + item.key();
    if (!dst.contains(item.key())) throw ConfigError(name, "unknown field");
    auto& slot = dst[item.key()];
    if (slot.is_object()) {
      overlay(slot, item.value(), name);
    } else {
      slot = item.value();
    }
  }
}

Algorithm algorithm_field(const Reader& r, const char* key) {
  try {
    return parse_algorithm(r.string(key));
  } catch (const InvalidArgument& e) {
    throw ConfigError(r.name(key), e.what());
  }
}

}  // namespace

ordered_json to_json(const Config& c) {
  ordered_json j;
  j["array"] = {{"m1_count", c.array.m1_count},
                {"m2_count", c.array.m2_count},
                {"element_count", c.array.element_count},
                {"seed", c.array.seed}};

  ordered_json targets = ordered_json::array();
  for (const auto& t : c.scenario.targets) {
    targets.push_back({{"f1", t.f1}, {"f2", t.f2}, {"amplitude", {t.amplitude.real(), t.amplitude.imag()}}});
  }
  j["scenario"] = {{"targets", targets},
                   {"k_min", c.scenario.k_min},
                   {"k_max", c.scenario.k_max},
                   {"on_grid", c.scenario.on_grid},
                   {"snr_db", optional_json(c.scenario.snr_db)},
                   {"noise_variance", optional_json(c.scenario.noise_variance)},
                   {"seed", c.scenario.seed}};

  j["grid"] = {{"l1", c.grid.l1}, {"l2", c.grid.l2}};

  j["solver"] = {{"algorithm", std::string(to_string(c.solver.algorithm))},
                 {"backend", std::string(to_string(c.solver.backend))},
                 {"iterations", c.solver.iterations},
                 {"tau", optional_json(c.solver.tau)},
                 {"tau_fraction", c.solver.tau_fraction},
                 {"rho", c.solver.rho},
                 {"step_size", optional_json(c.solver.step_size)},
                 {"support_threshold", c.solver.support_threshold}};

  j["verify"] = {{"tolerance", c.verify.tolerance},
                 {"dense_cap", c.verify.dense_cap},
                 {"perturb_grid", c.verify.perturb_grid}};

  const auto& e = c.experiment;
  ordered_json solvers = ordered_json::array();
  for (auto s : e.solvers) solvers.push_back(std::string(to_string(s)));
  j["experiment"] = {{"m1_count", e.m1_count},
                     {"m2_count", e.m2_count},
                     {"element_count", e.element_count},
                     {"l2", e.l2},
                     {"l1_values", e.l1_values},
                     {"iteration_values", e.iteration_values},
                     {"snr_db", e.snr_db},
                     {"k_min", e.k_min},
                     {"k_max", e.k_max},
                     {"trials", e.trials},
                     {"fast_repeats", e.fast_repeats},
                     {"base_seed", e.base_seed},
                     {"solvers", solvers},
                     {"tau_fraction", e.tau_fraction},
                     {"rho", e.rho}};

  j["memory_budget_bytes"] = c.memory_budget_bytes;
  return j;
}

Config from_json(const json& root) {
  Config c;
  const Reader top(root, "");
  top.reject_unknown({"array", "scenario", "grid", "solver", "verify", "experiment", "memory_budget_bytes"});
  const auto budget = top.integer("memory_budget_bytes", 1);
  c.memory_budget_bytes = static_cast<std::size_t>(budget);

  {
    const Reader r(root, "array");
    r.reject_unknown({"m1_count", "m2_count", "element_count", "seed"});
    c.array.m1_count = static_cast<int>(r.integer("m1_count", 1, 1 << 20));
    c.array.m2_count = static_cast<int>(r.integer("m2_count", 1, 1 << 20));
    c.array.element_count = static_cast<Index>(r.integer("element_count", 1));
    c.array.seed = r.seed("seed");
    const Index total = Index{c.array.m1_count} * c.array.m2_count;
    require(c.array.element_count <= total, "array.element_count", "exceeds m1_count * m2_count");
    require(c.array.element_count == total || c.array.element_count >= 4, "array.element_count",
            "a thinned array needs at least 4 elements");
  }
  {
    const Reader r(root, "scenario");
    r.reject_unknown({"targets", "k_min", "k_max", "on_grid", "snr_db", "noise_variance", "seed"});
    const auto& targets = r.raw("targets");
    require(targets.is_array(), "scenario.targets", "must be an array");
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const std::string name = "scenario.targets[" + std::to_string(i) + "]";
      const auto& t = targets[i];
      require(t.is_object() && t.contains("f1") && t.contains("f2") && t.contains("amplitude"), name,
              "needs f1, f2 and amplitude");
      require(t["f1"].is_number() && t["f2"].is_number(), name, "f1 and f2 must be numbers");
      const auto& a = t["amplitude"];
      require(a.is_array() && a.size() == 2 && a[0].is_number() && a[1].is_number(), name + ".amplitude",
              "must be [re, im]");
      const Target target{t["f1"].get<double>(), t["f2"].get<double>(),
                          Complex(a[0].get<double>(), a[1].get<double>())};
      require(harmonic_in_range(target.f1) && harmonic_in_range(target.f2), name, "harmonics must lie in [-1/2, 1/2)");
      c.scenario.targets.push_back(target);
    }
    c.scenario.k_min = static_cast<int>(r.integer("k_min", 1, 1 << 20));
    c.scenario.k_max = static_cast<int>(r.integer("k_max", c.scenario.k_min, 1 << 20));
    c.scenario.on_grid = r.boolean("on_grid");
    c.scenario.snr_db = r.optional_real("snr_db");
    c.scenario.noise_variance = r.optional_real("noise_variance");
    require(c.scenario.snr_db || c.scenario.noise_variance, "scenario.snr_db", "set snr_db or noise_variance");
    require(!c.scenario.noise_variance || *c.scenario.noise_variance >= 0.0, "scenario.noise_variance",
            "must be nonnegative");
    c.scenario.seed = r.seed("seed");
  }
  {
    const Reader r(root, "grid");
    r.reject_unknown({"l1", "l2"});
    c.grid.l1 = static_cast<Index>(r.integer("l1", 1, 1 << 24));
    c.grid.l2 = static_cast<Index>(r.integer("l2", 1, 1 << 24));
  }
  {
    const Reader r(root, "solver");
    r.reject_unknown(
        {"algorithm", "backend", "iterations", "tau", "tau_fraction", "rho", "step_size", "support_threshold"});
    c.solver.algorithm = algorithm_field(r, "algorithm");
    try {
      c.solver.backend = parse_backend(r.string("backend"));
    } catch (const InvalidArgument& e) {
      throw ConfigError("solver.backend", e.what());
    }
    c.solver.iterations = static_cast<int>(r.integer("iterations", 1, std::numeric_limits<int>::max()));
    c.solver.tau = r.optional_real("tau");
    require(!c.solver.tau || *c.solver.tau > 0.0, "solver.tau", "must be positive");
    c.solver.tau_fraction = r.real("tau_fraction");
    require(c.solver.tau_fraction > 0.0, "solver.tau_fraction", "must be positive");
    c.solver.rho = r.real("rho");
    require(c.solver.rho > 0.0, "solver.rho", "must be positive");
    c.solver.step_size = r.optional_real("step_size");
    require(!c.solver.step_size || *c.solver.step_size > 0.0, "solver.step_size", "must be positive");
    c.solver.support_threshold = r.real("support_threshold");
    require(c.solver.support_threshold > 0.0 && c.solver.support_threshold < 1.0, "solver.support_threshold",
            "must lie in (0, 1)");
  }
  {
    const Reader r(root, "verify");
    r.reject_unknown({"tolerance", "dense_cap", "perturb_grid"});
    c.verify.tolerance = r.real("tolerance");
    require(c.verify.tolerance >= 0.0, "verify.tolerance", "must be nonnegative");
    c.verify.dense_cap = static_cast<Index>(r.integer("dense_cap", 1));
    c.verify.perturb_grid = r.boolean("perturb_grid");
  }
  {
    const Reader r(root, "experiment");
    r.reject_unknown({"m1_count", "m2_count", "element_count", "l2", "l1_values", "iteration_values", "snr_db",
                      "k_min", "k_max", "trials", "fast_repeats", "base_seed", "solvers", "tau_fraction", "rho"});
    auto& e = c.experiment;
    e.m1_count = static_cast<int>(r.integer("m1_count", 1, 1 << 20));
    e.m2_count = static_cast<int>(r.integer("m2_count", 1, 1 << 20));
    e.element_count = static_cast<Index>(r.integer("element_count", 1));
    e.l2 = static_cast<Index>(r.integer("l2", 1, 1 << 24));
    const auto int_list = [&](const char* key) {
      const auto& v = r.raw(key);
      require(v.is_array() && !v.empty(), r.name(key), "must be a nonempty array of positive integers");
      std::vector<long long> out;
      for (const auto& x : v) {
        require(x.is_number_integer() && x.get<long long>() >= 1, r.name(key), "entries must be positive integers");
        out.push_back(x.get<long long>());
      }
      return out;
    };
    e.l1_values.clear();
    for (auto x : int_list("l1_values")) e.l1_values.push_back(static_cast<Index>(x));
    e.iteration_values.clear();
    for (auto x : int_list("iteration_values")) e.iteration_values.push_back(static_cast<int>(x));
    e.snr_db = r.real("snr_db");
    e.k_min = static_cast<int>(r.integer("k_min", 1, 1 << 20));
    e.k_max = static_cast<int>(r.integer("k_max", e.k_min, 1 << 20));
    e.trials = static_cast<int>(r.integer("trials", 1, 1 << 20));
    e.fast_repeats = static_cast<int>(r.integer("fast_repeats", 1, 1 << 20));
    e.base_seed = r.seed("base_seed");
    const auto& solvers = r.raw("solvers");
    require(solvers.is_array() && !solvers.empty(), "experiment.solvers", "must be a nonempty array");
    e.solvers.clear();
    for (const auto& s : solvers) {
      require(s.is_string(), "experiment.solvers", "entries must be solver names");
      try {
        e.solvers.push_back(parse_algorithm(s.get<std::string>()));
      } catch (const InvalidArgument& ex) {
        throw ConfigError("experiment.solvers", ex.what());
      }
    }
    e.tau_fraction = r.real("tau_fraction");
    e.rho = r.real("rho");
    e.memory_budget_bytes = c.memory_budget_bytes;
    try {
      e.validate();
    } catch (const InvalidArgument& ex) {
      throw ConfigError("experiment", ex.what());
    }
  }
  return c;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(assignment, "override must have the form key.path=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);

  json* node = &j;
  std::string walked;
  std::istringstream keys(path);
  std::string key;
  while (std::getline(keys, key, '.')) {
    walked = walked.empty() ? key : walked + "." + key;
    if (!node->is_object() || !node->contains(key)) throw ConfigError(walked, "unknown field");
    node = &(*node)[key];
  }

  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  *node = std::move(value);
}

Config load_config(const std::string& path, const std::vector<std::string>& overrides) {
  json j = json::parse(to_json(Config{}).dump());
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    json file;
    try {
      file = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
      throw ConfigError(path, std::string("malformed JSON: ") + e.what());
    }
    overlay(j, file, "");
  }
  for (const auto& o : overrides) apply_override(j, o);
  return from_json(j);
}

std::string dump_config(const Config& config) { return to_json(config).dump(2) + "\n"; }

}  // namespace harmrec::cli
