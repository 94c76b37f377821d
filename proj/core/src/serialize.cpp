#include "harmrec/serialize.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "harmrec/errors.hpp"

namespace harmrec {

namespace {

using nlohmann::json;

class PrecisionGuard {
 public:
  explicit PrecisionGuard(std::ostream& out) : out_(out), precision_(out.precision(17)) {}
  ~PrecisionGuard() { out_.precision(precision_); }

 private:
  std::ostream& out_;
  std::streamsize precision_;
};

json parse_json(std::istream& in, const char* what) {
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed ") + what + ": " + e.what());
  }
}

// Reads "# comment" lines, "key value" header lines and "re im" pair lines.
class PairReader {
 public:
  PairReader(std::istream& in, const char* what) : in_(in), what_(what) {}

  long long header(const std::string& key) {
    std::string line;
    while (next_line(line)) {
      std::istringstream is(line);
      std::string k;
      long long v = 0;
      if (is >> k && k == key && is >> v) return v;
      fail("expected header '" + key + "'");
    }
    fail("missing header '" + key + "'");
  }

  double header_real(const std::string& key) {
    std::string line;
    while (next_line(line)) {
      std::istringstream is(line);
      std::string k;
      double v = 0.0;
      if (is >> k && k == key && is >> v) return v;
      fail("expected header '" + key + "'");
    }
    fail("missing header '" + key + "'");
  }

  ComplexVector pairs(Index count) {
    ComplexVector values(count);
    std::string line;
    for (Index k = 0; k < count; ++k) {
      if (!next_line(line)) fail("expected " + std::to_string(count) + " values, found " + std::to_string(k));
      std::istringstream is(line);
      double re = 0.0;
      double im = 0.0;
      if (!(is >> re >> im)) fail("bad value line '" + line + "'");
      values(k) = Complex(re, im);
    }
    if (next_line(line)) fail("trailing data after " + std::to_string(count) + " values");
    return values;
  }

 private:
  bool next_line(std::string& line) {
    while (std::getline(in_, line)) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& why) { throw IoError(std::string(what_) + ": " + why); }

  std::istream& in_;
  const char* what_;
};

void write_pair(std::ostream& out, Complex z) { out << z.real() << ' ' << z.imag() << '\n'; }

}  // namespace

void write_geometry(std::ostream& out, const ArrayGeometry& geometry) {
  json occupied = json::array();
  for (const auto& e : geometry.elements()) occupied.push_back({e.m1, e.m2});
  nlohmann::ordered_json j;
  j["m1_count"] = geometry.m1_count();
  j["m2_count"] = geometry.m2_count();
  j["occupied"] = occupied;
  out << j.dump(1) << '\n';
}

ArrayGeometry read_geometry(std::istream& in) {
  const json j = parse_json(in, "geometry");
  try {
    std::vector<ElementPosition> elements;
    for (const auto& p : j.at("occupied")) {
      if (!p.is_array() || p.size() != 2) throw IoError("geometry: occupied entries must be [m1, m2] pairs");
      elements.push_back({p[0].get<int>(), p[1].get<int>()});
    }
    return ArrayGeometry(j.at("m1_count").get<int>(), j.at("m2_count").get<int>(), std::move(elements));
  } catch (const json::exception& e) {
    throw IoError(std::string("geometry: ") + e.what());
  }
}

void write_targets(std::ostream& out, std::span<const Target> targets) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& t : targets) {
    nlohmann::ordered_json item;
    item["f1"] = t.f1;
    item["f2"] = t.f2;
    item["amplitude"] = {t.amplitude.real(), t.amplitude.imag()};
    j.push_back(item);
  }
  out << j.dump(1) << '\n';
}

std::vector<Target> read_targets(std::istream& in) {
  const json j = parse_json(in, "targets");
  try {
    std::vector<Target> targets;
    for (const auto& item : j) {
      Target t;
      t.f1 = item.at("f1").get<double>();
      t.f2 = item.at("f2").get<double>();
      const auto& a = item.at("amplitude");
      t.amplitude = Complex(a.at(0).get<double>(), a.at(1).get<double>());
      targets.push_back(t);
    }
    return targets;
  } catch (const json::exception& e) {
    throw IoError(std::string("targets: ") + e.what());
  }
}

void write_snapshot(std::ostream& out, const Snapshot& snapshot) {
  PrecisionGuard guard(out);
  out << "# harmrec snapshot: re im per element, scan order m2 outer, m1 inner\n";
  out << "noise_variance " << snapshot.noise_variance << '\n';
  out << "count " << snapshot.values.size() << '\n';
  for (Index k = 0; k < snapshot.values.size(); ++k) write_pair(out, snapshot.values(k));
}

Snapshot read_snapshot(std::istream& in, const ArrayGeometry& geometry) {
  PairReader reader(in, "snapshot");
  const double variance = reader.header_real("noise_variance");
  const auto count = reader.header("count");
  if (count != geometry.element_count()) {
    throw IoError("snapshot: holds " + std::to_string(count) + " values but the geometry has " +
                  std::to_string(geometry.element_count()) + " elements");
  }
  return Snapshot{reader.pairs(static_cast<Index>(count)), geometry, variance};
}

void write_estimate(std::ostream& out, const ComplexVector& c, Index l1, Index l2) {
  if (c.size() != l1 * l2) throw InvalidArgument("estimate length does not match l1 * l2");
  PrecisionGuard guard(out);
  out << "# harmrec estimate: re im per coefficient, index l1 + l2 * L1\n";
  out << "l1 " << l1 << '\n' << "l2 " << l2 << '\n';
  for (Index k = 0; k < c.size(); ++k) write_pair(out, c(k));
}

ComplexVector read_estimate(std::istream& in, Index& l1, Index& l2) {
  PairReader reader(in, "estimate");
  l1 = static_cast<Index>(reader.header("l1"));
  l2 = static_cast<Index>(reader.header("l2"));
  if (l1 < 1 || l2 < 1) throw IoError("estimate: grid lengths must be positive");
  return reader.pairs(l1 * l2);
}

void write_support(std::ostream& out, std::span<const SupportEntry> support) {
  PrecisionGuard guard(out);
  out << "# f1 f2 re im magnitude index\n";
  for (const auto& s : support) {
    out << s.f1 << ' ' << s.f2 << ' ' << s.amplitude.real() << ' ' << s.amplitude.imag() << ' '
        << std::abs(s.amplitude) << ' ' << s.index << '\n';
  }
}

void write_eigenvalues(std::ostream& out, const BccbOperator& op) {
  PrecisionGuard guard(out);
  out << "# harmrec eigenvalues: row-major over (l1, l2), re im\n";
  out << "l1 " << op.l1() << '\n' << "l2 " << op.l2() << '\n';
  const auto& omega = op.eigenvalues();
  for (Index i = 0; i < op.l1(); ++i) {
    for (Index j = 0; j < op.l2(); ++j) write_pair(out, omega(i, j));
  }
}

ComplexMatrix read_eigenvalues(std::istream& in) {
  PairReader reader(in, "eigenvalues");
  const auto l1 = static_cast<Index>(reader.header("l1"));
  const auto l2 = static_cast<Index>(reader.header("l2"));
  if (l1 < 1 || l2 < 1) throw IoError("eigenvalues: extents must be positive");
  const ComplexVector flat = reader.pairs(l1 * l2);
  ComplexMatrix omega(l1, l2);
  for (Index i = 0; i < l1; ++i) {
    for (Index j = 0; j < l2; ++j) omega(i, j) = flat(i * l2 + j);
  }
  return omega;
}

}  // namespace harmrec
