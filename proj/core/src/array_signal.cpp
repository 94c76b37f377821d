#include "harmrec/array_signal.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <random>
#include <string>

#include "harmrec/errors.hpp"

namespace harmrec {

namespace {

// exp(-j 2 pi x) with x reduced modulo 1 first, which keeps the phase exact
// for dyadic arguments and accurate for large m.
Complex unit_phasor(double x) {
  const double frac = x - std::round(x);
  return std::polar(1.0, -2.0 * kPi * frac);
}

}  // namespace

ArrayGeometry::ArrayGeometry(int m1_count, int m2_count, std::vector<ElementPosition> elements)
    : m1_count_(m1_count), m2_count_(m2_count) {
  if (m1_count < 1 || m2_count < 1) {
    throw InvalidArgument("array extents must be positive, got " + std::to_string(m1_count) +
                          "x" + std::to_string(m2_count));
  }
  if (elements.empty()) {
    throw InvalidArgument("array geometry needs at least one element");
  }
  occupancy_.assign(static_cast<std::size_t>(m1_count) * m2_count, false);
  for (const auto& e : elements) {
    if (e.m1 < 0 || e.m1 >= m1_count || e.m2 < 0 || e.m2 >= m2_count) {
      throw InvalidArgument("element (" + std::to_string(e.m1) + ", " + std::to_string(e.m2) +
                            ") lies outside the grid");
    }
    const auto idx = static_cast<std::size_t>(e.m1) + static_cast<std::size_t>(e.m2) * m1_count;
    if (occupancy_[idx]) {
      throw InvalidArgument("duplicate element (" + std::to_string(e.m1) + ", " +
                            std::to_string(e.m2) + ")");
    }
    occupancy_[idx] = true;
  }
  elements_.reserve(elements.size());
  for (int m2 = 0; m2 < m2_count; ++m2) {
    for (int m1 = 0; m1 < m1_count; ++m1) {
      if (occupancy_[static_cast<std::size_t>(m1) + static_cast<std::size_t>(m2) * m1_count]) {
        elements_.push_back({m1, m2});
      }
    }
  }
}

bool ArrayGeometry::occupied(int m1, int m2) const {
  if (m1 < 0 || m1 >= m1_count_ || m2 < 0 || m2 >= m2_count_) return false;
  return occupancy_[static_cast<std::size_t>(m1) + static_cast<std::size_t>(m2) * m1_count_];
}

ArrayGeometry make_ura(int m1_count, int m2_count) {
  if (m1_count < 1 || m2_count < 1) {
    throw InvalidArgument("URA extents must be positive, got " + std::to_string(m1_count) + "x" +
                          std::to_string(m2_count));
  }
  std::vector<ElementPosition> elements;
  elements.reserve(static_cast<std::size_t>(m1_count) * m2_count);
  for (int m2 = 0; m2 < m2_count; ++m2) {
    for (int m1 = 0; m1 < m1_count; ++m1) elements.push_back({m1, m2});
  }
  return ArrayGeometry(m1_count, m2_count, std::move(elements));
}

ArrayGeometry subsample_preserving_aperture(const ArrayGeometry& ura, Index m, std::uint64_t seed) {
  if (!ura.is_full()) {
    throw InvalidArgument("subsampling requires a fully occupied URA");
  }
  const int m1_count = ura.m1_count();
  const int m2_count = ura.m2_count();
  const Index total = ura.element_count();
  if (m < 4 || m > total) {
    throw InvalidArgument("cannot draw " + std::to_string(m) + " aperture-preserving elements from a " +
                          std::to_string(m1_count) + "x" + std::to_string(m2_count) + " URA");
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick1(0, m1_count - 1);
  std::uniform_int_distribution<int> pick2(0, m2_count - 1);

  std::vector<bool> taken(static_cast<std::size_t>(total), false);
  std::vector<ElementPosition> chosen;
  auto take = [&](int m1, int m2) {
    const auto idx = static_cast<std::size_t>(m1) + static_cast<std::size_t>(m2) * m1_count;
    if (!taken[idx]) {
      taken[idx] = true;
      chosen.push_back({m1, m2});
    }
  };
  take(0, pick2(rng));
  take(m1_count - 1, pick2(rng));
  take(pick1(rng), 0);
  take(pick1(rng), m2_count - 1);

  std::vector<ElementPosition> pool;
  pool.reserve(static_cast<std::size_t>(total));
  for (const auto& e : ura.elements()) {
    if (!taken[static_cast<std::size_t>(e.m1) + static_cast<std::size_t>(e.m2) * m1_count]) {
      pool.push_back(e);
    }
  }
  const auto remaining = static_cast<std::size_t>(m) - chosen.size();
  std::sample(pool.begin(), pool.end(), std::back_inserter(chosen), remaining, rng);
  return ArrayGeometry(m1_count, m2_count, std::move(chosen));
}

ComplexVector steering_vector(double f, int m_count) {
  if (m_count < 1) {
    throw InvalidArgument("steering vector length must be positive");
  }
  ComplexVector a(m_count);
  for (int m = 0; m < m_count; ++m) a(m) = unit_phasor(f * m);
  return a;
}

Harmonics angles_to_harmonics(double phi, double theta) {
  if (!(phi >= -kPi && phi < kPi)) {
    throw InvalidArgument("azimuth must lie in [-pi, pi), got " + std::to_string(phi));
  }
  if (!(theta >= 0.0 && theta < kPi / 2)) {
    throw InvalidArgument("elevation must lie in [0, pi/2), got " + std::to_string(theta));
  }
  const double s = std::sin(theta);
  return {0.5 * std::cos(phi) * s, 0.5 * std::sin(phi) * s};
}

Angles harmonics_to_angles(double f1, double f2) {
  const double radius = 2.0 * std::hypot(f1, f2);
  if (!(radius <= 1.0)) {
    throw OutOfDomain("harmonic pair (" + std::to_string(f1) + ", " + std::to_string(f2) +
                      ") is not physically realizable");
  }
  const double theta = std::asin(radius);
  if (radius == 0.0) return {0.0, theta};
  double phi = std::atan2(f2, f1);
  if (phi >= kPi) phi -= 2.0 * kPi;
  return {phi, theta};
}

bool harmonic_in_range(double f) noexcept { return f >= -0.5 && f < 0.5; }

Snapshot synthesize_snapshot(const ArrayGeometry& geometry, std::span<const Target> targets,
                             double noise_variance, std::uint64_t seed) {
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw InvalidArgument("noise variance must be finite and nonnegative");
  }
  if (targets.empty() && noise_variance == 0.0) {
    throw InvalidArgument("snapshot needs at least one target or nonzero noise");
  }
  for (const auto& t : targets) {
    if (!harmonic_in_range(t.f1) || !harmonic_in_range(t.f2)) {
      throw InvalidArgument("target harmonic (" + std::to_string(t.f1) + ", " +
                            std::to_string(t.f2) + ") outside [-1/2, 1/2)");
    }
  }

  const auto elements = geometry.elements();
  ComplexVector values = ComplexVector::Zero(geometry.element_count());
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const auto& e = elements[i];
    Complex acc{0.0, 0.0};
    for (const auto& t : targets) {
      acc += t.amplitude * unit_phasor(e.m1 * t.f1 + e.m2 * t.f2);
    }
    values(static_cast<Index>(i)) = acc;
  }

  if (noise_variance > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(noise_variance / 2.0));
    for (Index i = 0; i < values.size(); ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      values(i) += Complex(re, im);
    }
  }
  return Snapshot{std::move(values), geometry, noise_variance};
}

double snr_to_noise_variance(std::span<const Target> targets, double snr_db) {
  if (targets.empty()) {
    throw InvalidArgument("SNR is undefined without targets");
  }
  double power = 0.0;
  for (const auto& t : targets) power += std::norm(t.amplitude);
  if (!(power > 0.0)) {
    throw InvalidArgument("targets carry zero total power");
  }
  return power / std::pow(10.0, snr_db / 10.0);
}

}  // namespace harmrec
