#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "harmrec/array_signal.hpp"
#include "harmrec/errors.hpp"
#include "oracles.hpp"

namespace harmrec {
namespace {

TEST(MakeUra, SmallGridIsFullyOccupied) {
  const auto g = make_ura(2, 3);
  EXPECT_EQ(g.element_count(), 6);
  EXPECT_TRUE(g.is_full());
  for (int m2 = 0; m2 < 3; ++m2) {
    for (int m1 = 0; m1 < 2; ++m1) EXPECT_TRUE(g.occupied(m1, m2));
  }
}

TEST(MakeUra, ReferenceArraySize) { EXPECT_EQ(make_ura(51, 16).element_count(), 816); }

TEST(MakeUra, SingleElement) {
  const auto g = make_ura(1, 1);
  ASSERT_EQ(g.element_count(), 1);
  EXPECT_EQ(g.elements()[0], (ElementPosition{0, 0}));
}

TEST(MakeUra, RejectsNonPositiveExtents) {
  EXPECT_THROW(make_ura(0, 3), InvalidArgument);
  EXPECT_THROW(make_ura(3, -1), InvalidArgument);
}

TEST(ArrayGeometry, ScanOrderIsM2OuterM1Inner) {
  const ArrayGeometry g(3, 2, {{2, 1}, {0, 0}, {1, 1}, {2, 0}});
  const std::vector<ElementPosition> expected{{0, 0}, {2, 0}, {1, 1}, {2, 1}};
  ASSERT_EQ(g.element_count(), 4);
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(g.elements()[i], expected[i]);
}

TEST(ArrayGeometry, RejectsDuplicatesAndOutOfGrid) {
  EXPECT_THROW(ArrayGeometry(2, 2, {{0, 0}, {0, 0}}), InvalidArgument);
  EXPECT_THROW(ArrayGeometry(2, 2, {{2, 0}}), InvalidArgument);
  EXPECT_THROW(ArrayGeometry(2, 2, {}), InvalidArgument);
}

TEST(Subsample, ReferenceGeometryKeepsAperture) {
  const auto g = subsample_preserving_aperture(make_ura(51, 16), 40, 11);
  EXPECT_EQ(g.element_count(), 40);
  bool row0 = false, row_last = false, col0 = false, col_last = false;
  for (const auto& e : g.elements()) {
    row0 |= e.m1 == 0;
    row_last |= e.m1 == 50;
    col0 |= e.m2 == 0;
    col_last |= e.m2 == 15;
  }
  EXPECT_TRUE(row0 && row_last && col0 && col_last);
}

TEST(Subsample, FullDrawReturnsUra) {
  const auto ura = make_ura(2, 2);
  EXPECT_EQ(subsample_preserving_aperture(ura, 4, 99), ura);
}

TEST(Subsample, DeterministicForFixedSeed) {
  const auto ura = make_ura(8, 8);
  EXPECT_EQ(subsample_preserving_aperture(ura, 12, 7), subsample_preserving_aperture(ura, 12, 7));
  EXPECT_NE(subsample_preserving_aperture(ura, 12, 7), subsample_preserving_aperture(ura, 12, 8));
}

TEST(Subsample, RejectsBadCounts) {
  const auto ura = make_ura(4, 4);
  EXPECT_THROW(subsample_preserving_aperture(ura, 3, 1), InvalidArgument);
  EXPECT_THROW(subsample_preserving_aperture(ura, 17, 1), InvalidArgument);
  const auto partial = subsample_preserving_aperture(ura, 8, 1);
  EXPECT_THROW(subsample_preserving_aperture(partial, 5, 1), InvalidArgument);
}

TEST(Subsample, ApertureHoldsAcrossSeedSweep) {
  const auto ura = make_ura(9, 6);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto g = subsample_preserving_aperture(ura, 7, seed);
    ASSERT_EQ(g.element_count(), 7);
    bool row0 = false, row_last = false, col0 = false, col_last = false;
    for (const auto& e : g.elements()) {
      row0 |= e.m1 == 0;
      row_last |= e.m1 == 8;
      col0 |= e.m2 == 0;
      col_last |= e.m2 == 5;
    }
    EXPECT_TRUE(row0 && row_last && col0 && col_last) << "seed " << seed;
  }
}

TEST(SteeringVector, ZeroHarmonicIsOnes) {
  const auto a = steering_vector(0.0, 4);
  for (Index m = 0; m < 4; ++m) EXPECT_EQ(a(m), Complex(1.0, 0.0));
}

TEST(SteeringVector, NyquistAlternates) {
  const auto a = steering_vector(0.5, 4);
  const double expected[] = {1, -1, 1, -1};
  for (Index m = 0; m < 4; ++m) {
    EXPECT_NEAR(a(m).real(), expected[m], 1e-15);
    EXPECT_NEAR(a(m).imag(), 0.0, 1e-15);
  }
}

TEST(SteeringVector, MatchesDirectEvaluation) {
  const auto a = steering_vector(0.125, 8);
  for (Index m = 0; m < 8; ++m) {
    const Complex direct = std::exp(Complex(0.0, -kPi * double(m) / 4.0));
    EXPECT_LT(std::abs(a(m) - direct), 1e-14);
  }
}

TEST(SteeringVector, EntriesHaveUnitModulus) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> f(-0.5, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = steering_vector(f(rng), 64);
    for (Index m = 0; m < a.size(); ++m) EXPECT_LE(std::abs(std::abs(a(m)) - 1.0), 1e-12);
  }
}

TEST(Angles, Broadside) {
  const auto h = angles_to_harmonics(0.0, 0.0);
  EXPECT_EQ(h.f1, 0.0);
  EXPECT_EQ(h.f2, 0.0);
}

TEST(Angles, EndfireLimitAlongX) {
  const auto h = angles_to_harmonics(0.0, kPi / 2 - 1e-9);
  EXPECT_NEAR(h.f1, 0.5, 1e-12);
  EXPECT_NEAR(h.f2, 0.0, 1e-15);
}

TEST(Angles, DiagonalCase) {
  const auto h = angles_to_harmonics(kPi / 4, kPi / 6);
  EXPECT_NEAR(h.f1, std::sqrt(2.0) / 8, 1e-15);
  EXPECT_NEAR(h.f2, std::sqrt(2.0) / 8, 1e-15);
}

TEST(Angles, RejectsOutOfRange) {
  EXPECT_THROW(angles_to_harmonics(kPi, 0.1), InvalidArgument);
  EXPECT_THROW(angles_to_harmonics(0.0, kPi / 2), InvalidArgument);
  EXPECT_THROW(angles_to_harmonics(0.0, -0.1), InvalidArgument);
}

TEST(Angles, InverseAtOriginUsesZeroAzimuth) {
  const auto a = harmonics_to_angles(0.0, 0.0);
  EXPECT_EQ(a.phi, 0.0);
  EXPECT_EQ(a.theta, 0.0);
}

TEST(Angles, InverseOfQuarterPair) {
  const auto a = harmonics_to_angles(0.25, 0.25);
  EXPECT_NEAR(a.phi, kPi / 4, 1e-15);
  EXPECT_NEAR(a.theta, kPi / 4, 1e-15);
}

TEST(Angles, InverseRejectsUnrealizablePair) { EXPECT_THROW(harmonics_to_angles(0.4, 0.4), OutOfDomain); }

TEST(Angles, RoundTrip) {
  const auto h = angles_to_harmonics(kPi / 3, kPi / 5);
  const auto a = harmonics_to_angles(h.f1, h.f2);
  EXPECT_NEAR(a.phi, kPi / 3, 1e-12);
  EXPECT_NEAR(a.theta, kPi / 5, 1e-12);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> phi(-kPi, kPi);
  std::uniform_real_distribution<double> theta(1e-6, kPi / 2 - 1e-3);
  for (int i = 0; i < 1000; ++i) {
    const double p = phi(rng);
    const double t = theta(rng);
    const auto hh = angles_to_harmonics(p, t);
    const auto aa = harmonics_to_angles(hh.f1, hh.f2);
    ASSERT_NEAR(aa.phi, p, 1e-10);
    ASSERT_NEAR(aa.theta, t, 1e-10);
  }
}

TEST(Synthesize, NoiselessZeroHarmonicIsOnes) {
  const auto g = subsample_preserving_aperture(make_ura(10, 7), 20, 5);
  const std::vector<Target> targets{{0.0, 0.0, {1.0, 0.0}}};
  const auto s = synthesize_snapshot(g, targets, 0.0, 1);
  ASSERT_EQ(s.values.size(), 20);
  for (Index k = 0; k < 20; ++k) EXPECT_EQ(s.values(k), Complex(1.0, 0.0));
}

TEST(Synthesize, TwoTargetsMatchDirectEvaluation) {
  const auto g = subsample_preserving_aperture(make_ura(12, 9), 30, 2);
  const std::vector<Target> targets{{0.131, -0.27, {0.8, 0.3}}, {-0.402, 0.055, {-0.2, 1.1}}};
  const auto s = synthesize_snapshot(g, targets, 0.0, 1);
  Index row = 0;
  for (const auto& e : g.elements()) {
    Complex direct{0.0, 0.0};
    for (const auto& t : targets) direct += t.amplitude * oracle::phasor(e.m1 * t.f1 + e.m2 * t.f2);
    EXPECT_LT(std::abs(s.values(row) - direct), 1e-12);
    ++row;
  }
}

TEST(Synthesize, NoiseVarianceMatchesRequest) {
  const auto g = make_ura(25, 20);
  const auto s = synthesize_snapshot(g, {}, 1.0, 1234);
  ASSERT_EQ(s.values.size(), 500);
  const double mean_power = s.values.squaredNorm() / 500.0;
  EXPECT_NEAR(mean_power, 1.0, 0.2);
}

TEST(Synthesize, NoiselessIsLinearInAmplitudes) {
  const auto g = subsample_preserving_aperture(make_ura(16, 8), 25, 4);
  std::vector<Target> targets{{0.1, 0.2, {1.0, -0.5}}, {-0.3, 0.45, {0.25, 0.75}}};
  const Complex scale(1.7, -2.3);
  auto scaled = targets;
  for (auto& t : scaled) t.amplitude *= scale;
  const auto a = synthesize_snapshot(g, targets, 0.0, 0);
  const auto b = synthesize_snapshot(g, scaled, 0.0, 0);
  EXPECT_LT((b.values - scale * a.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Synthesize, DeterministicPerSeed) {
  const auto g = make_ura(6, 6);
  const std::vector<Target> targets{{0.2, -0.1, {1.0, 0.0}}};
  EXPECT_EQ(synthesize_snapshot(g, targets, 0.5, 42).values, synthesize_snapshot(g, targets, 0.5, 42).values);
}

TEST(Synthesize, RejectsInvalidInput) {
  const auto g = make_ura(3, 3);
  EXPECT_THROW(synthesize_snapshot(g, {}, 0.0, 0), InvalidArgument);
  const std::vector<Target> bad{{0.5, 0.0, {1.0, 0.0}}};
  EXPECT_THROW(synthesize_snapshot(g, bad, 0.0, 0), InvalidArgument);
}

TEST(Snr, UnitTargetAtZeroDb) {
  const std::vector<Target> t{{0.0, 0.0, {1.0, 0.0}}};
  EXPECT_DOUBLE_EQ(snr_to_noise_variance(t, 0.0), 1.0);
}

TEST(Snr, ReferenceLevel) {
  const std::vector<Target> one{{0.1, 0.1, std::polar(1.0, 0.3)}};
  EXPECT_NEAR(snr_to_noise_variance(one, 15.0), 0.031622776601683794, 1e-15);
  const std::vector<Target> two{{0.1, 0.1, {1.0, 0.0}}, {0.2, -0.3, {0.0, 1.0}}};
  EXPECT_NEAR(snr_to_noise_variance(two, 15.0), 0.063245553203367588, 1e-15);
}

TEST(Snr, RejectsEmptyTargets) { EXPECT_THROW(snr_to_noise_variance({}, 15.0), InvalidArgument); }

}  // namespace
}  // namespace harmrec
