#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "harmrec/bccb.hpp"
#include "harmrec/dictionary.hpp"
#include "harmrec/errors.hpp"
#include "oracles.hpp"

namespace harmrec {
namespace {

double relative(const ComplexVector& got, const ComplexVector& want) { return (got - want).norm() / want.norm(); }

ComplexMatrix oracle_gram(const ArrayGeometry& g, Index l1, Index l2) {
  return oracle::gram(oracle::subsampled_dictionary(g, l1, l2));
}

FirstColumn column_of(const ComplexVector& r, Index l1, Index l2) { return FirstColumn{l1, l2, r}; }

// Compare two multisets of complex numbers by greedy nearest matching.
double multiset_distance(std::vector<Complex> a, std::vector<Complex> b) {
  double worst = 0.0;
  for (const auto& x : a) {
    auto best = std::min_element(b.begin(), b.end(),
                                 [&](Complex p, Complex q) { return std::abs(p - x) < std::abs(q - x); });
    worst = std::max(worst, std::abs(*best - x));
    b.erase(best);
  }
  return worst;
}

void expect_gram_spectrum(const BccbOperator& op, double m) {
  const auto s = spectral_summary(op);
  const double l = double(op.size());
  EXPECT_LE(std::abs(s.sum - Complex(m * l, 0.0)), 1e-8 * m * l);
  EXPECT_GE(s.min_real, -1e-8 * s.max_real);
  EXPECT_LE(s.max_abs_imag, 1e-8 * s.max_real);
}

TEST(GramFirstColumn, SingleElementAtOriginIsOnes) {
  const ArrayGeometry g(4, 4, {{0, 0}});
  const auto col = gram_first_column(g, 5, 3);
  ASSERT_EQ(col.r.size(), 15);
  for (Index k = 0; k < 15; ++k) EXPECT_LT(std::abs(col.r(k) - Complex(1.0, 0.0)), 1e-15);
}

TEST(GramFirstColumn, LeadingEntryIsElementCount) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = oracle::random_geometry(9, 7, 1 + trial, rng);
    const auto col = gram_first_column(g, 11, 6);
    EXPECT_NEAR(col.r(0).real(), double(g.element_count()), 1e-12);
    EXPECT_NEAR(col.r(0).imag(), 0.0, 1e-12);
  }
}

TEST(GramFirstColumn, ReferenceGeometryMatchesDenseGram) {
  const auto g = subsample_preserving_aperture(make_ura(51, 16), 40, 2024);
  const ComplexMatrix d = oracle::subsampled_dictionary(g, 64, 32);
  const ComplexVector first = d.adjoint() * d.col(0);
  const auto col = gram_first_column(g, 64, 32);
  EXPECT_LT((col.r - first).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(BccbFromFirstColumn, DeltaGivesIdentity) {
  ComplexVector r = ComplexVector::Zero(12);
  r(0) = 1.0;
  const auto op = bccb_from_first_column(column_of(r, 4, 3));
  EXPECT_LT((op.eigenvalues() - ComplexMatrix::Ones(4, 3)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BccbFromFirstColumn, OnesGivesScaledDelta) {
  const auto op = bccb_from_first_column(column_of(ComplexVector::Ones(20), 5, 4));
  ComplexMatrix expected = ComplexMatrix::Zero(5, 4);
  expected(0, 0) = 20.0;
  EXPECT_LT((op.eigenvalues() - expected).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(BccbFromFirstColumn, MatchesDenseEigenvalues) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexVector r = oracle::random_vector(16, rng);
    const auto op = bccb_from_first_column(column_of(r, 4, 4));
    const auto dense_ev = oracle::eigenvalues_general(oracle::bccb_from_column(r, 4, 4));
    std::vector<Complex> ours(op.eigenvalues().data(), op.eigenvalues().data() + 16);
    EXPECT_LT(multiset_distance(ours, dense_ev), 1e-10);
  }
}

TEST(BccbFromFirstColumn, RejectsLengthMismatch) {
  EXPECT_THROW(bccb_from_first_column(column_of(ComplexVector::Ones(10), 5, 2), 4, 3), InvalidArgument);
}

TEST(BccbMatvec, IdentityIsExact) {
  std::mt19937_64 rng(1);
  const auto id = BccbOperator::identity(6, 5);
  const ComplexVector c = oracle::random_vector(30, rng);
  EXPECT_LT((bccb_matvec(id, c) - c).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BccbMatvec, RandomOperatorMatchesDense) {
  std::mt19937_64 rng(2);
  const ComplexVector r = oracle::random_vector(32, rng);
  const auto op = bccb_from_first_column(column_of(r, 8, 4));
  const ComplexMatrix dense = oracle::bccb_from_column(r, 8, 4);
  const ComplexVector c = oracle::random_vector(32, rng);
  EXPECT_LE(relative(bccb_matvec(op, c), oracle::matvec(dense, c)), 1e-11);
}

TEST(BccbMatvec, GramMatchesFactoredProduct) {
  std::mt19937_64 rng(3);
  const auto g = oracle::random_geometry(6, 5, 9, rng);
  const Index l1 = 8;
  const Index l2 = 7;
  const auto op = gram_operator(g, l1, l2);
  const ComplexMatrix d = oracle::subsampled_dictionary(g, l1, l2);
  for (Index l : {Index{0}, Index{5}, Index{17}, Index{55}}) {
    ComplexVector e = ComplexVector::Zero(l1 * l2);
    e(l) = 1.0;
    const ComplexVector want = oracle::matvec(d.adjoint(), oracle::matvec(d, e));
    EXPECT_LT((bccb_matvec(op, e) - want).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(BccbMatvec, RejectsLengthMismatch) {
  EXPECT_THROW(bccb_matvec(BccbOperator::identity(3, 3), ComplexVector::Zero(8)), InvalidArgument);
}

TEST(BccbMatvec, OracleEquivalenceOnRandomInstances) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> extent(1, 10);
  std::uniform_int_distribution<int> len(1, 16);
  for (int trial = 0; trial < 100; ++trial) {
    const int m1 = extent(rng);
    const int m2 = extent(rng);
    const Index count = std::uniform_int_distribution<Index>(1, m1 * m2)(rng);
    const auto g = oracle::random_geometry(m1, m2, count, rng);
    const Index l1 = len(rng);
    const Index l2 = len(rng);
    const auto op = gram_operator(g, l1, l2);
    const ComplexMatrix dense = oracle_gram(g, l1, l2);
    const ComplexVector c = oracle::random_vector(l1 * l2, rng);
    EXPECT_LE(relative(bccb_matvec(op, c), oracle::matvec(dense, c)), 1e-11) << "trial " << trial;
    expect_gram_spectrum(op, double(count));
  }
}

TEST(BccbMatvec, IsLinear) {
  std::mt19937_64 rng(5);
  const auto op = bccb_from_first_column(column_of(oracle::random_vector(48, rng), 8, 6));
  const Complex alpha(0.7, -1.9);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexVector c1 = oracle::random_vector(48, rng);
    const ComplexVector c2 = oracle::random_vector(48, rng);
    const ComplexVector want = alpha * bccb_matvec(op, c1) + bccb_matvec(op, c2);
    EXPECT_LE(relative(bccb_matvec(op, alpha * c1 + c2), want), 1e-12);
  }
}

TEST(BccbMatvec, SingleBlockIsCirculant) {
  std::mt19937_64 rng(6);
  const ComplexVector r = oracle::random_vector(13, rng);
  const auto op = bccb_from_first_column(column_of(r, 13, 1));
  const ComplexVector c = oracle::random_vector(13, rng);
  EXPECT_LE(relative(bccb_matvec(op, c), oracle::matvec(oracle::bccb_from_column(r, 13, 1), c)), 1e-12);
}

TEST(BccbMatvec, WorkspaceApplyAllowsAliasing) {
  std::mt19937_64 rng(7);
  const auto op = bccb_from_first_column(column_of(oracle::random_vector(24, rng), 6, 4));
  ComplexVector x = oracle::random_vector(24, rng);
  const ComplexVector want = bccb_matvec(op, x);
  auto ws = op.make_workspace();
  op.apply(x, x, ws);
  EXPECT_LT((x - want).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(BccbMatvec, ConcurrentCallersAgree) {
  std::mt19937_64 rng(9);
  const auto op = gram_operator(oracle::random_geometry(8, 8, 20, rng), 32, 16);
  const ComplexVector c = oracle::random_vector(op.size(), rng);
  const ComplexVector want = bccb_matvec(op, c);
  std::vector<ComplexVector> results(4);
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < results.size(); ++t) {
    threads.emplace_back([&, t] {
      auto ws = op.make_workspace();
      ComplexVector y(op.size());
      for (int rep = 0; rep < 50; ++rep) op.apply(c, y, ws);
      results[t] = y;
    });
  }
  for (auto& th : threads) th.join();
  for (const auto& y : results) EXPECT_EQ(y, want);
}

TEST(ScaleAddIdentity, AnnihilateThenAddIdentity) {
  std::mt19937_64 rng(10);
  const auto op = bccb_from_first_column(column_of(oracle::random_vector(12, rng), 4, 3));
  const auto id = bccb_scale_add_identity(op, 0.0, 1.0);
  EXPECT_EQ(id.eigenvalues(), ComplexMatrix::Ones(4, 3));
}

TEST(ScaleAddIdentity, UnitScaleIsNoOp) {
  std::mt19937_64 rng(11);
  const auto op = bccb_from_first_column(column_of(oracle::random_vector(12, rng), 4, 3));
  EXPECT_EQ(bccb_scale_add_identity(op, 1.0, 0.0).eigenvalues(), op.eigenvalues());
}

TEST(ScaleAddIdentity, GradientMapMatchesDense) {
  std::mt19937_64 rng(12);
  const auto g = oracle::random_geometry(5, 4, 8, rng);
  const double mu = 1.0 / 8.0;
  const auto w = bccb_scale_add_identity(gram_operator(g, 6, 5), -mu, 1.0);
  const ComplexMatrix want = ComplexMatrix::Identity(30, 30) - mu * oracle_gram(g, 6, 5);
  EXPECT_LT((bccb_to_dense(w) - want).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(BccbInverse, IdentityIsSelfInverse) {
  EXPECT_EQ(bccb_inverse(BccbOperator::identity(3, 5)).eigenvalues(), ComplexMatrix::Ones(3, 5));
}

TEST(BccbInverse, ShiftedGramBoundedBelowByRho) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const auto shifted = bccb_scale_add_identity(gram_operator(oracle::random_geometry(6, 6, 10, rng), 8, 8), 1.0, 1.0);
    EXPECT_GE(spectral_summary(shifted).min_real, 1.0 - 1e-10);
    EXPECT_NO_THROW(bccb_inverse(shifted));
  }
}

TEST(BccbInverse, MatchesDenseInverse) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> pos(0.5, 3.0);
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  ComplexMatrix omega(4, 4);
  for (Index i = 0; i < 16; ++i) omega.data()[i] = std::polar(pos(rng), phase(rng));
  const BccbOperator op(4, 4, omega);
  const ComplexMatrix want = bccb_to_dense(op).inverse();
  EXPECT_LT((bccb_to_dense(bccb_inverse(op)) - want).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(BccbInverse, RoundTrip) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const auto op = bccb_scale_add_identity(gram_operator(oracle::random_geometry(7, 5, 12, rng), 9, 7), 1.0, 0.5);
    const auto inv = bccb_inverse(op);
    const ComplexVector c = oracle::random_vector(63, rng);
    EXPECT_LE(relative(bccb_matvec(inv, bccb_matvec(op, c)), c), 1e-8);
  }
}

TEST(BccbInverse, NearSingularThrows) {
  ComplexMatrix omega = ComplexMatrix::Ones(3, 3);
  omega(1, 2) = 1e-14;
  try {
    bccb_inverse(BccbOperator(3, 3, omega));
    FAIL() << "expected SingularityError";
  } catch (const SingularityError& e) {
    EXPECT_NEAR(e.magnitude(), 1e-14, 1e-20);
  }
  const ArrayGeometry single(2, 2, {{0, 0}});
  EXPECT_THROW(bccb_inverse(gram_operator(single, 4, 4)), SingularityError);
}

TEST(BccbToDense, IdentityGivesIdentity) {
  EXPECT_LT((bccb_to_dense(BccbOperator::identity(4, 3)) - ComplexMatrix::Identity(12, 12)).cwiseAbs().maxCoeff(),
            1e-15);
}

TEST(BccbToDense, FirstColumnRoundTrip) {
  std::mt19937_64 rng(16);
  const ComplexVector r = oracle::random_vector(35, rng);
  const ComplexMatrix dense = bccb_to_dense(bccb_from_first_column(column_of(r, 7, 5)));
  EXPECT_LT((dense.col(0) - r).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BccbToDense, MatchesIndexArithmetic) {
  std::mt19937_64 rng(17);
  const ComplexVector r = oracle::random_vector(30, rng);
  const ComplexMatrix dense = bccb_to_dense(bccb_from_first_column(column_of(r, 6, 5)));
  EXPECT_LT((dense - oracle::bccb_from_column(r, 6, 5)).cwiseAbs().maxCoeff(), 1e-12);
  for (Index i = 0; i < 30; ++i) {
    for (Index j = 0; j < 30; ++j) {
      EXPECT_LT(std::abs(dense(i, j) - dense((i + 6) % 30, (j + 6) % 30)), 1e-12);
    }
  }
}

TEST(BccbToDense, CapIsEnforced) {
  EXPECT_THROW(bccb_to_dense(BccbOperator::identity(8, 8), 32), ResourceError);
}

TEST(BccbRoundTrip, EigenvaluesSurviveDenseReconstruction) {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    const auto op = gram_operator(oracle::random_geometry(6, 6, 14, rng), 10, 6);
    const ComplexMatrix dense = bccb_to_dense(op);
    const ComplexVector first = dense.col(0);
    const auto again = bccb_from_first_column(column_of(first, 10, 6));
    const double scale = op.eigenvalues().cwiseAbs().maxCoeff();
    EXPECT_LT((again.eigenvalues() - op.eigenvalues()).cwiseAbs().maxCoeff(), 1e-10 * scale);
    EXPECT_LT((first_column(op).r - first).cwiseAbs().maxCoeff(), 1e-10 * scale);
  }
}

TEST(IsBccb, DenseGramOfSparseGeometry) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = oracle::random_geometry(8, 6, 12, rng);
    const auto gram = dense_gram(build_subsampled_dictionary(g, make_uniform_grid(9), make_uniform_grid(7)));
    const auto check = is_bccb(gram.entries, 9, 7, 1e-10);
    EXPECT_TRUE(check.is_bccb);
    EXPECT_LE(check.max_deviation, 1e-10);
  }
}

TEST(IsBccb, PerturbedEntryFails) {
  std::mt19937_64 rng(20);
  auto gram = dense_gram(build_subsampled_dictionary(oracle::random_geometry(5, 5, 9, rng), make_uniform_grid(6),
                                                     make_uniform_grid(4)));
  gram.entries(7, 3) += 1e-3;
  const auto check = is_bccb(gram.entries, 6, 4, 1e-10);
  EXPECT_FALSE(check.is_bccb);
  EXPECT_GT(check.max_deviation, 1e-4);
}

TEST(IsBccb, IdentityPasses) {
  const auto check = is_bccb(ComplexMatrix::Identity(20, 20), 5, 4, 1e-14);
  EXPECT_TRUE(check.is_bccb);
  EXPECT_EQ(check.max_deviation, 0.0);
}

TEST(IsBccb, NonUniformGridBreaksStructure) {
  std::mt19937_64 rng(21);
  const auto g = oracle::random_geometry(6, 6, 12, rng);
  const auto grid1 = perturbed_grid_for_testing(make_uniform_grid(8), 3, 0.01);
  const auto gram = dense_gram(build_subsampled_dictionary(g, grid1, make_uniform_grid(8)));
  EXPECT_FALSE(is_bccb(gram.entries, 8, 8, 1e-10).is_bccb);
}

TEST(IsBccb, RejectsShapeMismatch) {
  EXPECT_THROW(is_bccb(ComplexMatrix::Identity(12, 12), 5, 2, 1e-10), InvalidArgument);
  EXPECT_THROW(is_bccb(ComplexMatrix::Zero(4, 5), 2, 2, 1e-10), InvalidArgument);
}

TEST(SpectralInvariants, FullUraWithMatchingGrid) {
  const auto op = gram_operator(make_ura(5, 4), 5, 4);
  EXPECT_LT((op.eigenvalues() - ComplexMatrix::Constant(5, 4, 20.0)).cwiseAbs().maxCoeff(), 1e-12);
  expect_gram_spectrum(op, 20.0);
}

TEST(SpectralInvariants, ReferenceGeometry) {
  const auto g = subsample_preserving_aperture(make_ura(51, 16), 40, 7);
  for (Index l1 : {64, 128, 256, 512}) expect_gram_spectrum(gram_operator(g, l1, 32), 40.0);
}

}  // namespace
}  // namespace harmrec
