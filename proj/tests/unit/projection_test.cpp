#include <gtest/gtest.h>

#include "cffn/errors.hpp"
#include "cffn/projection.hpp"
#include "support/oracles.hpp"

namespace cffn {
namespace {

using testing::Rng;

ProjectionParams<double> random_projection(Index d_t, Index d_v, Index c, Index d, Rng& rng) {
  ProjectionParams<double> p;
  for (std::size_t b = 0; b < 3; ++b) p.conv[b] = testing::random_affine(kConvWindows[b] * d_t, c, rng);
  p.word_fc = testing::random_affine(3 * c, d, rng);
  p.region_fc = testing::random_affine(d_v, d, rng);
  return p;
}

TEST(Projection, WindowOffsets) {
  EXPECT_EQ(window_start(1), 0);
  EXPECT_EQ(window_start(2), 0);
  EXPECT_EQ(window_start(3), -1);
}

TEST(Projection, ZeroInputZeroBiasGivesZero) {
  Rng rng(1);
  auto p = random_projection(8, 6, 3, 5, rng);
  for (auto& conv : p.conv) conv.bias.setZero();
  p.word_fc.bias.setZero();
  const auto out = project_words(MatrixD::Zero(4, 8).eval(), p).output;
  EXPECT_EQ(out, MatrixD::Zero(4, 5));
}

TEST(Projection, SingleTokenSeesOnlyPadding) {
  Rng rng(2);
  const auto p = random_projection(8, 6, 3, 5, rng);
  const MatrixD e = testing::random_matrix(1, 8, rng);
  const auto out = project_words(e, p).output;
  ASSERT_EQ(out.rows(), 1);
  EXPECT_TRUE(out.allFinite());
  const MatrixD expected = testing::oracle_project_words(e, p);
  EXPECT_LE((out - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Projection, WordsMatchSlidingWindowOracle) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const Index n = seed == 0 ? 4 : std::uniform_int_distribution<Index>(1, 9)(rng);
    const auto p = random_projection(8, 6, 3, 5, rng);
    const MatrixD e = testing::random_matrix(n, 8, rng);
    const MatrixD got = project_words(e, p).output;
    const MatrixD want = testing::oracle_project_words(e, p);
    EXPECT_LE((got - want).cwiseAbs().maxCoeff(), 1e-6) << "seed " << seed;
  }
}

TEST(Projection, RegionsMatchMatrixOracle) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed + 1000);
    const Index m = std::uniform_int_distribution<Index>(1, 9)(rng);
    const auto p = random_projection(4, 7, 3, 5, rng);
    const MatrixD e = testing::random_matrix(m, 7, rng);
    const MatrixD got = project_regions(e, p);
    const MatrixD want = testing::oracle_rows_affine(e, p.region_fc);
    EXPECT_LE((got - want).cwiseAbs().maxCoeff(), 1e-6) << "seed " << seed;
  }
}

TEST(Projection, IdentityRegionMap) {
  Rng rng(3);
  auto p = random_projection(4, 5, 3, 5, rng);
  p.region_fc.weight = MatrixD::Identity(5, 5);
  p.region_fc.bias.setZero();
  const MatrixD e = testing::random_matrix(3, 5, rng);
  EXPECT_EQ(project_regions(e, p), e);
}

TEST(Projection, ZeroWeightsBiasOnly) {
  Rng rng(4);
  auto p = random_projection(4, 5, 3, 6, rng);
  p.region_fc.weight.setZero();
  const MatrixD out = project_regions(testing::random_matrix(3, 5, rng), p);
  for (Index r = 0; r < out.rows(); ++r) EXPECT_EQ(out.row(r).transpose(), p.region_fc.bias);
}

TEST(Projection, WindowOneIsShiftEquivariant) {
  // With only the window-1 bank active, shifting tokens shifts outputs.
  Rng rng(5);
  auto p = random_projection(6, 4, 3, 5, rng);
  for (std::size_t b = 1; b < 3; ++b) {
    p.conv[b].weight.setZero();
    p.conv[b].bias.setZero();
  }
  const MatrixD e = testing::random_matrix(5, 6, rng);
  MatrixD shifted = MatrixD::Zero(5, 6);
  shifted.bottomRows(4) = e.topRows(4);
  const MatrixD a = project_words(e, p).output;
  const MatrixD b = project_words(shifted, p).output;
  EXPECT_LE((b.bottomRows(4) - a.topRows(4)).cwiseAbs().maxCoeff(), 1e-12);

  // With the wider banks restored the op sees its neighbours.
  const auto full = random_projection(6, 4, 3, 5, rng);
  const MatrixD fa = project_words(e, full).output;
  const MatrixD fb = project_words(shifted, full).output;
  EXPECT_GT((fb.bottomRows(4) - fa.topRows(4)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Projection, DimensionMismatchRaises) {
  Rng rng(6);
  const auto p = random_projection(4, 5, 3, 6, rng);
  EXPECT_THROW(project_words(testing::random_matrix(3, 5, rng), p), Error);
  EXPECT_THROW(project_regions(testing::random_matrix(3, 4, rng), p), Error);
}

TEST(Projection, BackwardMatchesFiniteDifferencesOnInputs) {
  Rng rng(7);
  const auto p = random_projection(3, 4, 2, 3, rng);
  const MatrixD e = testing::random_matrix(4, 3, rng);
  const MatrixD g = testing::random_matrix(4, 3, rng);
  auto loss = [&](const MatrixD& x) { return (project_words(x, p).output.cwiseProduct(g)).sum(); };
  auto grad = ProjectionParams<double>::zeros(3, 4, 2, 3);
  const MatrixD analytic = project_words_backward(project_words(e, p), g, p, grad);
  const double h = 1e-6;
  for (Index r = 0; r < e.rows(); ++r) {
    for (Index c = 0; c < e.cols(); ++c) {
      MatrixD plus = e, minus = e;
      plus(r, c) += h;
      minus(r, c) -= h;
      EXPECT_NEAR(analytic(r, c), (loss(plus) - loss(minus)) / (2 * h), 1e-6);
    }
  }
}

}  // namespace
}  // namespace cffn
