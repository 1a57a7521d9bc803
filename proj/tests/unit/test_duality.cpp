#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qpspec/duality.hpp"

namespace {

using namespace qpspec;

TEST(DualOperator, AlmostMathieuStructure) {
  const auto golden = presets::golden();
  const auto op = dual_operator(make_amo(0.5), golden, 0.2, 9);
  EXPECT_EQ(op.band_width(), 1);
  EXPECT_EQ(op.first_site, -4);
  for (int i = 0; i < 9; ++i) {
    const double n = static_cast<double>(op.first_site + i);
    EXPECT_NEAR(op.diagonal[i], 2 * std::cos(2 * std::numbers::pi * (0.2 + n * golden.alpha())), 1e-12);
  }
  for (const auto& z : op.bands[0]) EXPECT_EQ(z, std::complex<double>(0.5));
  const auto free = dual_operator(make_amo(0.0), golden, 0.2, 9);
  for (const auto& z : free.bands[0]) EXPECT_EQ(z, std::complex<double>(0.0));
}

TEST(DualOperator, MatchesDenseDefinitionForWiderBands) {
  const oracle::Coeffs c{{-2, {0.3, 0.2}}, {2, {0.3, -0.2}}, {-1, 1.0}, {1, 1.0}};
  const PotentialSpec v(0.7, c);
  const auto freq = presets::silver();
  const auto op = dual_operator(v, freq, 0.4, 31);
  EXPECT_EQ(op.band_width(), 2);
  const auto dense = oracle::dual_matrix(c, 0.7, freq.alpha(), 0.4, 31, op.first_site);
  for (int i = 0; i < 31; ++i) {
    for (int j = 0; j < 31; ++j) EXPECT_NEAR(std::abs(op.entry(i, j) - dense[i][j]), 0.0, 1e-12);
  }
  const auto ref = oracle::hermitian_eigenvalues(dense);
  const auto ev = eigenvalues(op);
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(ev[i], ref[i], 1e-9);
}

TEST(DualOperator, SelfDualityOfAlmostMathieu) {
  // Hd(lambda) = lambda H(1 / lambda) on the same sites.
  const auto golden = presets::golden();
  const double lambda = 0.5;
  const auto dual = dual_operator(make_amo(lambda), golden, 0.3, 101);
  const auto direct = truncate(make_amo(1 / lambda), golden, 0.3, 101, dual.first_site);
  const auto a = eigenvalues(dual), b = eigenvalues(direct);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], lambda * b[i], 1e-10);
}

TEST(DualCompare, HausdorffSmall) {
  const auto golden = presets::golden();
  EXPECT_LE(dual_spectrum_compare(make_amo(0.0), golden, 1000, 16).hausdorff, 0.05);
  EXPECT_LE(dual_spectrum_compare(make_amo(0.5), golden, 1000, 16).hausdorff, 0.05);
}

TEST(DualSolution, FreeCaseIsDelta) {
  const double theta0 = 0.1;
  const double E = 2 * std::cos(2 * std::numbers::pi * theta0);
  const auto s = dual_bounded_solution(make_amo(0.0), presets::golden(), E, 101);
  EXPECT_NEAR(s.at(0), 1.0, 1e-12);
  EXPECT_LE(s.max_abs, 1.0 + 1e-9);
  EXPECT_LE(s.residual, 1e-9);
  for (std::int64_t n = -50; n <= 50; ++n) {
    if (n != 0) EXPECT_NEAR(s.at(n), 0.0, 1e-9);
  }
  EXPECT_LE(std::min(torus_distance(s.theta_star - theta0), torus_distance(s.theta_star + theta0)), 1e-8);
}

TEST(DualSolution, AlmostMathieuSpectralSample) {
  const auto golden = presets::golden();
  const auto v = make_amo(0.5);
  const double E = spectral_samples(v, golden, 2000, 1, 9).front();
  const auto s = dual_bounded_solution(v, golden, E, 801);
  EXPECT_NEAR(s.at(0), 1.0, 1e-12);
  EXPECT_LE(s.max_abs, 1.1);
  EXPECT_LE(s.residual, 1e-6);
  // Independent residual from the dense definition.
  const auto op = dual_operator(v, golden, s.theta_star, 801);
  double worst = 0;
  for (int i = 0; i < 801; ++i) {
    double r = (op.diagonal[i] - E) * s.coefficients[i];
    if (i > 0) r += 0.5 * s.coefficients[i - 1];
    if (i + 1 < 801) r += 0.5 * s.coefficients[i + 1];
    worst = std::max(worst, std::abs(r));
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(DualSolution, OffSpectrumRejected) {
  EXPECT_THROW(dual_bounded_solution(make_amo(0.5), presets::golden(), 5.0, 201), std::domain_error);
}

}  // namespace
