#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qpspec/spectrum.hpp"

namespace {

using namespace qpspec;

const oracle::Coeffs kAmo{{-1, 1.0}, {1, 1.0}};

TEST(Truncate, SmallSections) {
  const auto free3 = truncate(make_amo(0.0), presets::golden(), 0.0, 3);
  const auto ev = eigenvalues(free3);
  ASSERT_EQ(ev.size(), 3u);
  EXPECT_NEAR(ev[0], -std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(ev[1], 0.0, 1e-14);
  EXPECT_NEAR(ev[2], std::sqrt(2.0), 1e-14);
  EXPECT_EQ(eig_count_below(free3, 0.5), 2);

  const double alpha = presets::golden().alpha();
  const auto two = truncate(make_amo(1.0), alpha, 0.0, 2);
  EXPECT_DOUBLE_EQ(two.diagonal[0], 2.0);
  EXPECT_NEAR(two.diagonal[1], 2.0 * std::cos(2 * std::numbers::pi * alpha), 1e-14);
  EXPECT_EQ(two.entry(0, 1), std::complex<double>(1.0));
}

TEST(Truncate, GershgorinBoundsSpectrum) {
  const PotentialSpec v(0.8, {{-2, {0.2, 0.1}}, {2, {0.2, -0.1}}, {-1, 1.0}, {1, 1.0}});
  const auto op = truncate(v, presets::golden(), 0.3, 1000);
  const double bound = op.gershgorin_bound();
  for (int i = 0; i < op.size(); ++i) {
    double row = 0;
    for (int j = std::max(0, i - 1); j <= std::min(op.size() - 1, i + 1); ++j) row += std::abs(op.entry(i, j));
    EXPECT_LE(row, bound + 1e-12);
  }
  EXPECT_EQ(eig_count_below(op, -bound - 1e-9), 0);
  EXPECT_EQ(eig_count_below(op, bound + 1e-9), 1000);
}

TEST(Counts, MatchDenseEigensolve) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 1);
  const auto freq = presets::golden();
  for (int trial = 0; trial < 5; ++trial) {
    const double lambda = 3 * u(rng), theta = u(rng);
    const auto op = truncate(make_amo(lambda), freq, theta, 200, -50);
    const auto ref = oracle::jacobi_eigenvalues(oracle::schrodinger_matrix(kAmo, lambda, freq.alpha(), theta, 200, -50));
    const auto ev = eigenvalues(op);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(ev[i], ref[i], 1e-10);
    for (int k = 0; k < 40; ++k) {
      const double E = -2 - 2 * lambda + (4 + 4 * lambda) * u(rng);
      const auto expected = std::lower_bound(ref.begin(), ref.end(), E) - ref.begin();
      EXPECT_EQ(eig_count_below(op, E), expected) << "E=" << E;
    }
    const double E = 0.3;
    double nearest = 1e9;
    for (double e : ref) nearest = std::min(nearest, std::abs(e - E));
    EXPECT_NEAR(nearest_eigenvalue_distance(op, E), nearest, 1e-9);
  }
}

TEST(Counts, WideBandComplexPotential) {
  // Degree 3 with complex coefficients: a Hermitian 7-band operator.
  const oracle::Coeffs c{{-3, {0.1, -0.3}}, {3, {0.1, 0.3}}, {-1, 1.0}, {1, 1.0}, {0, 0.2}};
  const PotentialSpec v(0.9, c);
  const auto freq = presets::silver();
  // The direct operator is tridiagonal; the dual one carries the bands.
  const auto dual = oracle::dual_matrix(c, 0.9, freq.alpha(), 0.21, 40, -20);
  TruncatedOperator op;
  op.first_site = -20;
  op.diagonal.resize(40);
  op.bands.assign(3, {});
  for (int i = 0; i < 40; ++i) op.diagonal[i] = dual[i][i].real();
  for (int k = 1; k <= 3; ++k) {
    for (int i = 0; i + k < 40; ++i) op.bands[k - 1].push_back(dual[i][i + k]);
  }
  const auto ref = oracle::hermitian_eigenvalues(dual);
  const auto ev = eigenvalues(op);
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(ev[i], ref[i], 1e-9);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 60; ++k) {
    const double E = std::uniform_real_distribution<double>(-4, 4)(rng);
    EXPECT_EQ(eig_count_below(op, E), std::lower_bound(ref.begin(), ref.end(), E) - ref.begin());
  }
  (void)v;
}

TEST(Ids, FreeClosedForm) {
  const auto curve = ids(make_amo(0.0), presets::golden(), linear_grid(-1.9, 1.9, 77), 2000, 64);
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    EXPECT_NEAR(curve.values[i], oracle::free_ids(curve.grid[i]), 2e-3) << curve.grid[i];
  }
  EXPECT_NEAR(ids_at(curve, 0.0), 0.5, 2e-3);
}

TEST(Ids, MonotoneAndBounded) {
  const auto curve = ids(make_amo(1.3), presets::golden(), linear_grid(-5, 5, 400), 500, 8);
  EXPECT_EQ(curve.values.front(), 0.0);
  EXPECT_EQ(curve.values.back(), 1.0);
  for (std::size_t i = 1; i < curve.values.size(); ++i) EXPECT_LE(curve.values[i - 1], curve.values[i]);
}

TEST(Indicator, FreeCases) {
  const auto golden = presets::golden();
  EXPECT_TRUE(spectrum_indicator(make_amo(0.0), golden, 0.0, 1000, 4).in_spectrum);
  const auto out = spectrum_indicator(make_amo(0.0), golden, 2.5, 1000, 4);
  EXPECT_FALSE(out.in_spectrum);
  EXPECT_GE(out.distance, 0.5 - 1e-3);
}

TEST(Indicator, PlateauMidpointIsAGap) {
  // Locate the widest flat stretch of N inside the spectrum's convex hull.
  const auto golden = presets::golden();
  const auto v = make_amo(0.5);
  const auto curve = ids(v, golden, linear_grid(-2.8, 2.8, 561), 2000, 16);
  double best_len = 0, best_mid = 0;
  std::size_t start = 0;
  for (std::size_t i = 1; i < curve.values.size(); ++i) {
    if (curve.values[i] != curve.values[start]) {
      const double len = curve.grid[i - 1] - curve.grid[start];
      if (curve.values[start] > 0 && curve.values[start] < 1 && len > best_len) {
        best_len = len;
        best_mid = 0.5 * (curve.grid[i - 1] + curve.grid[start]);
      }
      start = i;
    }
  }
  ASSERT_GT(best_len, 0.1);
  EXPECT_FALSE(spectrum_indicator(v, golden, best_mid, 2000, 8).in_spectrum) << best_mid;
  EXPECT_FALSE(spectrum_mask(v, golden, {best_mid}, 2000, 8, -1)[0]);
}

TEST(Hausdorff, MatchesBruteForce) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(1 + trial), b(3 + trial / 2);
    for (auto& x : a) x = u(rng);
    for (auto& x : b) x = u(rng);
    auto directed = [](const auto& x, const auto& y) {
      double worst = 0;
      for (double p : x) {
        double best = 1e300;
        for (double q : y) best = std::min(best, std::abs(p - q));
        worst = std::max(worst, best);
      }
      return worst;
    };
    EXPECT_DOUBLE_EQ(hausdorff_distance(a, b), std::max(directed(a, b), directed(b, a)));
  }
}

TEST(Samples, DeterministicAndSpectral) {
  const auto golden = presets::golden();
  const auto v = make_amo(0.5);
  const auto a = spectral_samples(v, golden, 1000, 10, 42);
  const auto b = spectral_samples(v, golden, 1000, 10, 42);
  const auto c = spectral_samples(v, golden, 1000, 10, 43);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  for (double E : a) EXPECT_TRUE(spectrum_indicator(v, golden, E, 1000, 8).in_spectrum) << E;
}

TEST(Measure, FreeNormalizationAndSymmetry) {
  const auto golden = presets::golden();
  const auto partition = linear_grid(-3, 3, 61);
  for (auto method : {MeasureMethod::EigenWeights, MeasureMethod::Herglotz}) {
    const auto m = spectral_measure(make_amo(0.0), golden, 0.0, partition, 2000, method);
    double total0 = 0, total1 = 0, left0 = 0;
    for (std::size_t i = 0; i < m.masses.size(); ++i) {
      total0 += m.masses_zero[i];
      total1 += m.masses_minus_one[i];
      if (m.partition[i + 1] <= 1e-12) left0 += m.masses_zero[i];
    }
    EXPECT_NEAR(total0, 1.0, 2e-2) << to_string(method);
    EXPECT_NEAR(total1, 1.0, 2e-2) << to_string(method);
    EXPECT_NEAR(m.total, 2.0, 4e-2) << to_string(method);
    EXPECT_NEAR(left0, 0.5, 2e-2) << to_string(method);
  }
}

TEST(Measure, EigenWeightsAgreeWithHerglotz) {
  const auto golden = presets::golden();
  const auto partition = linear_grid(-3, 3, 25);
  const auto v = make_amo(0.5);
  const auto a = spectral_measure(v, golden, 0.137, partition, 2000, MeasureMethod::EigenWeights);
  const auto b = spectral_measure(v, golden, 0.137, partition, 2000, MeasureMethod::Herglotz);
  for (std::size_t i = 0; i < a.masses.size(); ++i) EXPECT_NEAR(a.masses[i], b.masses[i], 5e-2) << i;
}

TEST(Measure, PartitionMustCoverSpectrum) {
  EXPECT_THROW(spectral_measure(make_amo(0.5), presets::golden(), 0.0, linear_grid(-1, 1, 5), 200,
                                MeasureMethod::EigenWeights),
               std::invalid_argument);
}

TEST(MeasureBound, FreeCases) {
  const auto golden = presets::golden();
  const auto v = make_amo(0.0);
  const auto m = spectral_measure(v, golden, 0.0, linear_grid(-4, 4, 81), 2000, MeasureMethod::EigenWeights);
  const auto rotation = growth_profile(Cocycle::schrodinger(v, golden.alpha(), 0.0), 10, 8, 10);
  // mu = 2 dN for the free Laplacian and the E = 0 cocycle is orthogonal.
  const double expected = 2 * (oracle::free_ids(0.1) - oracle::free_ids(-0.1)) / 0.1;
  const double ratio = measure_bound_check(m, rotation, 0.0, 0.1);
  EXPECT_LE(ratio, 10.0);
  EXPECT_NEAR(ratio, expected, 0.05 * expected);

  const auto hyper = growth_profile(Cocycle::schrodinger(v, golden.alpha(), 3.0), 10, 8, 10);
  EXPECT_NEAR(measure_bound_check(m, hyper, 3.0, 0.1), 0.0, 1e-12);
}

TEST(Holder, FreeCase) {
  const auto grid = linear_grid(-2.3, 2.3, 2301);
  const auto curve = ids(make_amo(0.0), presets::golden(), grid, 4000, 32);
  std::vector<bool> spectral(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) spectral[i] = std::abs(grid[i]) < 2.0;
  const auto rows = holder_scan(curve, {0.1, 0.01}, spectral);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_GE(rows[1].upper, 0.2);
  EXPECT_LE(rows[1].upper, 2.0);
  EXPECT_NEAR(std::abs(rows[1].upper_at), 2.0, 0.05);
  // Interior: dN ~ 2 eps / (pi sqrt(4 - E^2)) >= eps / pi, far above eps^2.
  EXPECT_GE(rows[1].lower, 1.0 / (std::numbers::pi * 0.01) * 0.9);
  EXPECT_THROW(holder_scan(curve, {0.001}, spectral), std::invalid_argument);
}

}  // namespace
