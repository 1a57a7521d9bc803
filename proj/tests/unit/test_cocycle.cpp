#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qpspec/cocycle.hpp"
#include "qpspec/rotation.hpp"

namespace {

using namespace qpspec;

const double kGoldenLyapunov3 = oracle::free_lyapunov(3.0);

void expect_matrix_near(const Mat2& a, const Mat2& b, double rel) {
  const double scale = std::max({std::abs(b.a), std::abs(b.b), std::abs(b.c), std::abs(b.d), 1e-300});
  EXPECT_NEAR(a.a, b.a, rel * scale);
  EXPECT_NEAR(a.b, b.b, rel * scale);
  EXPECT_NEAR(a.c, b.c, rel * scale);
  EXPECT_NEAR(a.d, b.d, rel * scale);
}

TEST(Cocycle, SchrodingerStep) {
  EXPECT_EQ(schrodinger_step(make_amo(0.0), 0.0, 0.3), (Mat2{0, -1, 1, 0}));
  EXPECT_EQ(schrodinger_step(make_amo(1.0), 0.0, 0.0), (Mat2{-2, -1, 1, 0}));
  EXPECT_EQ(schrodinger_step(make_amo(0.0), 3.0, 0.7), (Mat2{3, -1, 1, 0}));
}

TEST(Cocycle, FreeProducts) {
  const auto golden = presets::golden();
  const auto p = cocycle_product(make_amo(0.0), golden, 0.0, 0.1, 4);
  expect_matrix_near(p.value(), Mat2::identity(), 1e-14);
  const auto h = cocycle_product(make_amo(0.0), golden, 3.0, 0.1, 20);
  EXPECT_NEAR(h.log_norm(), 20 * kGoldenLyapunov3, 1.0);
}

TEST(Cocycle, ProductMatchesPlainMultiplication) {
  const double alpha = presets::golden().alpha();
  const oracle::Coeffs amo{{-1, 1.0}, {1, 1.0}};
  for (double E : {-1.3, 0.2, 2.7}) {
    const auto c = Cocycle::schrodinger(make_amo(0.8), alpha, E);
    for (int n : {1, 7, 31, 32, 33, 90}) {
      const auto p = cocycle_product(c, 0.37, n);
      expect_matrix_near(p.value(), oracle::plain_product(amo, 0.8, alpha, E, 0.37, n), 1e-10);
    }
  }
}

// A_{n1+n2}(x) = A_{n1}(x + n2 alpha) A_{n2}(x), with renormalization in play.
TEST(Cocycle, ProductIdentity) {
  const auto freq = presets::golden();
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const double lambda = std::uniform_real_distribution<double>(0, 3)(rng);
    const double E = std::uniform_real_distribution<double>(-4, 4)(rng);
    const double x = std::uniform_real_distribution<double>(0, 1)(rng);
    const int n1 = std::uniform_int_distribution<int>(1, 400)(rng);
    const int n2 = std::uniform_int_distribution<int>(1, 400)(rng);
    const auto c = Cocycle::schrodinger(make_amo(lambda), freq.alpha(), E);
    const auto whole = cocycle_product(c, x, n1 + n2);
    const auto first = cocycle_product(c, x, n2);
    const auto second = cocycle_product(c, wrap_phase(x + static_cast<long double>(n2) * freq.alpha()), n1);
    const Mat2 joined = second.matrix * first.matrix;
    const double shift = second.log_scale + first.log_scale - whole.log_scale;
    expect_matrix_near(joined.scaled(std::exp(shift)), whole.matrix, 1e-8);
  }
}

TEST(Cocycle, DeterminantPreserved) {
  const auto freq = presets::golden();
  for (double E : {-2.5, 0.0, 1.1}) {
    for (std::int64_t n : {10, 1000, 100000}) {
      const auto p = cocycle_product(Cocycle::schrodinger(make_amo(0.9), freq.alpha(), E), 0.2, n);
      // det(A_n) = 1, so det(matrix) = exp(-2 log_scale), relative to |matrix|^2.
      const double scale = p.matrix.norm() * p.matrix.norm();
      EXPECT_LE(std::abs(p.matrix.det() - std::exp(-2 * p.log_scale)), 1e-8 * scale) << "E=" << E << " n=" << n;
    }
  }
}

TEST(Lyapunov, FreeCases) {
  const auto golden = presets::golden();
  EXPECT_LE(lyapunov_exponent(make_amo(0.0), golden, 0.0, 100000, 4).value, 1e-3);
  EXPECT_NEAR(lyapunov_exponent(make_amo(0.0), golden, 3.0, 100000, 4).value, kGoldenLyapunov3, 1e-3);
}

TEST(Lyapunov, SupercriticalHermanBound) {
  // Herman: L >= ln lambda for the almost Mathieu operator, with equality on
  // the spectrum; off the spectrum the exponent is larger.
  const auto v = make_amo(2.5);
  const auto est = lyapunov_exponent(v, presets::golden(), 0.0, 200000, 4);
  EXPECT_GE(est.value, std::log(2.5) - 5e-3);
}

TEST(Growth, FreeProfiles) {
  const auto alpha = presets::golden().alpha();
  const auto elliptic = growth_profile(Cocycle::schrodinger(make_amo(0.0), alpha, 0.0), 10000, 4, 12);
  for (const auto& c : elliptic.checkpoints) EXPECT_LE(c.sup_log_norm, std::log(2.0) + 1e-6);
  EXPECT_TRUE(boundedness_probe(elliptic, std::log(10.0)).bounded);

  const auto hyper = growth_profile(Cocycle::schrodinger(make_amo(0.0), alpha, 3.0), 100, 4, 8);
  for (const auto& c : hyper.checkpoints) {
    EXPECT_NEAR(c.sup_log_norm, kGoldenLyapunov3 * c.s, 1.0) << "s=" << c.s;
  }
  EXPECT_FALSE(boundedness_probe(hyper, std::log(10.0)).bounded);
}

TEST(Growth, OffSpectrumIsUnbounded) {
  const auto freq = presets::golden();
  const auto c = Cocycle::schrodinger(make_amo(0.5), freq.alpha(), 5.0);
  const auto profile = growth_profile(c, 1000, 8, 10);
  EXPECT_FALSE(boundedness_probe(profile, std::log(1000.0)).bounded);
  // Oracle: a single plain product already exceeds the threshold after 100
  // steps (1000 would overflow a double).
  const auto plain = oracle::plain_product({{-1, 1.0}, {1, 1.0}}, 0.5, freq.alpha(), 5.0, 0.0, 100);
  EXPECT_GT(std::log(plain.norm()), std::log(1000.0));
}

TEST(Growth, ExplicitCheckpointsAndHorizon) {
  const auto c = Cocycle::schrodinger(make_amo(0.0), 0.3819660112501051, 0.0);
  const auto profile = growth_profile(c, std::vector<std::int64_t>{50, 10, 10, 20}, 2);
  ASSERT_EQ(profile.checkpoints.size(), 3u);
  EXPECT_EQ(profile.checkpoints[0].s, 10);
  EXPECT_EQ(profile.checkpoints[2].s, 50);
  EXPECT_NO_THROW(profile.running_sup_at(15));
  EXPECT_THROW(profile.running_sup_at(51), std::out_of_range);
}

TEST(Conjugacy, IdentityIsNoOp) {
  const auto A = Cocycle::schrodinger(make_amo(0.7), presets::golden().alpha(), 0.4);
  const auto B = conjugate_cocycle([](double) { return Mat2::identity(); }, A);
  for (double x : {0.0, 0.3, 0.77}) EXPECT_EQ(B(x), A(x));
}

TEST(Conjugacy, RejectsNonUnimodular) {
  const auto A = Cocycle::schrodinger(make_amo(0.7), presets::golden().alpha(), 0.4);
  EXPECT_THROW(conjugate_cocycle([](double) { return Mat2{2, 0, 0, 1}; }, A), std::invalid_argument);
}

TEST(Conjugacy, ConstantRotationOfConstantCocycle) {
  const double alpha = presets::golden().alpha();
  const Mat2 M{3, -1, 1, 0};
  const Cocycle A(alpha, [M](double) { return M; });
  const Mat2 R = Mat2::rotation(0.1);
  const auto B = conjugate_cocycle([R](double) { return R; }, A);
  const Mat2 expected = R.inverse() * M * R;
  const Mat2 got = B(0.5);
  EXPECT_NEAR(got.a, expected.a, 1e-12);
  EXPECT_NEAR(got.b, expected.b, 1e-12);
  EXPECT_NEAR(got.c, expected.c, 1e-12);
  EXPECT_NEAR(got.d, expected.d, 1e-12);
  EXPECT_NEAR(lyapunov_exponent(B, 20000, 2).value, lyapunov_exponent(A, 20000, 2).value, 2e-3);
}

TEST(Conjugacy, HomotopicToIdentityPreservesInvariants) {
  const double alpha = presets::golden().alpha();
  auto B = [](double x) { return Mat2::rotation(0.1 * std::sin(2 * std::numbers::pi * x)); };
  for (double E : {-1.0, 0.5, 2.2}) {
    const auto A = Cocycle::schrodinger(make_amo(0.5), alpha, E);
    const auto C = conjugate_cocycle(B, A);
    EXPECT_NEAR(lyapunov_exponent(C, 100000, 4).value, lyapunov_exponent(A, 100000, 4).value, 2e-3);
    EXPECT_NEAR(rotation_number(C, 100000, 4).rho, rotation_number(A, 100000, 4).rho, 2e-3);
  }
}

TEST(PhaseGrid, Equidistributed) {
  const auto g = phase_grid(1000);
  ASSERT_EQ(g.size(), 1000u);
  for (double x : g) {
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
  // Discrepancy of a Kronecker sequence: every quarter gets about 250 points.
  for (int q = 0; q < 4; ++q) {
    const auto n = std::count_if(g.begin(), g.end(), [q](double x) { return x >= q * 0.25 && x < (q + 1) * 0.25; });
    EXPECT_NEAR(n, 250, 10);
  }
}

}  // namespace
