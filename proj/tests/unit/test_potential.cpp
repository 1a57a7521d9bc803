#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qpspec/potential.hpp"

namespace {

using namespace qpspec;

TEST(Potential, AlmostMathieu) {
  EXPECT_DOUBLE_EQ(make_amo(0.5).coupled(0.0), 1.0);
  EXPECT_NEAR(make_amo(1.0).coupled(0.25), 0.0, 1e-15);
  const auto v = make_amo(1.0);
  EXPECT_EQ(v.coeff(1), std::complex<double>(1.0));
  EXPECT_EQ(v.coeff(-1), std::complex<double>(1.0));
  EXPECT_EQ(v.coeff(0), std::complex<double>(0.0));
  EXPECT_EQ(v.coeff(2), std::complex<double>(0.0));
  EXPECT_EQ(v.degree(), 1);
  EXPECT_NEAR(eval_potential(v, 1.0 / 3.0), -1.0, 1e-14);
}

TEST(Potential, TrivialCases) {
  const PotentialSpec zero(1.0, {});
  EXPECT_EQ(eval_potential(zero, 0.37), 0.0);
  EXPECT_EQ(strip_norm(zero, 2.0), 0.0);
  const PotentialSpec constant(1.0, {{0, 3.0}});
  EXPECT_DOUBLE_EQ(eval_potential(constant, 0.91), 3.0);
}

TEST(Potential, StripNorm) {
  EXPECT_DOUBLE_EQ(strip_norm(make_amo(1.0), 0.0), 2.0);
  EXPECT_NEAR(strip_norm(make_amo(1.0), 1.0), 2.0 * std::exp(2.0 * std::numbers::pi), 1e-9);
  EXPECT_THROW(strip_norm(make_amo(1.0), -1.0), std::invalid_argument);
}

TEST(Potential, RejectsNonRealCoefficients) {
  EXPECT_THROW(PotentialSpec(1.0, {{1, {1.0, 0.5}}, {-1, {1.0, 0.5}}}), std::invalid_argument);
  EXPECT_THROW(PotentialSpec(1.0, {{0, {1.0, 0.1}}}), std::invalid_argument);
  EXPECT_NO_THROW(PotentialSpec(1.0, {{2, {0.3, 0.4}}, {-2, {0.3, -0.4}}}));
}

TEST(Potential, FastFormMatchesFourierSum) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    oracle::Coeffs c{{0, u(rng)}};
    for (int k = 1; k <= 4; ++k) {
      const std::complex<double> z(u(rng), u(rng));
      c[k] = z;
      c[-k] = std::conj(z);
    }
    const PotentialSpec v(0.7, c);
    for (int i = 0; i < 50; ++i) {
      const double x = u(rng) * 3.0;
      EXPECT_NEAR(v(x), oracle::trig_poly(c, x), 1e-12);
      EXPECT_NEAR(eval_potential(v, x), oracle::trig_poly(c, x), 1e-12);
      EXPECT_NEAR(v.coupled(x), 0.7 * v(x), 1e-15);
    }
  }
}

TEST(Potential, JsonRoundTrip) {
  const PotentialSpec v(0.3, {{-2, {0.1, -0.2}}, {2, {0.1, 0.2}}, {0, 0.5}}, 0.4);
  const auto w = potential_from_json(to_json(v));
  EXPECT_EQ(to_json(w), to_json(v));
  EXPECT_EQ(w.degree(), 2);
  auto j = to_json(v);
  j["coeffs"].push_back({{"k", 0}, {"re", 1.0}});
  EXPECT_THROW(potential_from_json(j), std::invalid_argument);
}

}  // namespace
