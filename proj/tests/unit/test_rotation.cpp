#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qpspec/rotation.hpp"

namespace {

using namespace qpspec;

TEST(ProjectiveStep, Basics) {
  EXPECT_NEAR(projective_step(Mat2::identity(), 0.3), 0.3, 1e-15);
  EXPECT_NEAR(projective_step(Mat2{0, -1, 1, 0}, 0.0), 0.25, 1e-15);
}

TEST(ProjectiveStep, DiagonalClosedForm) {
  // diag(2, 1/2) maps the direction at angle 2 pi phi to angle
  // atan(tan(2 pi phi) / 4).
  for (double phi : {0.125, 0.05, 0.2, -0.1}) {
    const double expected = std::atan(std::tan(2 * std::numbers::pi * phi) / 4.0) / (2 * std::numbers::pi);
    EXPECT_NEAR(projective_step(Mat2{2, 0, 0, 0.5}, phi), expected, 1e-14) << phi;
  }
}

TEST(ProjectiveStep, LiftIsContinuousAcrossManyTurns) {
  // A rotation by 0.3 turns advances the lift by exactly 0.3 every step.
  const Mat2 R = Mat2::rotation(0.3);
  double phi = 0.0;
  for (int i = 0; i < 100; ++i) phi = projective_step(R, phi);
  EXPECT_NEAR(phi, 30.0, 1e-9);
}

TEST(Rotation, FreeClosedForm) {
  const auto golden = presets::golden();
  EXPECT_NEAR(rotation_number(make_amo(0.0), golden, 0.0, 100000, 2).rho, 0.25, 1e-3);
  EXPECT_NEAR(rotation_number(make_amo(0.0), golden, std::sqrt(2.0), 100000, 2).rho, 0.125, 1e-3);
  EXPECT_NEAR(rotation_number(make_amo(0.0), golden, 2.5, 100000, 2).rho, 0.0, 1e-3);
  for (double E = -1.9; E <= 1.9; E += 0.2) {
    EXPECT_NEAR(rotation_number(make_amo(0.0), golden, E, 100000, 2).rho, oracle::free_rotation(E), 1e-3) << E;
  }
}

TEST(Rotation, MonotoneInEnergy) {
  const auto golden = presets::golden();
  double last = 0.5;
  for (double E = -3.0; E <= 3.0; E += 0.25) {
    const double rho = rotation_number(make_amo(0.5), golden, E, 20000, 2).rho;
    EXPECT_LE(rho, last + 1e-3);
    last = rho;
  }
}

TEST(Rotation, RequiresLongRuns) {
  EXPECT_THROW(rotation_number(make_amo(0.5), presets::golden(), 0.0, 10, 2), std::invalid_argument);
}

TEST(Rotation, IdsRelation) {
  EXPECT_DOUBLE_EQ(ids_from_rotation(0.25), 0.5);
  EXPECT_DOUBLE_EQ(ids_from_rotation(0.5), 0.0);
  EXPECT_DOUBLE_EQ(ids_from_rotation(0.0), 1.0);
}

}  // namespace
