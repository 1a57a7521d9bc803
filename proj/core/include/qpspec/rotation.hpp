#pragma once

#include <cstdint>

#include <nlohmann/json.hpp>

#include "qpspec/cocycle.hpp"

namespace qpspec {

/// Image angle (in turns) of the direction at angle phi under A, lifted
/// continuously: A = U P with U a rotation by theta_U and P positive
/// definite, and P moves directions by less than a quarter turn, so the
/// increment is fixed to within (theta_U - 1/4, theta_U + 1/4).
double projective_step(const Mat2& A, double phi);

struct RotationEstimate {
  double rho = 0.0;
  std::int64_t n_steps = 0;
  int phase_count = 0;
  /// max - min of the per-phase estimates.
  double spread = 0.0;
};

/// Fibered rotation number in [0, 1/2]; requires n_steps >= 1000.  The lift
/// follows the polar angle of A(x) continuously in x, so the cocycle must be
/// homotopic to a constant (std::domain_error otherwise).
RotationEstimate rotation_number(const Cocycle& cocycle, std::int64_t n_steps, int phase_count);
RotationEstimate rotation_number(const PotentialSpec& v, const Frequency& freq, double energy,
                                 std::int64_t n_steps, int phase_count);

/// N = 1 - 2 rho clamped to [0, 1].
double ids_from_rotation(const RotationEstimate& rho);
double ids_from_rotation(double rho);

nlohmann::json to_json(const RotationEstimate& estimate);

}  // namespace qpspec
