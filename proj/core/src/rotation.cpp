#include "qpspec/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "qpspec/parallel.hpp"

namespace qpspec {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// x reduced into (-1/2, 1/2].
double reduce_half(double x) { return x - std::ceil(x - 0.5); }

double polar_angle(const Mat2& A) { return std::atan2(A.c - A.b, A.a + A.d) / kTwoPi; }

// Lift increment for the step taking direction w to A w.
double lift_increment(const Mat2& A, double w0, double w1, double v0, double v1) {
  const double turn = std::atan2(w0 * v1 - w1 * v0, w0 * v0 + w1 * v1) / kTwoPi;
  const double theta_u = polar_angle(A);
  return theta_u + reduce_half(turn - theta_u);
}

// Polar angle of A(x) unwrapped along a fine grid of x.  Fixes the lift by
// continuity in x, so that per-step branches agree across the whole orbit.
constexpr int kReferencePoints = 4096;

std::vector<double> polar_reference(const Cocycle& cocycle) {
  std::vector<double> ref(kReferencePoints + 1);
  ref[0] = polar_angle(cocycle(0.0));
  for (int i = 1; i <= kReferencePoints; ++i) {
    const double raw = polar_angle(cocycle(static_cast<double>(i) / kReferencePoints));
    ref[i] = raw + std::round(ref[i - 1] - raw);
  }
  if (std::abs(ref[kReferencePoints] - ref[0]) > 0.5) {
    throw std::domain_error("rotation_number: cocycle is not homotopic to a constant");
  }
  ref.pop_back();
  return ref;
}

}  // namespace

double projective_step(const Mat2& A, double phi) {
  const double w0 = std::cos(kTwoPi * phi), w1 = std::sin(kTwoPi * phi);
  const double v0 = A.a * w0 + A.b * w1, v1 = A.c * w0 + A.d * w1;
  if (v0 == 0.0 && v1 == 0.0) throw std::logic_error("projective_step: zero image vector");
  return phi + lift_increment(A, w0, w1, v0, v1);
}

RotationEstimate rotation_number(const Cocycle& cocycle, std::int64_t n_steps, int phase_count) {
  if (n_steps < 1000) throw std::invalid_argument("rotation_number: n_steps must be >= 1000");
  if (phase_count < 1) throw std::invalid_argument("rotation_number: phase_count must be >= 1");
  const auto phases = phase_grid(phase_count);
  const long double alpha = cocycle.alpha();
  std::vector<double> rates(phase_count);
  const auto reference = polar_reference(cocycle);

  parallel_for(phase_count, [&](std::size_t j) {
    long double x = phases[j];
    long double total = 0.0L;
    double w0 = 1.0, w1 = 0.0;
    for (std::int64_t s = 0; s < n_steps; ++s) {
      const Mat2 A = cocycle(static_cast<double>(x));
      double v0 = A.a * w0 + A.b * w1, v1 = A.c * w0 + A.d * w1;
      const double turn = std::atan2(w0 * v1 - w1 * v0, w0 * v0 + w1 * v1) / kTwoPi;
      const double raw = polar_angle(A);
      const auto cell = static_cast<std::size_t>(x * kReferencePoints) % kReferencePoints;
      const double theta_u = raw + std::round(reference[cell] - raw);
      total += theta_u + reduce_half(turn - theta_u);
      const double n = std::hypot(v0, v1);
      w0 = v0 / n;
      w1 = v1 / n;
      x += alpha;
      if (x >= 1.0L) x -= 1.0L;
    }
    rates[j] = static_cast<double>(total / static_cast<long double>(n_steps));
  });

  RotationEstimate out;
  out.n_steps = n_steps;
  out.phase_count = phase_count;
  double mean = 0.0;
  for (double r : rates) mean += r;
  mean /= phase_count;
  // Directions turn at rate rho mod 1; fold into [0, 1/2].
  double folded = mean - std::floor(mean + 0.25);
  out.rho = std::clamp(folded, 0.0, 0.5);
  const auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
  out.spread = *hi - *lo;
  return out;
}

RotationEstimate rotation_number(const PotentialSpec& v, const Frequency& freq, double energy,
                                 std::int64_t n_steps, int phase_count) {
  return rotation_number(Cocycle::schrodinger(v, freq.alpha(), energy), n_steps, phase_count);
}

double ids_from_rotation(double rho) { return std::clamp(1.0 - 2.0 * rho, 0.0, 1.0); }

double ids_from_rotation(const RotationEstimate& rho) { return ids_from_rotation(rho.rho); }

nlohmann::json to_json(const RotationEstimate& estimate) {
  return {{"rho", estimate.rho},
          {"n_steps", estimate.n_steps},
          {"phase_count", estimate.phase_count},
          {"spread", estimate.spread}};
}

}  // namespace qpspec
