#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpspec/arithmetic.hpp"
#include "qpspec/mat2.hpp"
#include "qpspec/potential.hpp"

namespace qpspec {

/// Equidistributed phases x_j = {x0 + j gamma}, gamma = sqrt(3) - 1.  The
/// step is deliberately independent of the frequency so that the orbits
/// x_j + n alpha of different phases do not coincide.
std::vector<double> phase_grid(int count, double x0 = 0.0);

/// Reduces x into [0, 1).
double wrap_phase(long double x);

/// A quasi-periodic cocycle (alpha, A): the Schroedinger matrix
/// S(x) = [[E - lambda v(x), -1], [1, 0]] or an arbitrary phase-dependent
/// SL(2, R) evaluator.
class Cocycle {
 public:
  using Evaluator = std::function<Mat2(double)>;

  static Cocycle schrodinger(const PotentialSpec& v, double alpha, double energy);
  Cocycle(double alpha, Evaluator evaluator);

  double alpha() const { return alpha_; }
  Mat2 operator()(double x) const {
    if (potential_) return {energy_ - potential_->coupled(x), -1.0, 1.0, 0.0};
    return evaluator_(x);
  }

  /// The potential and energy for Schroedinger cocycles, null otherwise.
  const PotentialSpec* potential() const { return potential_.get(); }
  double energy() const { return energy_; }

 private:
  Cocycle() = default;

  double alpha_ = 0.0;
  std::shared_ptr<const PotentialSpec> potential_;
  double energy_ = 0.0;
  Evaluator evaluator_;
};

Mat2 schrodinger_step(const PotentialSpec& v, double energy, double x);

/// A_n(x) = exp(log_scale) * matrix.
struct CocycleProduct {
  Mat2 matrix;
  double log_scale = 0.0;
  std::int64_t steps = 0;
  double base_phase = 0.0;

  /// ln ||A_n(x)||.
  double log_norm() const;
  /// exp(log_scale) * matrix; overflows for large log_scale.
  Mat2 value() const { return matrix.scaled(std::exp(log_scale)); }
};

inline constexpr int kRenormalizeStride = 32;

CocycleProduct cocycle_product(const Cocycle& cocycle, double x, std::int64_t n,
                               int stride = kRenormalizeStride);
CocycleProduct cocycle_product(const PotentialSpec& v, const Frequency& freq, double energy,
                               double x, std::int64_t n);

struct LyapunovEstimate {
  double value = 0.0;
  std::int64_t n_steps = 0;
  int n_phases = 0;
  /// Standard error of the phase average.
  double stderr_value = 0.0;
};

/// Mean over phase_grid(n_phases) of ln ||A_n(x)|| / n.
LyapunovEstimate lyapunov_exponent(const Cocycle& cocycle, std::int64_t n_steps, int n_phases);
LyapunovEstimate lyapunov_exponent(const PotentialSpec& v, const Frequency& freq, double energy,
                                   std::int64_t n_steps, int n_phases);

struct GrowthCheckpoint {
  std::int64_t s = 0;
  /// ln max_x ||A_s(x)|| over the phase grid.
  double sup_log_norm = 0.0;
  /// ln max_x max_{s' <= s} ||A_{s'}(x)||.
  double running_sup = 0.0;
};

struct GrowthProfile {
  std::vector<GrowthCheckpoint> checkpoints;
  int phase_count = 0;

  /// Running sup at the first checkpoint with s >= horizon.  Throws
  /// std::out_of_range when the profile stops short of the horizon.
  double running_sup_at(std::int64_t horizon) const;
};

/// Checkpoints at `checkpoints` geometrically spaced s in [1, s_max].
GrowthProfile growth_profile(const Cocycle& cocycle, std::int64_t s_max, int phase_count,
                             int checkpoints);
/// Checkpoints at the given s values (sorted, deduplicated).
GrowthProfile growth_profile(const Cocycle& cocycle, std::vector<std::int64_t> s_values,
                             int phase_count);

struct BoundednessResult {
  bool bounded = false;
  double max_log = 0.0;
};

BoundednessResult boundedness_probe(const GrowthProfile& profile, double threshold_log);

/// A'(x) = B(x + alpha)^{-1} A(x) B(x).  Throws std::invalid_argument when
/// |det B(x) - 1| > det_tolerance on a 256-point verification grid.
Cocycle conjugate_cocycle(std::function<Mat2(double)> B, const Cocycle& A,
                          double det_tolerance = 1e-8);

nlohmann::json to_json(const LyapunovEstimate& estimate);
nlohmann::json to_json(const GrowthProfile& profile);

}  // namespace qpspec
