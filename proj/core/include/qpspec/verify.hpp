#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpspec/arithmetic.hpp"
#include "qpspec/duality.hpp"
#include "qpspec/potential.hpp"
#include "qpspec/spectrum.hpp"

namespace qpspec {

enum class Verdict { Pass, Fail, Informational };

std::string to_string(Verdict verdict);

struct ExperimentReport {
  std::string name;
  nlohmann::json config;
  std::vector<std::pair<std::string, double>> measurements;
  Verdict verdict = Verdict::Informational;
  double runtime_seconds = 0.0;
  std::vector<std::string> notes;

  void add(std::string label, double value) { measurements.emplace_back(std::move(label), value); }
  /// First measurement with the given label; throws std::out_of_range.
  double get(const std::string& label) const;
};

/// runtime_seconds is emitted only when requested so that reruns with the
/// same configuration serialize identically.
nlohmann::json to_json(const ExperimentReport& report, bool include_runtime = false);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

struct LyapunovCheckOptions {
  int samples = 20;
  std::int64_t n_steps = 1000000;
  int n_phases = 4;
  int L = 2000;
  std::uint64_t seed = 1;
  double lambda_max = 0.5;
  double tolerance = 5e-3;
};

/// Lyapunov exponent at spectral samples; pass iff the maximum is at most
/// the tolerance.  Also records the lambda = 0, E = 3 hyperbolic control
/// and whether the spectral filter excludes E = 3.
ExperimentReport verify_zero_lyapunov(const PotentialSpec& v, const Frequency& freq,
                                      const LyapunovCheckOptions& options = {});

struct GrowthCheckOptions {
  std::int64_t s_max = 100000;
  int phase_count = 16;
  int checkpoints = 24;
  double epsilon0 = 0.0;
  double slope_limit = 0.05;
};

/// Fits sup ln ||A_s|| ~ a ln s + b per energy; pass iff
/// sup ln ||A_{s_max}|| <= slope_limit * s_max for every energy.
ExperimentReport verify_growth_bound(const PotentialSpec& v, const Frequency& freq,
                                     const std::vector<double>& energies,
                                     const GrowthCheckOptions& options = {});

struct HolderCheckOptions {
  int L = 4000;
  int phase_count = 32;
  std::vector<double> eps_list = {0.1, 0.03, 0.01};
  /// Grid spacing as a fraction of min(eps_list).
  double spacing_fraction = 0.2;
  double max_upper_growth = 2.0;
  double min_lower = 0.05;
};

ExperimentReport verify_holder(const PotentialSpec& v, const Frequency& freq,
                               const HolderCheckOptions& options = {});

struct CoveringDiagnostic {
  double E = 0.0;
  double theta_star = 0.0;
  ResonanceRecord record;
  double rho = 0.0;
  std::int64_t m_best = 0;
  /// ||2 rho - m_best alpha||.
  double rotation_residual = 0.0;
};

/// Resonances of theta_star and the best m with |m| <= m_bound_factor |n_last|.
CoveringDiagnostic covering_diagnostic(double E, double theta_star, double rho, double alpha,
                                       double epsilon0, double m_bound_factor,
                                       std::int64_t search_bound);

struct ResonanceCheckOptions {
  double epsilon0 = 0.25;
  double m_bound_factor = 4.0;
  std::int64_t search_bound = 300;
  int dual_L = 201;
  std::int64_t rotation_steps = 20000;
  int rotation_phases = 4;
  double constructed_tolerance = 1e-3;
  double correlation_limit = -0.5;
};

struct ResonanceCheck {
  std::vector<CoveringDiagnostic> diagnostics;
  /// theta = alpha / 2 at the energy with 2 rho = alpha.
  CoveringDiagnostic constructed;
  ExperimentReport report;
};

/// Pass iff the constructed case recovers m = 1 within tolerance and, given
/// at least three resonant samples, the rank correlation of |n_last| with
/// ln ||2 rho - m_best alpha|| is at most correlation_limit.
ResonanceCheck verify_rotation_resonance(const PotentialSpec& v, const Frequency& freq,
                                         const std::vector<double>& energies,
                                         const ResonanceCheckOptions& options = {});

/// The energy with rho(E) = target (bisection on the monotone rotation
/// number).
double energy_for_rotation(const PotentialSpec& v, const Frequency& freq, double target,
                           std::int64_t n_steps = 20000, int phases = 4);

struct DualityCheckOptions {
  int samples = 20;
  int compare_L = 1000;
  int compare_phases = 16;
  int dual_L = 801;
  int sample_L = 2000;
  std::uint64_t seed = 1;
  double hausdorff_limit = 0.05;
  double max_abs_limit = 1.1;
  double residual_limit = 1e-4;
};

ExperimentReport verify_duality(const PotentialSpec& v, const Frequency& freq,
                                const DualityCheckOptions& options = {});

struct MeasureCheckOptions {
  int samples = 10;
  std::vector<double> eps_list = {0.1, 0.05};
  int L = 2000;
  double theta = 0.0;
  int phase_count = 64;
  std::uint64_t seed = 1;
};

/// mu(E - eps, E + eps) / (eps sup_{s <= 1/eps} ||A_s||^2) at spectral
/// samples; pass iff every ratio is finite and the largest ratio does not
/// increase as eps decreases.
ExperimentReport verify_measure_bound(const PotentialSpec& v, const Frequency& freq,
                                      const MeasureCheckOptions& options = {});

struct AcProxyOptions {
  int samples = 20;
  std::int64_t horizon = 100000;
  double threshold_log = 4.605170185988092;  // ln 100
  int phase_count = 16;
  int checkpoints = 16;
  int L = 2000;
  std::uint64_t seed = 1;
  double ratio_eps = 0.05;
  double min_fraction = 0.9;
};

/// Fraction of spectral samples whose cocycle stays bounded (running sup of
/// ln ||A_s|| <= threshold_log up to the horizon).  This is a finite-volume
/// proxy only; absolute continuity is not decidable numerically.  Verdict
/// pass iff the fraction is at least min_fraction.
ExperimentReport ac_spectrum_proxy(const PotentialSpec& v, const Frequency& freq,
                                   const AcProxyOptions& options = {});

struct SuiteOptions {
  std::uint64_t seed = 1;
  bool quick = false;
};

/// All experiments for one (v, alpha), in a fixed order.
std::vector<ExperimentReport> run_all(const PotentialSpec& v, const Frequency& freq,
                                      const SuiteOptions& options = {});

nlohmann::json to_json(const CoveringDiagnostic& diagnostic);

}  // namespace qpspec
