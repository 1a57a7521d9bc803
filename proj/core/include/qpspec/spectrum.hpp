#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpspec/arithmetic.hpp"
#include "qpspec/cocycle.hpp"
#include "qpspec/potential.hpp"

namespace qpspec {

/// Dirichlet section of a Hermitian banded lattice operator on sites
/// first_site .. first_site + L - 1.
struct TruncatedOperator {
  std::int64_t first_site = 0;
  double theta = 0.0;
  std::vector<double> diagonal;
  /// bands[k-1][i] = H(i, i+k), i = 0..L-k-1.
  std::vector<std::vector<std::complex<double>>> bands;

  int size() const { return static_cast<int>(diagonal.size()); }
  int band_width() const { return static_cast<int>(bands.size()); }
  bool is_real() const;
  std::complex<double> entry(int i, int j) const;
  /// max_i sum_j |H(i, j)|, a bound on the operator norm.
  double gershgorin_bound() const;
  /// Index of a lattice site inside the section.
  int index_of(std::int64_t site) const { return static_cast<int>(site - first_site); }
};

/// (H u)_n = u_{n+1} + u_{n-1} + lambda v(theta + n alpha) u_n on sites
/// first_site .. first_site + L - 1.
TruncatedOperator truncate(const PotentialSpec& v, const Frequency& freq, double theta, int L,
                           std::int64_t first_site = 0);
TruncatedOperator truncate(const PotentialSpec& v, double alpha, double theta, int L,
                           std::int64_t first_site = 0);

/// Number of eigenvalues below E by inertia of H - E.  A vanishing pivot is
/// retried at E + 1e-10 and then E - 1e-10.
std::int64_t eig_count_below(const TruncatedOperator& op, double E);

/// All eigenvalues in ascending order (LAPACK).
std::vector<double> eigenvalues(const TruncatedOperator& op);

/// min_j |E - eig_j| by bisection on eigenvalue counts.
double nearest_eigenvalue_distance(const TruncatedOperator& op, double E);

struct IDSCurve {
  std::vector<double> grid;
  std::vector<double> values;
  int L = 0;
  int phase_count = 0;
};

IDSCurve ids(const PotentialSpec& v, const Frequency& freq, std::vector<double> grid, int L,
             int phase_count);

/// Value at E by linear interpolation; 0 / 1 beyond the grid ends.
double ids_at(const IDSCurve& curve, double E);

std::vector<double> linear_grid(double lo, double hi, int points);

struct SpectrumMembership {
  bool in_spectrum = false;
  double distance = 0.0;
};

/// distance = max over phases of the distance from E to the eigenvalues of
/// that phase's truncation.  The spectrum does not depend on the phase,
/// while Dirichlet edge states do, so requiring every phase to see E keeps
/// boundary states inside gaps from registering.  delta <= 0 means 10 / L.
SpectrumMembership spectrum_indicator(const PotentialSpec& v, const Frequency& freq, double E,
                                      int L, int phase_count, double delta = -1.0);

/// spectrum_indicator over a whole grid: one dense eigensolve per phase,
/// then a binary search per energy.  delta <= 0 means 10 / L.
std::vector<bool> spectrum_mask(const PotentialSpec& v, const Frequency& freq,
                                const std::vector<double>& grid, int L, int phase_count,
                                double delta);

/// Eigenvalues of ops[0] lying within delta of the spectrum of every other
/// operator, ascending.
std::vector<double> robust_spectrum(const std::vector<TruncatedOperator>& ops, double delta);

/// Hausdorff distance between two finite sets of reals.
double hausdorff_distance(std::vector<double> a, std::vector<double> b);

/// `count` energies drawn without replacement from the robust spectrum of
/// the L-site truncations (phase_grid(phase_count)), trimming a fraction
/// `edge_trim` of levels at either end; ascending.  The draw depends only
/// on `seed`.
std::vector<double> spectral_samples(const PotentialSpec& v, const Frequency& freq, int L,
                                     int count, std::uint64_t seed, int phase_count = 8,
                                     double edge_trim = 0.05);

enum class MeasureMethod { EigenWeights, Herglotz };

std::string to_string(MeasureMethod method);
MeasureMethod measure_method_from_string(const std::string& name);

/// Interval masses of mu = mu^{e_{-1}} + mu^{e_0} for the truncation on
/// sites -L/2 .. L/2 - 1, which keeps both Dirac vectors far from the
/// boundary.
struct SpectralMeasureApprox {
  std::vector<double> partition;
  std::vector<double> masses;
  MeasureMethod method = MeasureMethod::EigenWeights;
  double theta = 0.0;
  double total = 0.0;
  int L = 0;
  double eta = 0.0;
  /// (eigenvalue, weight) pairs; eigen-weights method only.
  std::vector<std::pair<double, double>> atoms;
  /// Per-vector masses, {e_{-1}, e_0}.
  std::vector<double> masses_minus_one;
  std::vector<double> masses_zero;
};

inline constexpr int kDenseEigenCap = 4000;

/// eta <= 0 means 20 / L.  The eigen-weights method is limited to
/// L <= kDenseEigenCap.
SpectralMeasureApprox spectral_measure(const PotentialSpec& v, const Frequency& freq, double theta,
                                       std::vector<double> partition, int L, MeasureMethod method,
                                       double eta = -1.0);

/// mu(a, b).  Exact for eigen-weights; Herglotz masses are spread uniformly
/// within partition cells.
double interval_mass(const SpectralMeasureApprox& measure, double a, double b);

/// mu(E - eps, E + eps) / (eps * sup_{s <= 1/eps} ||A_s||^2).
double measure_bound_check(const SpectralMeasureApprox& measure, const GrowthProfile& growth,
                           double E, double eps);

struct HolderRow {
  double eps = 0.0;
  /// max_E (N(E + eps) - N(E - eps)) / eps^{1/2}
  double upper = 0.0;
  double upper_at = 0.0;
  /// min over spectral E of (N(E + eps) - N(E - eps)) / eps^2
  double lower = 0.0;
  double lower_at = 0.0;
  int lower_samples = 0;
};

/// `spectral` flags the grid energies included in the lower-bound scan; the
/// grid spacing must not exceed min(eps_list) / 4.
std::vector<HolderRow> holder_scan(const IDSCurve& curve, const std::vector<double>& eps_list,
                                   const std::vector<bool>& spectral);

nlohmann::json to_json(const IDSCurve& curve);
nlohmann::json to_json(const SpectralMeasureApprox& measure);
nlohmann::json to_json(const HolderRow& row);

}  // namespace qpspec
