#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpspec/spectrum.hpp"

namespace qpspec {

/// (Hd u)_n = sum_k lambda vhat_k u_{n-k} + 2 cos 2 pi (theta + n alpha) u_n
/// on the L sites centered at 0 (-(L-1)/2 .. for odd L).  Requires
/// L >= 2 degree + 1.
TruncatedOperator dual_operator(const PotentialSpec& v, const Frequency& freq, double theta, int L);
TruncatedOperator dual_operator(const PotentialSpec& v, double alpha, double theta, int L);

struct DualSpectrumComparison {
  double hausdorff = 0.0;
  std::size_t direct_levels = 0;
  std::size_t dual_levels = 0;
};

/// Hausdorff distance between the robust spectra (see robust_spectrum) of
/// the direct and dual truncations over phase_grid(phase_count).
/// delta <= 0 means 10 / L.
DualSpectrumComparison dual_spectrum_compare(const PotentialSpec& v, const Frequency& freq, int L,
                                             int phase_count, double delta = -1.0);

struct DualCandidate {
  double theta = 0.0;
  double score = 0.0;
  double max_abs = 0.0;
  double residual = 0.0;
};

struct DualSolution {
  double E = 0.0;
  double theta_star = 0.0;
  std::int64_t first_site = 0;
  /// u_{first_site} .. u_{first_site + L - 1}, with u_0 = 1.
  std::vector<double> coefficients;
  double max_abs = 0.0;
  /// || (Hd - E) u || over all lattice rows, u extended by zero.
  double residual = 0.0;
  double score = 0.0;
  std::vector<DualCandidate> runners_up;

  double at(std::int64_t site) const;
};

struct DualSearchOptions {
  int theta_grid_size = 512;
  /// Candidates from the coarse grid refined by the secant search.
  int refine_candidates = 8;
  double penalty = 10.0;
  /// Phases for the spectrum-membership precondition.
  int indicator_phases = 8;
};

/// Searches theta for a solution of Hd u = E u with u_0 = 1 and |u_k| <= 1.
/// Coarse grid: the truncated eigenpair nearest E, normalized at site 0,
/// scored by |eig - E| + penalty max(0, max_abs - 1).  Refinement: secant
/// iteration on theta for the Schur complement f(theta) = ((Hd - E) u)_0
/// with u_0 = 1 and all other rows solved exactly.
/// Throws std::domain_error if E fails spectrum_indicator and
/// std::runtime_error("normalization degenerate; refine grid") when no
/// candidate has a usable site-0 entry.  Needs real Fourier coefficients.
DualSolution dual_bounded_solution(const PotentialSpec& v, const Frequency& freq, double E, int L,
                                   const DualSearchOptions& options = {});

nlohmann::json to_json(const DualSolution& solution);
nlohmann::json to_json(const DualSpectrumComparison& comparison);

}  // namespace qpspec
