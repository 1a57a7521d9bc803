#include "qpspec/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "banded.hpp"
#include "qpspec/parallel.hpp"

namespace qpspec {
namespace {

std::int64_t centered_first_site(int L) { return -static_cast<std::int64_t>(L / 2); }

struct Evaluated {
  double theta = 0.0;
  double f = 0.0;
  std::vector<double> u;
  bool ok = false;
};

double max_abs_of(const std::vector<double>& u) {
  double m = 0.0;
  for (double x : u) m = std::max(m, std::abs(x));
  return m;
}

// u with u_c = 1 solving every row of (Hd - E) u = 0 except row c; f is the
// remaining row.
Evaluated schur_solve(const PotentialSpec& v, double alpha, double theta, int L, double E) {
  Evaluated out;
  out.theta = theta;
  const auto op = dual_operator(v, alpha, theta, L);
  const int c = op.index_of(0);
  const int d = op.band_width();
  auto orig = [c](int i) { return i < c ? i : i + 1; };
  const int n = L - 1;
  std::vector<double> diag(n), rhs(n, 0.0);
  std::vector<std::vector<double>> bands(d);
  for (int i = 0; i < n; ++i) diag[i] = op.diagonal[orig(i)] - E;
  for (int k = 1; k <= d; ++k) {
    bands[k - 1].assign(std::max(n - k, 0), 0.0);
    for (int i = 0; i + k < n; ++i) {
      const int a = orig(i), b = orig(i + k);
      if (b - a <= d) bands[k - 1][i] = op.entry(a, b).real();
    }
  }
  for (int i = 0; i < n; ++i) {
    const int a = orig(i);
    if (std::abs(a - c) <= d) rhs[i] = -op.entry(a, c).real();
  }
  if (!detail::solve_symmetric_banded(diag, bands, rhs)) return out;
  out.u.resize(L);
  for (int i = 0; i < n; ++i) out.u[orig(i)] = rhs[i];
  out.u[c] = 1.0;
  double f = op.diagonal[c] - E;
  for (int j = std::max(0, c - d); j <= std::min(L - 1, c + d); ++j) {
    if (j != c) f += op.entry(c, j).real() * out.u[j];
  }
  out.f = f;
  out.ok = std::isfinite(f);
  return out;
}

double full_residual(const PotentialSpec& v, double alpha, double theta, int L, double E,
                     const std::vector<double>& u) {
  const auto op = dual_operator(v, alpha, theta, L);
  const int d = op.band_width();
  double sum = 0.0;
  for (int row = -d; row < L + d; ++row) {
    double r = 0.0;
    if (row >= 0 && row < L) r += (op.diagonal[row] - E) * u[row];
    for (int k = 1; k <= d; ++k) {
      // Hd(row, row + k) = lambda conj(vhat_k), Hd(row, row - k) = lambda vhat_k.
      const double up = v.lambda() * v.coeff(k).real();
      if (row + k >= 0 && row + k < L) r += up * u[row + k];
      if (row - k >= 0 && row - k < L) r += up * u[row - k];
    }
    sum += r * r;
  }
  return std::sqrt(sum);
}

}  // namespace

double DualSolution::at(std::int64_t site) const {
  const std::int64_t i = site - first_site;
  if (i < 0 || i >= static_cast<std::int64_t>(coefficients.size())) return 0.0;
  return coefficients[static_cast<std::size_t>(i)];
}

TruncatedOperator dual_operator(const PotentialSpec& v, double alpha, double theta, int L) {
  const int d = v.degree();
  if (L < 2 * d + 1 || L < 2) {
    throw std::invalid_argument("dual_operator: L must be >= 2 degree + 1 (and >= 2)");
  }
  TruncatedOperator op;
  op.first_site = centered_first_site(L);
  op.theta = theta;
  op.diagonal.resize(L);
  for (int i = 0; i < L; ++i) {
    const long double x = static_cast<long double>(theta) +
                          static_cast<long double>(op.first_site + i) * static_cast<long double>(alpha);
    op.diagonal[i] = 2.0 * std::cos(2.0 * std::numbers::pi * wrap_phase(x));
  }
  op.bands.resize(d);
  for (int k = 1; k <= d; ++k) {
    op.bands[k - 1].assign(L - k, v.lambda() * std::conj(v.coeff(k)));
  }
  return op;
}

TruncatedOperator dual_operator(const PotentialSpec& v, const Frequency& freq, double theta, int L) {
  return dual_operator(v, freq.alpha(), theta, L);
}

DualSpectrumComparison dual_spectrum_compare(const PotentialSpec& v, const Frequency& freq, int L,
                                             int phase_count, double delta) {
  if (delta <= 0.0) delta = 10.0 / L;
  std::vector<TruncatedOperator> direct, dual;
  for (double theta : phase_grid(phase_count)) {
    direct.push_back(truncate(v, freq, theta, L));
    dual.push_back(dual_operator(v, freq, theta, L));
  }
  const auto a = robust_spectrum(direct, delta);
  const auto b = robust_spectrum(dual, delta);
  return {hausdorff_distance(a, b), a.size(), b.size()};
}

DualSolution dual_bounded_solution(const PotentialSpec& v, const Frequency& freq, double E, int L,
                                   const DualSearchOptions& options) {
  for (const auto& [k, c] : v.coeffs()) {
    if (c.imag() != 0.0) {
      throw std::invalid_argument("dual_bounded_solution: requires real Fourier coefficients");
    }
  }
  if (options.theta_grid_size < 1 || options.refine_candidates < 1) {
    throw std::invalid_argument("dual_bounded_solution: grid and candidate counts must be >= 1");
  }
  const auto membership = spectrum_indicator(v, freq, E, L, options.indicator_phases);
  if (!membership.in_spectrum) {
    throw std::domain_error("dual_bounded_solution: E = " + std::to_string(E) +
                            " is not in the numerical spectrum (distance " +
                            std::to_string(membership.distance) + ")");
  }
  const double alpha = freq.alpha();
  const int grid = options.theta_grid_size;

  std::vector<DualCandidate> coarse(grid);
  parallel_for(grid, [&](std::size_t g) {
    const double theta = static_cast<double>(g) / grid;
    const auto op = dual_operator(v, alpha, theta, L);
    const int c = op.index_of(0);
    // Eigenvalues move by at most about 4 pi |d theta| across a grid cell,
    // so the wanted branch lies within this window of E at the nearest
    // grid point.
    const double window = 4.0 * std::numbers::pi / grid;
    const auto low = static_cast<int>(eig_count_below(op, E - window));
    const auto high = static_cast<int>(eig_count_below(op, E + window));
    const int il = std::clamp(low + 1, 1, L), iu = std::clamp(std::max(high, low + 1), 1, L);
    const auto pairs = detail::real_eigenpairs(op, il, iu);
    DualCandidate best{theta, std::numeric_limits<double>::infinity(), 0.0, 0.0};
    for (std::size_t j = 0; j < pairs.values.size(); ++j) {
      const double* psi = pairs.vectors.data() + j * static_cast<std::size_t>(L);
      if (std::abs(psi[c]) < 1e-8) continue;
      double m = 0.0;
      for (int i = 0; i < L; ++i) m = std::max(m, std::abs(psi[i] / psi[c]));
      const double score = std::abs(pairs.values[j] - E) + options.penalty * std::max(0.0, m - 1.0);
      if (score < best.score) best = {theta, score, m, std::abs(pairs.values[j] - E)};
    }
    coarse[g] = best;
  });
  std::vector<DualCandidate> usable;
  for (const auto& c : coarse) {
    if (std::isfinite(c.score)) usable.push_back(c);
  }
  if (usable.empty()) throw std::runtime_error("normalization degenerate; refine grid");
  std::stable_sort(usable.begin(), usable.end(),
                   [](const DualCandidate& a, const DualCandidate& b) { return a.score < b.score; });
  const int count = std::min<int>(options.refine_candidates, static_cast<int>(usable.size()));

  std::vector<std::optional<Evaluated>> refined(count);
  parallel_for(count, [&](std::size_t i) {
    const double start = usable[i].theta;
    const double max_move = 4.0 / grid;
    double t0 = start, t1 = start + 1e-4;
    Evaluated e0 = schur_solve(v, alpha, t0, L, E);
    Evaluated e1 = schur_solve(v, alpha, t1, L, E);
    if (!e0.ok || !e1.ok) return;
    for (int it = 0; it < 80; ++it) {
      if (std::abs(e1.f) < 1e-13) break;
      if (e1.f == e0.f) break;
      const double t2 = t1 - e1.f * (t1 - t0) / (e1.f - e0.f);
      if (!std::isfinite(t2) || std::abs(t2 - start) > max_move) return;
      Evaluated e2 = schur_solve(v, alpha, t2, L, E);
      if (!e2.ok) return;
      const bool stalled = std::abs(t2 - t1) < 1e-16;
      t0 = t1;
      e0 = std::move(e1);
      t1 = t2;
      e1 = std::move(e2);
      if (stalled) break;
    }
    refined[i] = std::move(e1);
  });

  std::vector<std::pair<DualCandidate, const Evaluated*>> finals;
  for (const auto& r : refined) {
    if (!r) continue;
    DualCandidate c;
    c.theta = wrap_phase(r->theta);
    c.max_abs = max_abs_of(r->u);
    c.residual = full_residual(v, alpha, r->theta, L, E, r->u);
    c.score = c.residual + options.penalty * std::max(0.0, c.max_abs - 1.0);
    finals.emplace_back(c, &*r);
  }
  if (finals.empty()) {
    throw std::runtime_error("dual_bounded_solution: refinement failed for every candidate; refine grid");
  }
  std::stable_sort(finals.begin(), finals.end(),
                   [](const auto& a, const auto& b) { return a.first.score < b.first.score; });

  DualSolution out;
  out.E = E;
  out.theta_star = finals.front().first.theta;
  out.first_site = centered_first_site(L);
  out.coefficients = finals.front().second->u;
  out.max_abs = finals.front().first.max_abs;
  out.residual = finals.front().first.residual;
  out.score = finals.front().first.score;
  for (std::size_t i = 1; i < finals.size(); ++i) out.runners_up.push_back(finals[i].first);
  return out;
}

nlohmann::json to_json(const DualSolution& solution) {
  nlohmann::json runners = nlohmann::json::array();
  for (const auto& c : solution.runners_up) {
    runners.push_back({{"theta", c.theta}, {"score", c.score}, {"max_abs", c.max_abs}, {"residual", c.residual}});
  }
  return {{"E", solution.E},
          {"theta", solution.theta_star},
          {"residual", solution.residual},
          {"max_abs", solution.max_abs},
          {"first_site", solution.first_site},
          {"coeffs", solution.coefficients},
          {"runners_up", runners}};
}

nlohmann::json to_json(const DualSpectrumComparison& comparison) {
  return {{"hausdorff", comparison.hausdorff},
          {"direct_levels", comparison.direct_levels},
          {"dual_levels", comparison.dual_levels}};
}

}  // namespace qpspec
