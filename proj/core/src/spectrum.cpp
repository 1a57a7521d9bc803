#include "qpspec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "banded.hpp"
#include "qpspec/parallel.hpp"

namespace qpspec {
namespace {

// Eigenvalue with 0-based index k by bisection on counts.
double kth_eigenvalue(const TruncatedOperator& op, std::int64_t k) {
  double lo = -op.gershgorin_bound() - 1.0, hi = op.gershgorin_bound() + 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (eig_count_below(op, mid) > k) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void check_grid(const std::vector<double>& grid) {
  if (!std::is_sorted(grid.begin(), grid.end())) throw std::invalid_argument("energy grid must be sorted");
}

std::complex<double> diagonal_green(const TruncatedOperator& op, int c, std::complex<double> z,
                                    std::vector<std::complex<double>>& left,
                                    std::vector<std::complex<double>>& right) {
  const int n = op.size();
  left.resize(n);
  right.resize(n);
  for (int i = 0; i <= c; ++i) {
    left[i] = op.diagonal[i] - z;
    if (i > 0) left[i] -= std::norm(op.bands[0][i - 1]) / left[i - 1];
  }
  for (int i = n - 1; i >= c; --i) {
    right[i] = op.diagonal[i] - z;
    if (i + 1 < n) right[i] -= std::norm(op.bands[0][i]) / right[i + 1];
  }
  return 1.0 / (left[c] + right[c] - (op.diagonal[c] - z));
}

}  // namespace

bool TruncatedOperator::is_real() const {
  for (const auto& band : bands) {
    for (const auto& h : band) {
      if (h.imag() != 0.0) return false;
    }
  }
  return true;
}

std::complex<double> TruncatedOperator::entry(int i, int j) const {
  if (i == j) return diagonal.at(i);
  const int k = std::abs(i - j);
  if (k > band_width()) return {};
  const auto h = bands[k - 1].at(std::min(i, j));
  return i < j ? h : std::conj(h);
}

double TruncatedOperator::gershgorin_bound() const {
  const int n = size();
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = std::abs(diagonal[i]);
    for (int k = 1; k <= band_width(); ++k) {
      if (i + k < n) row += std::abs(bands[k - 1][i]);
      if (i - k >= 0) row += std::abs(bands[k - 1][i - k]);
    }
    best = std::max(best, row);
  }
  return best;
}

TruncatedOperator truncate(const PotentialSpec& v, double alpha, double theta, int L,
                           std::int64_t first_site) {
  if (L < 2) throw std::invalid_argument("truncate: L must be >= 2");
  TruncatedOperator op;
  op.first_site = first_site;
  op.theta = theta;
  op.diagonal.resize(L);
  for (int i = 0; i < L; ++i) {
    const long double x = static_cast<long double>(theta) +
                          static_cast<long double>(first_site + i) * static_cast<long double>(alpha);
    op.diagonal[i] = v.coupled(wrap_phase(x));
  }
  op.bands.assign(1, std::vector<std::complex<double>>(L - 1, 1.0));
  return op;
}

TruncatedOperator truncate(const PotentialSpec& v, const Frequency& freq, double theta, int L,
                           std::int64_t first_site) {
  return truncate(v, freq.alpha(), theta, L, first_site);
}

std::int64_t eig_count_below(const TruncatedOperator& op, double E) {
  for (double shift : {0.0, 1e-10, -1e-10}) {
    if (auto count = detail::inertia_below(op, E + shift)) return *count;
  }
  throw std::runtime_error("eig_count_below: pivot breakdown persists after jitter");
}

std::vector<double> eigenvalues(const TruncatedOperator& op) { return detail::all_eigenvalues(op); }

double nearest_eigenvalue_distance(const TruncatedOperator& op, double E) {
  const std::int64_t below = eig_count_below(op, E);
  double best = std::numeric_limits<double>::infinity();
  if (below > 0) best = std::min(best, E - kth_eigenvalue(op, below - 1));
  if (below < op.size()) best = std::min(best, kth_eigenvalue(op, below) - E);
  return std::max(0.0, best);
}

IDSCurve ids(const PotentialSpec& v, const Frequency& freq, std::vector<double> grid, int L,
             int phase_count) {
  check_grid(grid);
  const auto phases = phase_grid(phase_count);
  std::vector<std::vector<std::int64_t>> counts(phase_count);
  parallel_for(phase_count, [&](std::size_t j) {
    const auto op = truncate(v, freq, phases[j], L);
    counts[j].resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) counts[j][i] = eig_count_below(op, grid[i]);
  });
  IDSCurve out;
  out.L = L;
  out.phase_count = phase_count;
  out.values.assign(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::int64_t total = 0;
    for (int j = 0; j < phase_count; ++j) total += counts[j][i];
    out.values[i] = static_cast<double>(total) / (static_cast<double>(L) * phase_count);
  }
  out.grid = std::move(grid);
  return out;
}

double ids_at(const IDSCurve& curve, double E) {
  const auto& g = curve.grid;
  if (g.empty()) throw std::invalid_argument("ids_at: empty curve");
  if (E <= g.front()) return E < g.front() ? 0.0 : curve.values.front();
  if (E >= g.back()) return E > g.back() ? 1.0 : curve.values.back();
  const auto it = std::upper_bound(g.begin(), g.end(), E);
  const std::size_t i = static_cast<std::size_t>(it - g.begin());
  const double t = (E - g[i - 1]) / (g[i] - g[i - 1]);
  return curve.values[i - 1] + t * (curve.values[i] - curve.values[i - 1]);
}

std::vector<double> linear_grid(double lo, double hi, int points) {
  if (points < 2 || !(hi > lo)) throw std::invalid_argument("linear_grid: need points >= 2 and hi > lo");
  std::vector<double> out(points);
  for (int i = 0; i < points; ++i) out[i] = lo + (hi - lo) * i / (points - 1);
  return out;
}

SpectrumMembership spectrum_indicator(const PotentialSpec& v, const Frequency& freq, double E,
                                      int L, int phase_count, double delta) {
  if (delta <= 0.0) delta = 10.0 / L;
  const auto phases = phase_grid(phase_count);
  std::vector<double> dist(phase_count);
  parallel_for(phase_count, [&](std::size_t j) {
    dist[j] = nearest_eigenvalue_distance(truncate(v, freq, phases[j], L), E);
  });
  SpectrumMembership out;
  out.distance = *std::max_element(dist.begin(), dist.end());
  out.in_spectrum = out.distance <= delta;
  return out;
}

std::vector<bool> spectrum_mask(const PotentialSpec& v, const Frequency& freq,
                                const std::vector<double>& grid, int L, int phase_count,
                                double delta) {
  if (delta <= 0.0) delta = 10.0 / L;
  const auto phases = phase_grid(phase_count);
  std::vector<std::vector<double>> spectra(phase_count);
  parallel_for(phase_count, [&](std::size_t j) { spectra[j] = eigenvalues(truncate(v, freq, phases[j], L)); });
  std::vector<bool> mask(grid.size(), true);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (const auto& s : spectra) {
      const auto it = std::lower_bound(s.begin(), s.end(), grid[i]);
      double d = std::numeric_limits<double>::infinity();
      if (it != s.end()) d = std::min(d, *it - grid[i]);
      if (it != s.begin()) d = std::min(d, grid[i] - *(it - 1));
      if (d > delta) {
        mask[i] = false;
        break;
      }
    }
  }
  return mask;
}

std::vector<double> robust_spectrum(const std::vector<TruncatedOperator>& ops, double delta) {
  if (ops.empty()) return {};
  std::vector<std::vector<double>> spectra(ops.size());
  parallel_for(ops.size(), [&](std::size_t j) { spectra[j] = eigenvalues(ops[j]); });
  std::vector<double> out;
  for (double e : spectra[0]) {
    bool keep = true;
    for (std::size_t j = 1; j < spectra.size() && keep; ++j) {
      const auto& s = spectra[j];
      const auto it = std::lower_bound(s.begin(), s.end(), e);
      double d = std::numeric_limits<double>::infinity();
      if (it != s.end()) d = std::min(d, *it - e);
      if (it != s.begin()) d = std::min(d, e - *(it - 1));
      keep = d <= delta;
    }
    if (keep) out.push_back(e);
  }
  return out;
}

double hausdorff_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  auto directed = [](const std::vector<double>& x, const std::vector<double>& y) {
    double worst = 0.0;
    for (double e : x) {
      const auto it = std::lower_bound(y.begin(), y.end(), e);
      double d = std::numeric_limits<double>::infinity();
      if (it != y.end()) d = std::min(d, *it - e);
      if (it != y.begin()) d = std::min(d, e - *(it - 1));
      worst = std::max(worst, d);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

std::vector<double> spectral_samples(const PotentialSpec& v, const Frequency& freq, int L,
                                     int count, std::uint64_t seed, int phase_count,
                                     double edge_trim) {
  if (count < 1) throw std::invalid_argument("spectral_samples: count must be >= 1");
  std::vector<TruncatedOperator> ops;
  for (double theta : phase_grid(phase_count)) ops.push_back(truncate(v, freq, theta, L));
  const auto robust = robust_spectrum(ops, 10.0 / L);
  const auto trim = static_cast<std::size_t>(edge_trim * static_cast<double>(robust.size()));
  if (robust.size() <= 2 * trim || robust.size() - 2 * trim < static_cast<std::size_t>(count)) {
    throw std::runtime_error("spectral_samples: not enough spectral levels");
  }
  std::vector<double> pool(robust.begin() + trim, robust.end() - trim);
  // Partial Fisher-Yates with explicit modular draws so the choice does not
  // depend on the standard library's distribution implementations.
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count; ++i) {
    const std::size_t span = pool.size() - i;
    const std::size_t j = i + static_cast<std::size_t>(rng() % span);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::string to_string(MeasureMethod method) {
  return method == MeasureMethod::EigenWeights ? "eigen-weights" : "herglotz";
}

MeasureMethod measure_method_from_string(const std::string& name) {
  if (name == "eigen-weights" || name == "eigen") return MeasureMethod::EigenWeights;
  if (name == "herglotz") return MeasureMethod::Herglotz;
  throw std::invalid_argument("unknown measure method: " + name);
}

SpectralMeasureApprox spectral_measure(const PotentialSpec& v, const Frequency& freq, double theta,
                                       std::vector<double> partition, int L, MeasureMethod method,
                                       double eta) {
  if (L < 4) throw std::invalid_argument("spectral_measure: L must be >= 4");
  if (partition.size() < 2 || !std::is_sorted(partition.begin(), partition.end())) {
    throw std::invalid_argument("spectral_measure: partition must be sorted with >= 2 points");
  }
  const auto op = truncate(v, freq, theta, L, -static_cast<std::int64_t>(L / 2));
  const int c0 = op.index_of(0), c1 = op.index_of(-1);
  const double bottom = kth_eigenvalue(op, 0), top = kth_eigenvalue(op, L - 1);
  if (partition.front() > bottom || partition.back() < top) {
    throw std::invalid_argument("spectral_measure: partition does not cover the spectrum [" +
                                std::to_string(bottom) + ", " + std::to_string(top) + "]");
  }

  SpectralMeasureApprox out;
  out.method = method;
  out.theta = theta;
  out.L = L;
  const std::size_t cells = partition.size() - 1;
  out.masses.assign(cells, 0.0);
  out.masses_minus_one.assign(cells, 0.0);
  out.masses_zero.assign(cells, 0.0);

  if (method == MeasureMethod::EigenWeights) {
    if (L > kDenseEigenCap) {
      throw std::invalid_argument("spectral_measure: L = " + std::to_string(L) +
                                  " exceeds the dense eigensolver cap " +
                                  std::to_string(kDenseEigenCap) + "; use the herglotz method");
    }
    const auto pairs = detail::real_eigenpairs(op, 1, L);
    for (std::size_t j = 0; j < pairs.values.size(); ++j) {
      const double* psi = pairs.vectors.data() + j * static_cast<std::size_t>(L);
      const double w1 = psi[c1] * psi[c1], w0 = psi[c0] * psi[c0];
      const double e = pairs.values[j];
      out.atoms.emplace_back(e, w0 + w1);
      // Cells are half-open (left, right]; the first also takes its left end.
      auto it = std::lower_bound(partition.begin(), partition.end(), e);
      std::size_t cell = it == partition.begin() ? 0 : static_cast<std::size_t>(it - partition.begin()) - 1;
      if (it == partition.end() || cell >= cells) continue;
      out.masses_minus_one[cell] += w1;
      out.masses_zero[cell] += w0;
    }
  } else {
    if (eta <= 0.0) eta = 20.0 / L;
    out.eta = eta;
    parallel_for(cells, [&](std::size_t cell) {
      std::vector<std::complex<double>> left, right;
      const double a = partition[cell], b = partition[cell + 1];
      int steps = static_cast<int>(std::ceil((b - a) / (eta / 4.0)));
      steps += steps % 2;
      steps = std::max(steps, 2);
      const double h = (b - a) / steps;
      double s0 = 0.0, s1 = 0.0;
      for (int i = 0; i <= steps; ++i) {
        const std::complex<double> z(a + i * h, eta);
        const double weight = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s0 += weight * diagonal_green(op, c0, z, left, right).imag();
        s1 += weight * diagonal_green(op, c1, z, left, right).imag();
      }
      out.masses_zero[cell] = s0 * h / 3.0 / std::numbers::pi;
      out.masses_minus_one[cell] = s1 * h / 3.0 / std::numbers::pi;
    });
  }
  for (std::size_t i = 0; i < cells; ++i) {
    out.masses[i] = out.masses_zero[i] + out.masses_minus_one[i];
    out.total += out.masses[i];
  }
  out.partition = std::move(partition);
  return out;
}

double interval_mass(const SpectralMeasureApprox& measure, double a, double b) {
  if (b < a) std::swap(a, b);
  double mass = 0.0;
  if (measure.method == MeasureMethod::EigenWeights) {
    for (const auto& [e, w] : measure.atoms) {
      if (e > a && e < b) mass += w;
    }
    return mass;
  }
  for (std::size_t i = 0; i + 1 < measure.partition.size(); ++i) {
    const double lo = measure.partition[i], hi = measure.partition[i + 1];
    const double overlap = std::min(b, hi) - std::max(a, lo);
    if (overlap > 0.0 && hi > lo) mass += measure.masses[i] * overlap / (hi - lo);
  }
  return mass;
}

double measure_bound_check(const SpectralMeasureApprox& measure, const GrowthProfile& growth,
                           double E, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("measure_bound_check: eps must be positive");
  const auto horizon = static_cast<std::int64_t>(std::floor(1.0 / eps));
  const double sup_log = growth.running_sup_at(std::max<std::int64_t>(horizon, 1));
  return interval_mass(measure, E - eps, E + eps) / (eps * std::exp(2.0 * sup_log));
}

std::vector<HolderRow> holder_scan(const IDSCurve& curve, const std::vector<double>& eps_list,
                                   const std::vector<bool>& spectral) {
  const auto& g = curve.grid;
  if (g.size() < 2) throw std::invalid_argument("holder_scan: grid too small");
  if (spectral.size() != g.size()) throw std::invalid_argument("holder_scan: mask size mismatch");
  if (eps_list.empty()) throw std::invalid_argument("holder_scan: empty eps list");
  double spacing = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i) spacing = std::max(spacing, g[i] - g[i - 1]);
  const double eps_min = *std::min_element(eps_list.begin(), eps_list.end());
  if (spacing > eps_min / 4.0) {
    throw std::invalid_argument("holder_scan: grid spacing " + std::to_string(spacing) +
                                " is coarser than min(eps)/4 = " + std::to_string(eps_min / 4.0));
  }
  std::vector<HolderRow> rows;
  for (double eps : eps_list) {
    HolderRow row;
    row.eps = eps;
    row.lower = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double E = g[i];
      if (E - eps < g.front() || E + eps > g.back()) continue;
      const double dN = ids_at(curve, E + eps) - ids_at(curve, E - eps);
      const double up = dN / std::sqrt(eps);
      if (up > row.upper) {
        row.upper = up;
        row.upper_at = E;
      }
      if (spectral[i]) {
        ++row.lower_samples;
        const double low = dN / (eps * eps);
        if (low < row.lower) {
          row.lower = low;
          row.lower_at = E;
        }
      }
    }
    if (row.lower_samples == 0) row.lower = 0.0;
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json to_json(const IDSCurve& curve) {
  return {{"L", curve.L}, {"phase_count", curve.phase_count}, {"grid", curve.grid}, {"values", curve.values}};
}

nlohmann::json to_json(const SpectralMeasureApprox& measure) {
  return {{"method", to_string(measure.method)},
          {"theta", measure.theta},
          {"L", measure.L},
          {"eta", measure.eta},
          {"total", measure.total},
          {"partition", measure.partition},
          {"masses", measure.masses}};
}

nlohmann::json to_json(const HolderRow& row) {
  return {{"eps", row.eps},          {"upper", row.upper},       {"upper_at", row.upper_at},
          {"lower", row.lower},      {"lower_at", row.lower_at}, {"lower_samples", row.lower_samples}};
}

}  // namespace qpspec
