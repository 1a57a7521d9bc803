#include "qpspec/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "qpspec/cocycle.hpp"
#include "qpspec/parallel.hpp"
#include "qpspec/rotation.hpp"

namespace qpspec {
namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

nlohmann::json base_config(const PotentialSpec& v, const Frequency& freq) {
  return {{"potential", to_json(v)}, {"alpha", freq.alpha()}};
}

std::vector<double> average_ranks(const std::vector<double>& x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

// Spectrum bound used to frame energy grids.
double spectral_radius_bound(const PotentialSpec& v) {
  return 2.0 + std::abs(v.lambda()) * strip_norm(v, 0.0);
}

void finish(ExperimentReport& report, const Stopwatch& watch) { report.runtime_seconds = watch.seconds(); }

}  // namespace

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Informational:
      return "informational";
  }
  return "informational";
}

double ExperimentReport::get(const std::string& label) const {
  for (const auto& [name, value] : measurements) {
    if (name == label) return value;
  }
  throw std::out_of_range("report " + this->name + " has no measurement " + label);
}

nlohmann::json to_json(const ExperimentReport& report, bool include_runtime) {
  nlohmann::json measurements = nlohmann::json::array();
  for (const auto& [label, value] : report.measurements) {
    measurements.push_back({{"label", label}, {"value", std::isfinite(value) ? nlohmann::json(value) : nlohmann::json(nullptr)}});
  }
  nlohmann::json out = {{"name", report.name},
                        {"config", report.config},
                        {"measurements", measurements},
                        {"verdict", to_string(report.verdict)},
                        {"notes", report.notes}};
  if (include_runtime) out["runtime_seconds"] = report.runtime_seconds;
  return out;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: size mismatch");
  const std::size_t n = x.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

ExperimentReport verify_zero_lyapunov(const PotentialSpec& v, const Frequency& freq,
                                      const LyapunovCheckOptions& options) {
  Stopwatch watch;
  if (std::abs(v.lambda()) > options.lambda_max) {
    throw std::invalid_argument("verify_zero_lyapunov: |lambda| exceeds the configured smallness " +
                                std::to_string(options.lambda_max));
  }
  ExperimentReport report;
  report.name = "zero_lyapunov";
  report.config = base_config(v, freq);
  report.config["samples"] = options.samples;
  report.config["n_steps"] = options.n_steps;
  report.config["n_phases"] = options.n_phases;
  report.config["L"] = options.L;
  report.config["seed"] = options.seed;

  const auto energies = spectral_samples(v, freq, options.L, options.samples, options.seed);
  if (energies.empty()) throw std::runtime_error("verify_zero_lyapunov: no spectral samples");
  double worst = 0.0;
  for (double E : energies) {
    const auto estimate = lyapunov_exponent(v, freq, E, options.n_steps, options.n_phases);
    report.add("L(E=" + std::to_string(E) + ")", estimate.value);
    worst = std::max(worst, estimate.value);
  }
  report.add("max_lyapunov", worst);

  const PotentialSpec free = v.with_lambda(0.0);
  report.add("control_lambda0_E3", lyapunov_exponent(free, freq, 3.0, options.n_steps, 1).value);
  report.add("control_E3_in_spectrum",
             spectrum_indicator(free, freq, 3.0, options.L, 4).in_spectrum ? 1.0 : 0.0);
  report.verdict = worst <= options.tolerance ? Verdict::Pass : Verdict::Fail;
  finish(report, watch);
  return report;
}

ExperimentReport verify_growth_bound(const PotentialSpec& v, const Frequency& freq,
                                     const std::vector<double>& energies,
                                     const GrowthCheckOptions& options) {
  Stopwatch watch;
  ExperimentReport report;
  report.name = "growth_bound";
  report.config = base_config(v, freq);
  report.config["energies"] = energies;
  report.config["s_max"] = options.s_max;
  report.config["phase_count"] = options.phase_count;
  report.config["epsilon0"] = options.epsilon0;
  bool pass = !energies.empty();
  for (double E : energies) {
    const auto profile = growth_profile(Cocycle::schrodinger(v, freq.alpha(), E), options.s_max,
                                        options.phase_count, options.checkpoints);
    // Least squares for sup_log_norm ~ a ln s + b.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(profile.checkpoints.size());
    for (const auto& c : profile.checkpoints) {
      const double x = std::log(static_cast<double>(c.s));
      sx += x;
      sy += c.sup_log_norm;
      sxx += x * x;
      sxy += x * c.sup_log_norm;
    }
    const double denom = n * sxx - sx * sx;
    const double a = denom > 0 ? (n * sxy - sx * sy) / denom : 0.0;
    const double b = (sy - a * sx) / n;
    const double last = profile.checkpoints.back().sup_log_norm;
    const std::string tag = "(E=" + std::to_string(E) + ")";
    report.add("a" + tag, a);
    report.add("b" + tag, b);
    report.add("sup_log_norm_at_s_max" + tag, last);
    if (!(last <= options.slope_limit * static_cast<double>(options.s_max))) pass = false;
  }
  report.verdict = pass ? Verdict::Pass : Verdict::Fail;
  finish(report, watch);
  return report;
}

ExperimentReport verify_holder(const PotentialSpec& v, const Frequency& freq,
                               const HolderCheckOptions& options) {
  Stopwatch watch;
  if (options.eps_list.empty()) throw std::invalid_argument("verify_holder: empty eps list");
  ExperimentReport report;
  report.name = "holder";
  report.config = base_config(v, freq);
  report.config["L"] = options.L;
  report.config["phase_count"] = options.phase_count;
  report.config["eps_list"] = options.eps_list;

  auto eps = options.eps_list;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  const double radius = spectral_radius_bound(v) + eps.front() + 0.05;
  const double spacing = options.spacing_fraction * eps.back();
  const int points = static_cast<int>(std::ceil(2.0 * radius / spacing)) + 1;
  auto grid = linear_grid(-radius, radius, points);
  const auto mask = spectrum_mask(v, freq, grid, options.L, std::min(options.phase_count, 8),
                                  10.0 / options.L);
  const auto curve = ids(v, freq, grid, options.L, options.phase_count);
  const auto rows = holder_scan(curve, eps, mask);

  bool pass = true;
  double lower_min = std::numeric_limits<double>::infinity();
  double growth = 1.0;
  for (const auto& row : rows) {
    const std::string tag = "(eps=" + std::to_string(row.eps) + ")";
    report.add("upper" + tag, row.upper);
    report.add("upper_at" + tag, row.upper_at);
    report.add("lower" + tag, row.lower);
    report.add("lower_at" + tag, row.lower_at);
    growth = std::max(growth, row.upper / rows.front().upper);
    if (row.lower_samples > 0) lower_min = std::min(lower_min, row.lower);
  }
  report.add("upper_growth", growth);
  report.add("lower_min", lower_min);
  if (!(growth <= options.max_upper_growth)) pass = false;
  if (!(lower_min >= options.min_lower)) pass = false;
  report.verdict = pass ? Verdict::Pass : Verdict::Fail;
  finish(report, watch);
  return report;
}

CoveringDiagnostic covering_diagnostic(double E, double theta_star, double rho, double alpha,
                                       double epsilon0, double m_bound_factor,
                                       std::int64_t search_bound) {
  CoveringDiagnostic out;
  out.E = E;
  out.theta_star = theta_star;
  out.rho = rho;
  out.record = find_resonances(theta_star, alpha, epsilon0, search_bound);
  const std::int64_t n = std::abs(out.record.last().k);
  const auto bound = static_cast<std::int64_t>(std::floor(m_bound_factor * static_cast<double>(n)));
  out.rotation_residual = std::numeric_limits<double>::infinity();
  for (std::int64_t a = 0; a <= bound; ++a) {
    for (std::int64_t m : {a, -a}) {
      const long double x = 2.0L * rho - static_cast<long double>(m) * alpha;
      const double r = static_cast<double>(std::fabs(x - std::nearbyint(x)));
      if (r < out.rotation_residual) {
        out.rotation_residual = r;
        out.m_best = m;
      }
      if (a == 0) break;
    }
  }
  return out;
}

double energy_for_rotation(const PotentialSpec& v, const Frequency& freq, double target,
                           std::int64_t n_steps, int phases) {
  double lo = -spectral_radius_bound(v) - 0.1, hi = spectral_radius_bound(v) + 0.1;
  for (int it = 0; it < 48; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (rotation_number(v, freq, mid, n_steps, phases).rho > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

ResonanceCheck verify_rotation_resonance(const PotentialSpec& v, const Frequency& freq,
                                         const std::vector<double>& energies,
                                         const ResonanceCheckOptions& options) {
  Stopwatch watch;
  ResonanceCheck out;
  auto& report = out.report;
  report.name = "rotation_resonance";
  report.config = base_config(v, freq);
  report.config["energies"] = energies;
  report.config["epsilon0"] = options.epsilon0;
  report.config["m_bound_factor"] = options.m_bound_factor;
  report.config["search_bound"] = options.search_bound;
  report.config["dual_L"] = options.dual_L;
  const double alpha = freq.alpha();

  for (double E : energies) {
    const auto dual = dual_bounded_solution(v, freq, E, options.dual_L);
    const double rho =
        rotation_number(v, freq, E, options.rotation_steps, options.rotation_phases).rho;
    out.diagnostics.push_back(covering_diagnostic(E, dual.theta_star, rho, alpha, options.epsilon0,
                                                  options.m_bound_factor, options.search_bound));
  }

  std::vector<double> n_values, log_residuals;
  for (const auto& d : out.diagnostics) {
    const double n = static_cast<double>(std::abs(d.record.last().k));
    const std::string tag = "(E=" + std::to_string(d.E) + ")";
    report.add("n_last" + tag, n);
    report.add("neg_log_residual" + tag, -std::log(d.rotation_residual));
    if (n > 0) {
      n_values.push_back(n);
      log_residuals.push_back(std::log(d.rotation_residual));
    }
  }
  report.add("resonant_samples", static_cast<double>(n_values.size()));

  const double target = alpha / 2.0;
  const double E_c = energy_for_rotation(v, freq, target, options.rotation_steps, options.rotation_phases);
  const double rho_c = rotation_number(v, freq, E_c, options.rotation_steps, options.rotation_phases).rho;
  out.constructed = covering_diagnostic(E_c, target, rho_c, alpha, options.epsilon0,
                                        options.m_bound_factor, options.search_bound);
  report.add("constructed_E", E_c);
  report.add("constructed_n1", static_cast<double>(out.constructed.record.resonances.size() > 1
                                                        ? out.constructed.record.resonances[1].k
                                                        : 0));
  report.add("constructed_m_best", static_cast<double>(out.constructed.m_best));
  report.add("constructed_residual", out.constructed.rotation_residual);
  const bool constructed_ok = out.constructed.rotation_residual <= options.constructed_tolerance;

  if (n_values.size() >= 3) {
    const double rho_s = spearman(n_values, log_residuals);
    report.add("spearman", rho_s);
    report.verdict = constructed_ok && rho_s <= options.correlation_limit ? Verdict::Pass : Verdict::Fail;
  } else {
    report.notes.push_back("fewer than three resonant samples; correlation not assessed");
    report.verdict = constructed_ok ? Verdict::Informational : Verdict::Fail;
  }
  finish(report, watch);
  return out;
}

ExperimentReport verify_duality(const PotentialSpec& v, const Frequency& freq,
                                const DualityCheckOptions& options) {
  Stopwatch watch;
  ExperimentReport report;
  report.name = "duality";
  report.config = base_config(v, freq);
  report.config["samples"] = options.samples;
  report.config["compare_L"] = options.compare_L;
  report.config["compare_phases"] = options.compare_phases;
  report.config["dual_L"] = options.dual_L;
  report.config["seed"] = options.seed;

  const auto comparison = dual_spectrum_compare(v, freq, options.compare_L, options.compare_phases);
  report.add("hausdorff", comparison.hausdorff);
  bool pass = comparison.hausdorff <= options.hausdorff_limit;

  double worst_abs = 0.0, worst_residual = 0.0;
  if (options.samples > 0) {
    for (double E : spectral_samples(v, freq, options.sample_L, options.samples, options.seed)) {
      const auto solution = dual_bounded_solution(v, freq, E, options.dual_L);
      const std::string tag = "(E=" + std::to_string(E) + ")";
      report.add("theta" + tag, solution.theta_star);
      report.add("max_abs" + tag, solution.max_abs);
      report.add("residual" + tag, solution.residual);
      worst_abs = std::max(worst_abs, solution.max_abs);
      worst_residual = std::max(worst_residual, solution.residual);
    }
  }
  report.add("worst_max_abs", worst_abs);
  report.add("worst_residual", worst_residual);
  if (worst_abs > options.max_abs_limit || worst_residual > options.residual_limit) pass = false;
  report.verdict = pass ? Verdict::Pass : Verdict::Fail;
  finish(report, watch);
  return report;
}

ExperimentReport verify_measure_bound(const PotentialSpec& v, const Frequency& freq,
                                      const MeasureCheckOptions& options) {
  Stopwatch watch;
  if (options.eps_list.empty()) throw std::invalid_argument("verify_measure_bound: empty eps list");
  ExperimentReport report;
  report.name = "measure_bound";
  report.config = base_config(v, freq);
  report.config["samples"] = options.samples;
  report.config["eps_list"] = options.eps_list;
  report.config["L"] = options.L;
  report.config["theta"] = options.theta;
  report.config["phase_count"] = options.phase_count;
  report.config["seed"] = options.seed;

  auto eps = options.eps_list;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  const double radius = spectral_radius_bound(v) + 0.1;
  const auto measure = spectral_measure(v, freq, options.theta, {-radius, radius}, options.L,
                                        MeasureMethod::EigenWeights);
  const auto energies = spectral_samples(v, freq, options.L, options.samples, options.seed);
  std::vector<std::int64_t> horizons;
  for (double e : eps) horizons.push_back(std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(1.0 / e))));

  std::vector<double> max_ratio(eps.size(), 0.0);
  bool finite = true;
  for (double E : energies) {
    const auto profile = growth_profile(Cocycle::schrodinger(v, freq.alpha(), E), horizons,
                                        options.phase_count);
    for (std::size_t i = 0; i < eps.size(); ++i) {
      const double ratio = measure_bound_check(measure, profile, E, eps[i]);
      report.add("ratio(E=" + std::to_string(E) + ",eps=" + std::to_string(eps[i]) + ")", ratio);
      if (!std::isfinite(ratio)) finite = false;
      max_ratio[i] = std::max(max_ratio[i], ratio);
    }
  }
  bool monotone = true;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    report.add("max_ratio(eps=" + std::to_string(eps[i]) + ")", max_ratio[i]);
    if (i > 0 && max_ratio[i] > max_ratio[i - 1]) monotone = false;
  }
  report.verdict = finite && monotone ? Verdict::Pass : Verdict::Fail;
  finish(report, watch);
  return report;
}

ExperimentReport ac_spectrum_proxy(const PotentialSpec& v, const Frequency& freq,
                                   const AcProxyOptions& options) {
  Stopwatch watch;
  ExperimentReport report;
  report.name = "ac_spectrum_proxy";
  report.config = base_config(v, freq);
  report.config["samples"] = options.samples;
  report.config["horizon"] = options.horizon;
  report.config["threshold_log"] = options.threshold_log;
  report.config["phase_count"] = options.phase_count;
  report.config["L"] = options.L;
  report.config["seed"] = options.seed;
  report.notes.push_back("finite-horizon boundedness proxy; absolute continuity itself is not decided");

  const auto energies = spectral_samples(v, freq, options.L, options.samples, options.seed);
  const double radius = spectral_radius_bound(v) + 0.1;
  const auto measure = spectral_measure(v, freq, 0.0, {-radius, radius}, options.L,
                                        MeasureMethod::EigenWeights);
  const auto ratio_horizon = static_cast<std::int64_t>(std::floor(1.0 / options.ratio_eps));
  int bounded = 0;
  for (double E : energies) {
    const auto profile = growth_profile(Cocycle::schrodinger(v, freq.alpha(), E), options.horizon,
                                        options.phase_count, options.checkpoints);
    const auto probe = boundedness_probe(profile, options.threshold_log);
    if (probe.bounded) ++bounded;
    const std::string tag = "(E=" + std::to_string(E) + ")";
    report.add("max_log" + tag, probe.max_log);
    if (profile.checkpoints.back().s >= ratio_horizon) {
      report.add("measure_ratio" + tag, measure_bound_check(measure, profile, E, options.ratio_eps));
    }
  }
  const double fraction = energies.empty() ? 0.0 : static_cast<double>(bounded) / energies.size();
  report.add("bounded_fraction", fraction);
  report.verdict = fraction >= options.min_fraction ? Verdict::Pass : Verdict::Fail;
  finish(report, watch);
  return report;
}

std::vector<ExperimentReport> run_all(const PotentialSpec& v, const Frequency& freq,
                                      const SuiteOptions& options) {
  const bool quick = options.quick;
  std::vector<ExperimentReport> reports;

  LyapunovCheckOptions lyapunov;
  lyapunov.seed = options.seed;
  lyapunov.lambda_max = std::max(lyapunov.lambda_max, std::abs(v.lambda()));
  if (quick) {
    lyapunov.samples = 5;
    lyapunov.n_steps = 50000;
  }
  reports.push_back(verify_zero_lyapunov(v, freq, lyapunov));

  const auto energies = spectral_samples(v, freq, 2000, quick ? 3 : 5, options.seed);
  GrowthCheckOptions growth;
  if (quick) growth.s_max = 10000;
  reports.push_back(verify_growth_bound(v, freq, energies, growth));

  HolderCheckOptions holder;
  if (quick) {
    holder.L = 1000;
    holder.phase_count = 8;
    holder.eps_list = {0.1, 0.05};
  }
  reports.push_back(verify_holder(v, freq, holder));

  ResonanceCheckOptions resonance;
  const auto resonance_energies = spectral_samples(v, freq, 2000, quick ? 4 : 30, options.seed);
  reports.push_back(verify_rotation_resonance(v, freq, resonance_energies, resonance).report);

  DualityCheckOptions duality;
  duality.seed = options.seed;
  if (quick) {
    duality.samples = 3;
    duality.dual_L = 201;
  }
  reports.push_back(verify_duality(v, freq, duality));

  MeasureCheckOptions measure;
  measure.seed = options.seed;
  if (quick) {
    measure.samples = 4;
    measure.phase_count = 16;
  }
  reports.push_back(verify_measure_bound(v, freq, measure));

  AcProxyOptions ac;
  ac.seed = options.seed;
  if (quick) {
    ac.samples = 5;
    ac.horizon = 10000;
  }
  reports.push_back(ac_spectrum_proxy(v, freq, ac));
  return reports;
}

nlohmann::json to_json(const CoveringDiagnostic& diagnostic) {
  return {{"E", diagnostic.E},
          {"theta_star", diagnostic.theta_star},
          {"rho", diagnostic.rho},
          {"resonances", to_json(diagnostic.record)},
          {"m_best", diagnostic.m_best},
          {"rotation_residual", diagnostic.rotation_residual}};
}

}  // namespace qpspec
