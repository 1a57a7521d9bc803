#include "qpspec/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "qpspec/parallel.hpp"

namespace qpspec {
namespace {

const long double kPhaseStep = std::sqrt(3.0L) - 1.0L;

// Product state advanced one step at a time with periodic renormalization.
class Walker {
 public:
  Walker(const Cocycle& cocycle, double x, int stride)
      : cocycle_(cocycle), phase_(x), alpha_(cocycle.alpha()), stride_(stride) {}

  void step() {
    matrix_ = cocycle_(static_cast<double>(phase_)) * matrix_;
    phase_ += alpha_;
    if (phase_ >= 1.0L) phase_ -= 1.0L;
    if (++since_ == stride_) renormalize();
  }

  void renormalize() {
    since_ = 0;
    const double n = matrix_.norm();
    if (n == 0.0 || !std::isfinite(n)) throw std::overflow_error("cocycle product degenerated");
    matrix_ = matrix_.scaled(1.0 / n);
    log_scale_ += std::log(n);
  }

  double log_norm() const { return log_scale_ + std::log(matrix_.norm()); }
  const Mat2& matrix() const { return matrix_; }
  double log_scale() const { return log_scale_; }

 private:
  const Cocycle& cocycle_;
  Mat2 matrix_;
  double log_scale_ = 0.0;
  long double phase_;
  long double alpha_;
  int stride_;
  int since_ = 0;
};

}  // namespace

std::vector<double> phase_grid(int count, double x0) {
  if (count < 1) throw std::invalid_argument("phase_grid: count must be >= 1");
  std::vector<double> out(count);
  for (int j = 0; j < count; ++j) out[j] = wrap_phase(x0 + j * kPhaseStep);
  return out;
}

double wrap_phase(long double x) {
  long double r = x - std::floor(x);
  if (r >= 1.0L) r = 0.0L;
  return static_cast<double>(r);
}

Cocycle Cocycle::schrodinger(const PotentialSpec& v, double alpha, double energy) {
  Cocycle out;
  out.alpha_ = alpha;
  out.potential_ = std::make_shared<const PotentialSpec>(v);
  out.energy_ = energy;
  return out;
}

Cocycle::Cocycle(double alpha, Evaluator evaluator)
    : alpha_(alpha), evaluator_(std::move(evaluator)) {
  if (!evaluator_) throw std::invalid_argument("Cocycle: empty evaluator");
}

Mat2 schrodinger_step(const PotentialSpec& v, double energy, double x) {
  return {energy - v.coupled(x), -1.0, 1.0, 0.0};
}

double CocycleProduct::log_norm() const { return log_scale + std::log(matrix.norm()); }

CocycleProduct cocycle_product(const Cocycle& cocycle, double x, std::int64_t n, int stride) {
  if (n < 0) throw std::invalid_argument("cocycle_product: n must be >= 0");
  if (stride < 1) throw std::invalid_argument("cocycle_product: stride must be >= 1");
  Walker walker(cocycle, x, stride);
  for (std::int64_t i = 0; i < n; ++i) walker.step();
  return {walker.matrix(), walker.log_scale(), n, x};
}

CocycleProduct cocycle_product(const PotentialSpec& v, const Frequency& freq, double energy,
                               double x, std::int64_t n) {
  return cocycle_product(Cocycle::schrodinger(v, freq.alpha(), energy), x, n);
}

LyapunovEstimate lyapunov_exponent(const Cocycle& cocycle, std::int64_t n_steps, int n_phases) {
  if (n_steps < 1 || n_phases < 1) {
    throw std::invalid_argument("lyapunov_exponent: n_steps and n_phases must be >= 1");
  }
  const auto phases = phase_grid(n_phases);
  std::vector<double> rates(n_phases);
  parallel_for(n_phases, [&](std::size_t j) {
    rates[j] = cocycle_product(cocycle, phases[j], n_steps).log_norm() / static_cast<double>(n_steps);
  });
  const double mean = std::accumulate(rates.begin(), rates.end(), 0.0) / n_phases;
  double var = 0.0;
  for (double r : rates) var += (r - mean) * (r - mean);
  LyapunovEstimate out;
  out.n_steps = n_steps;
  out.n_phases = n_phases;
  out.stderr_value = n_phases > 1 ? std::sqrt(var / (n_phases - 1) / n_phases) : 0.0;
  if (mean < -1e-6) throw std::logic_error("lyapunov_exponent: negative estimate");
  out.value = std::max(0.0, mean);
  return out;
}

LyapunovEstimate lyapunov_exponent(const PotentialSpec& v, const Frequency& freq, double energy,
                                   std::int64_t n_steps, int n_phases) {
  return lyapunov_exponent(Cocycle::schrodinger(v, freq.alpha(), energy), n_steps, n_phases);
}

double GrowthProfile::running_sup_at(std::int64_t horizon) const {
  for (const auto& c : checkpoints) {
    if (c.s >= horizon) return c.running_sup;
  }
  throw std::out_of_range("growth profile does not reach s = " + std::to_string(horizon));
}

GrowthProfile growth_profile(const Cocycle& cocycle, std::int64_t s_max, int phase_count,
                             int checkpoints) {
  if (s_max < 1) throw std::invalid_argument("growth_profile: s_max must be >= 1");
  if (checkpoints < 1) throw std::invalid_argument("growth_profile: checkpoints must be >= 1");
  std::vector<std::int64_t> s_values;
  const double log_max = std::log(static_cast<double>(s_max));
  for (int i = 0; i < checkpoints; ++i) {
    const double t = checkpoints == 1 ? 1.0 : static_cast<double>(i) / (checkpoints - 1);
    s_values.push_back(std::llround(std::exp(t * log_max)));
  }
  s_values.back() = s_max;
  return growth_profile(cocycle, std::move(s_values), phase_count);
}

GrowthProfile growth_profile(const Cocycle& cocycle, std::vector<std::int64_t> s_values,
                             int phase_count) {
  if (phase_count < 1) throw std::invalid_argument("growth_profile: phase_count must be >= 1");
  std::sort(s_values.begin(), s_values.end());
  s_values.erase(std::unique(s_values.begin(), s_values.end()), s_values.end());
  if (s_values.empty() || s_values.front() < 1) {
    throw std::invalid_argument("growth_profile: checkpoints must be >= 1");
  }
  const auto phases = phase_grid(phase_count);
  const std::size_t m = s_values.size();
  std::vector<std::vector<double>> at(phase_count), running(phase_count);

  parallel_for(phase_count, [&](std::size_t j) {
    Walker walker(cocycle, phases[j], kRenormalizeStride);
    at[j].resize(m);
    running[j].resize(m);
    double sup = 0.0;
    std::int64_t s = 0;
    for (std::size_t i = 0; i < m; ++i) {
      while (s < s_values[i]) {
        walker.step();
        ++s;
        sup = std::max(sup, walker.log_norm());
      }
      at[j][i] = walker.log_norm();
      running[j][i] = sup;
    }
  });

  GrowthProfile out;
  out.phase_count = phase_count;
  for (std::size_t i = 0; i < m; ++i) {
    GrowthCheckpoint c;
    c.s = s_values[i];
    c.sup_log_norm = -std::numeric_limits<double>::infinity();
    c.running_sup = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < phase_count; ++j) {
      c.sup_log_norm = std::max(c.sup_log_norm, at[j][i]);
      c.running_sup = std::max(c.running_sup, running[j][i]);
    }
    out.checkpoints.push_back(c);
  }
  return out;
}

BoundednessResult boundedness_probe(const GrowthProfile& profile, double threshold_log) {
  BoundednessResult out;
  out.max_log = 0.0;
  for (const auto& c : profile.checkpoints) out.max_log = std::max(out.max_log, c.running_sup);
  out.bounded = out.max_log <= threshold_log;
  return out;
}

Cocycle conjugate_cocycle(std::function<Mat2(double)> B, const Cocycle& A, double det_tolerance) {
  if (!B) throw std::invalid_argument("conjugate_cocycle: empty conjugacy");
  constexpr int kVerifyPoints = 256;
  for (int i = 0; i < kVerifyPoints; ++i) {
    const double x = static_cast<double>(i) / kVerifyPoints;
    const double det = B(x).det();
    if (!(std::abs(det - 1.0) <= det_tolerance)) {
      throw std::invalid_argument("conjugate_cocycle: B is not unimodular (det B(" +
                                  std::to_string(x) + ") = " + std::to_string(det) + ")");
    }
  }
  const double alpha = A.alpha();
  return Cocycle(alpha, [B = std::move(B), A, alpha](double x) {
    return B(wrap_phase(static_cast<long double>(x) + alpha)).inverse() * A(x) * B(x);
  });
}

nlohmann::json to_json(const LyapunovEstimate& estimate) {
  return {{"value", estimate.value},
          {"n_steps", estimate.n_steps},
          {"n_phases", estimate.n_phases},
          {"stderr", estimate.stderr_value}};
}

nlohmann::json to_json(const GrowthProfile& profile) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& c : profile.checkpoints) {
    rows.push_back({{"s", c.s}, {"sup_log_norm", c.sup_log_norm}, {"running_sup", c.running_sup}});
  }
  return {{"phase_count", profile.phase_count}, {"checkpoints", rows}};
}

}  // namespace qpspec
