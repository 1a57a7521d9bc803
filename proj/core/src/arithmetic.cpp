#include "qpspec/arithmetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <gmp.h>
#include <mpfr.h>

namespace qpspec {
namespace {

// Raw MPFR value with explicit precision.  Boost's variable-precision
// expression templates pick up the thread default precision for
// temporaries, so arithmetic that must stay at a chosen precision goes
// through the C API.
class Mpfr {
 public:
  explicit Mpfr(mpfr_prec_t bits) { mpfr_init2(v_, bits); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;
  ~Mpfr() { mpfr_clear(v_); }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

 private:
  mpfr_t v_;
};

class Mpq {
 public:
  Mpq() { mpq_init(v_); }
  Mpq(const Mpq&) = delete;
  Mpq& operator=(const Mpq&) = delete;
  ~Mpq() { mpq_clear(v_); }

  mpq_ptr get() { return v_; }
  mpq_srcptr get() const { return v_; }

 private:
  mpq_t v_;
};

BigFloat to_big_float(mpfr_srcptr x) {
  BigFloat out;
  out.backend() = x;
  return out;
}

unsigned bit_length(const BigInt& x) {
  return static_cast<unsigned>(mpz_sizeinbase(x.backend().data(), 2));
}

// floor(1/r) for r > 0.
BigInt floor_reciprocal(mpq_srcptr r) {
  BigInt out;
  mpz_fdiv_q(out.backend().data(), mpq_denref(r), mpq_numref(r));
  return out;
}

// r <- 1/r - a
void reciprocal_minus(mpq_ptr r, const BigInt& a) {
  mpq_inv(r, r);
  Mpq aq;
  mpq_set_z(aq.get(), a.backend().data());
  mpq_sub(r, r, aq.get());
}

std::vector<Convergent> convergents_of(const std::vector<BigInt>& quotients) {
  std::vector<Convergent> out;
  out.reserve(quotients.size() + 1);
  BigInt p_prev = 1, q_prev = 0;  // k = -1
  BigInt p = 0, q = 1;            // k = 0
  out.push_back({p, q});
  for (const BigInt& a : quotients) {
    BigInt p_next = a * p + p_prev;
    BigInt q_next = a * q + q_prev;
    p_prev = std::move(p);
    q_prev = std::move(q);
    p = std::move(p_next);
    q = std::move(q_next);
    out.push_back({p, q});
  }
  return out;
}

// ln(log_big(num) / den) without converting den to double.
double log_ratio_of_logs(const BigInt& num, const BigInt& den) {
  return std::log(log_big(num)) - log_big(den);
}

}  // namespace

Frequency::Frequency(std::vector<BigInt> quotients, BigFloat value, bool truncated)
    : quotients_(std::move(quotients)), value_(std::move(value)), truncated_(truncated) {
  for (const BigInt& a : quotients_) {
    if (a < 1) throw std::invalid_argument("partial quotients must be positive");
  }
  convergents_ = convergents_of(quotients_);
  precision_bits_ = static_cast<unsigned>(mpfr_get_prec(value_.backend().data()));
  alpha_ = mpfr_get_d(value_.backend().data(), MPFR_RNDN);
  if (!(alpha_ > 0.0 && alpha_ < 1.0)) {
    throw std::invalid_argument("frequency value must lie in (0,1)");
  }
}

double log_big(const BigInt& x) {
  if (x <= 0) throw std::domain_error("log_big: argument must be positive");
  long exponent = 0;
  const double mantissa = mpz_get_d_2exp(&exponent, x.backend().data());
  return std::log(mantissa) + static_cast<double>(exponent) * std::numbers::ln2;
}

double torus_distance(double x) { return std::abs(x - std::nearbyint(x)); }

BigFloat torus_distance(const BigFloat& x) {
  mpfr_srcptr src = x.backend().data();
  Mpfr nearest(mpfr_get_prec(src));
  mpfr_rint(nearest.get(), src, MPFR_RNDN);
  Mpfr diff(mpfr_get_prec(src));
  mpfr_sub(diff.get(), src, nearest.get(), MPFR_RNDN);
  mpfr_abs(diff.get(), diff.get(), MPFR_RNDN);
  return to_big_float(diff.get());
}

BigFloat parse_real(const std::string& decimal, unsigned precision_bits) {
  Mpfr x(precision_bits);
  if (mpfr_set_str(x.get(), decimal.c_str(), 10, MPFR_RNDN) != 0) {
    throw std::invalid_argument("not a decimal number: " + decimal);
  }
  return to_big_float(x.get());
}

Frequency continued_fraction(const BigFloat& x, int depth) {
  if (depth < 1) throw std::invalid_argument("continued_fraction: depth must be >= 1");
  mpfr_srcptr src = x.backend().data();
  if (!(mpfr_cmp_ui(src, 0) > 0 && mpfr_cmp_ui(src, 1) < 0)) {
    throw std::invalid_argument("continued_fraction: x must lie in (0,1)");
  }

  // x = mantissa * 2^exponent exactly; one ulp is 2^exponent.
  BigInt mantissa;
  const mpfr_exp_t exponent = mpfr_get_z_2exp(mantissa.backend().data(), src);
  Mpq r, lo, hi, ulp;
  mpq_set_z(r.get(), mantissa.backend().data());
  mpq_set_ui(ulp.get(), 1, 1);
  if (exponent < 0) {
    mpq_div_2exp(r.get(), r.get(), static_cast<mp_bitcnt_t>(-exponent));
    mpq_div_2exp(ulp.get(), ulp.get(), static_cast<mp_bitcnt_t>(-exponent));
  } else {
    mpq_mul_2exp(r.get(), r.get(), static_cast<mp_bitcnt_t>(exponent));
    mpq_mul_2exp(ulp.get(), ulp.get(), static_cast<mp_bitcnt_t>(exponent));
  }
  mpq_sub(lo.get(), r.get(), ulp.get());
  mpq_add(hi.get(), r.get(), ulp.get());

  std::vector<BigInt> quotients;
  bool truncated = false;
  for (int k = 0; k < depth; ++k) {
    const BigInt a = floor_reciprocal(r.get());
    reciprocal_minus(r.get(), a);
    if (mpq_sgn(r.get()) == 0) throw std::domain_error("rational frequency");
    // The quotient is reliable only if every point of [lo, hi] agrees on it.
    if (mpq_sgn(lo.get()) <= 0 || floor_reciprocal(hi.get()) != a ||
        floor_reciprocal(lo.get()) != a) {
      truncated = true;
      break;
    }
    quotients.push_back(a);
    // t -> 1/t - a is decreasing, so the interval endpoints swap.
    reciprocal_minus(lo.get(), a);
    reciprocal_minus(hi.get(), a);
    mpq_swap(lo.get(), hi.get());
  }
  if (quotients.empty()) truncated = true;
  return Frequency(std::move(quotients), x, truncated);
}

Frequency build_frequency_with_beta(double beta_target, int depth,
                                    std::vector<std::int64_t> seed, unsigned max_bits) {
  if (!(beta_target > 0.0) || !std::isfinite(beta_target)) {
    throw std::invalid_argument("build_frequency_with_beta: beta_target must be positive");
  }
  if (depth < 1) throw std::invalid_argument("build_frequency_with_beta: depth must be >= 1");
  if (seed.empty()) throw std::invalid_argument("build_frequency_with_beta: empty seed");

  std::vector<BigInt> quotients;
  for (std::size_t i = 0; i < seed.size() && static_cast<int>(i) < depth; ++i) {
    if (seed[i] < 1) throw std::invalid_argument("build_frequency_with_beta: seed quotients must be >= 1");
    quotients.emplace_back(seed[i]);
  }

  while (static_cast<int>(quotients.size()) < depth) {
    const auto conv = convergents_of(quotients);
    const BigInt& q = conv.back().q;
    const BigInt& q_prev = conv[conv.size() - 2].q;
    // exp(beta q) needs about beta q / ln 2 integer bits.
    const double log_bits = std::log(beta_target / std::numbers::ln2) + log_big(q);
    if (log_bits > std::log(static_cast<double>(max_bits))) {
      throw std::length_error("build_frequency_with_beta: q would exceed " +
                              std::to_string(max_bits) + " bits; maximal attainable depth is " +
                              std::to_string(quotients.size()));
    }
    const auto bits = static_cast<mpfr_prec_t>(std::exp(log_bits)) + bit_length(q) + 128;

    Mpfr t(bits);
    mpfr_set_z(t.get(), q.backend().data(), MPFR_RNDN);
    mpfr_mul_d(t.get(), t.get(), beta_target, MPFR_RNDN);
    mpfr_exp(t.get(), t.get(), MPFR_RNDU);
    mpfr_sub_z(t.get(), t.get(), q_prev.backend().data(), MPFR_RNDU);
    mpfr_div_z(t.get(), t.get(), q.backend().data(), MPFR_RNDU);
    mpfr_ceil(t.get(), t.get());
    BigInt a;
    mpfr_get_z(a.backend().data(), t.get(), MPFR_RNDN);
    if (a < 1) a = 1;
    quotients.push_back(std::move(a));
  }

  // alpha = (p_D y + p_{D-1}) / (q_D y + q_{D-1}) with y the complete quotient
  // the construction would produce next; y is astronomically large once
  // beta q_D is, in which case 2^(precision) stands in for it.
  const auto conv = convergents_of(quotients);
  const Convergent& last = conv.back();
  const Convergent& prev = conv[conv.size() - 2];
  const mpfr_prec_t precision = std::max<mpfr_prec_t>(256, 2 * bit_length(last.q) + 64);
  Mpfr y(precision);
  const double exponent = beta_target * mpz_get_d(last.q.backend().data());
  if (exponent < 0.5 * static_cast<double>(precision) * std::numbers::ln2) {
    mpfr_set_z(y.get(), last.q.backend().data(), MPFR_RNDN);
    mpfr_mul_d(y.get(), y.get(), beta_target, MPFR_RNDN);
    mpfr_exp(y.get(), y.get(), MPFR_RNDN);
    mpfr_div_z(y.get(), y.get(), last.q.backend().data(), MPFR_RNDN);
  } else {
    mpfr_set_ui_2exp(y.get(), 1, precision, MPFR_RNDN);
  }
  Mpfr num(precision), den(precision);
  mpfr_mul_z(num.get(), y.get(), last.p.backend().data(), MPFR_RNDN);
  mpfr_add_z(num.get(), num.get(), prev.p.backend().data(), MPFR_RNDN);
  mpfr_mul_z(den.get(), y.get(), last.q.backend().data(), MPFR_RNDN);
  mpfr_add_z(den.get(), den.get(), prev.q.backend().data(), MPFR_RNDN);
  mpfr_div(num.get(), num.get(), den.get(), MPFR_RNDN);
  return Frequency(std::move(quotients), to_big_float(num.get()), false);
}

BetaEstimate beta_estimate(const Frequency& freq, int tail_window) {
  if (tail_window < 1) throw std::invalid_argument("beta_estimate: tail_window must be >= 1");
  if (freq.depth() < tail_window) {
    throw std::invalid_argument("beta_estimate: too few levels (" + std::to_string(freq.depth()) +
                                " quotients for a window of " + std::to_string(tail_window) + ")");
  }
  BetaEstimate out;
  out.depth_used = freq.depth();
  const auto conv = freq.convergents();
  for (int k = 0; k + 1 < static_cast<int>(conv.size()); ++k) {
    const BigInt& q = conv[k].q;
    const BigInt& q_next = conv[k + 1].q;
    const double value = q_next == 1 ? 0.0 : std::exp(log_ratio_of_logs(q_next, q));
    out.per_level.emplace_back(k, value);
  }
  out.beta_hat = 0.0;
  for (auto it = out.per_level.end() - tail_window; it != out.per_level.end(); ++it) {
    out.beta_hat = std::max(out.beta_hat, it->second);
  }
  return out;
}

DiophantineResult diophantine_check(const Frequency& freq, double kappa, double tau,
                                    const BigInt& K) {
  if (K < 1) throw std::invalid_argument("diophantine_check: K must be >= 1");
  if (!(kappa > 0.0) || !(tau > 0.0)) {
    throw std::invalid_argument("diophantine_check: kappa and tau must be positive");
  }
  DiophantineResult out;
  const auto conv = freq.convergents();
  const BigInt& q_last = conv.back().q;
  out.checked_up_to = K < q_last ? K : BigInt(q_last - 1);
  out.log_margin = std::numeric_limits<double>::infinity();

  const mpfr_prec_t precision = freq.precision_bits();
  Mpfr prod(precision), nearest(precision);
  const double log_kappa = std::log(kappa);
  for (std::size_t n = 0; n + 1 < conv.size(); ++n) {
    const BigInt& q = conv[n].q;
    if (q > out.checked_up_to) break;
    mpfr_mul_z(prod.get(), freq.value().backend().data(), q.backend().data(), MPFR_RNDN);
    mpfr_rint(nearest.get(), prod.get(), MPFR_RNDN);
    mpfr_sub(prod.get(), prod.get(), nearest.get(), MPFR_RNDN);
    mpfr_abs(prod.get(), prod.get(), MPFR_RNDN);
    if (mpfr_zero_p(prod.get())) {
      throw std::domain_error("diophantine_check: ||q alpha|| vanished at working precision");
    }
    mpfr_log(prod.get(), prod.get(), MPFR_RNDN);
    const double log_dist = mpfr_get_d(prod.get(), MPFR_RNDN);
    const double margin = log_dist + tau * log_big(q) - log_kappa;
    if (margin < out.log_margin) {
      out.log_margin = margin;
      out.worst_k = q;
    }
  }
  out.holds = out.log_margin > 0.0;
  return out;
}

ResonanceRecord find_resonances(double theta, double alpha, double epsilon0, std::int64_t K) {
  if (!(epsilon0 > 0.0)) throw std::invalid_argument("find_resonances: epsilon0 must be positive");
  if (K < 0) throw std::invalid_argument("find_resonances: K must be >= 0");

  auto dist = [](long double x) {
    return static_cast<double>(std::fabs(x - std::nearbyint(x)));
  };
  const long double two_theta = 2.0L * static_cast<long double>(theta);
  const long double a = alpha;

  ResonanceRecord out;
  out.theta = theta;
  out.epsilon0 = epsilon0;
  out.search_bound = K;
  double running_min = dist(two_theta);
  out.resonances.push_back({0, running_min});
  for (std::int64_t m = 1; m <= K; ++m) {
    const long double shift = static_cast<long double>(m) * a;
    const double d_minus = dist(two_theta + shift);  // k = -m
    const double d_plus = dist(two_theta - shift);   // k = +m
    running_min = std::min({running_min, d_minus, d_plus});
    const double bound = std::exp(-epsilon0 * static_cast<double>(m));
    if (d_minus <= bound && d_minus <= running_min) out.resonances.push_back({-m, d_minus});
    if (d_plus <= bound && d_plus <= running_min) out.resonances.push_back({m, d_plus});
  }
  return out;
}

namespace presets {
namespace {

Frequency from_mpfr(mpfr_srcptr x, int depth) { return continued_fraction(to_big_float(x), depth); }

}  // namespace

Frequency golden(int depth, unsigned precision_bits) {
  Mpfr x(precision_bits);
  mpfr_sqrt_ui(x.get(), 5, MPFR_RNDN);
  mpfr_sub_ui(x.get(), x.get(), 1, MPFR_RNDN);
  mpfr_div_2ui(x.get(), x.get(), 1, MPFR_RNDN);
  return from_mpfr(x.get(), depth);
}

Frequency silver(int depth, unsigned precision_bits) {
  Mpfr x(precision_bits);
  mpfr_sqrt_ui(x.get(), 2, MPFR_RNDN);
  mpfr_sub_ui(x.get(), x.get(), 1, MPFR_RNDN);
  return from_mpfr(x.get(), depth);
}

Frequency e_minus_two(int depth, unsigned precision_bits) {
  Mpfr x(precision_bits);
  mpfr_set_ui(x.get(), 1, MPFR_RNDN);
  mpfr_exp(x.get(), x.get(), MPFR_RNDN);
  mpfr_sub_ui(x.get(), x.get(), 2, MPFR_RNDN);
  return from_mpfr(x.get(), depth);
}

Frequency beta_half() { return build_frequency_with_beta(0.5, 7, {1, 1}); }

}  // namespace presets

nlohmann::json to_json(const Frequency& freq) {
  mpfr_srcptr v = freq.value().backend().data();
  const int digits = static_cast<int>(std::ceil(freq.precision_bits() * std::log10(2.0))) + 2;
  char* text = nullptr;
  mpfr_asprintf(&text, "%.*Rf", digits, v);
  std::string decimal(text);
  mpfr_free_str(text);

  nlohmann::json quotients = nlohmann::json::array();
  for (const BigInt& a : freq.quotients()) quotients.push_back(a.str());
  nlohmann::json convergents = nlohmann::json::array();
  for (const Convergent& c : freq.convergents().subspan(1)) {
    convergents.push_back({c.p.str(), c.q.str()});
  }
  return {{"value_decimal", decimal},
          {"quotients", quotients},
          {"convergents", convergents},
          {"precision_bits", freq.precision_bits()},
          {"truncated", freq.truncated()}};
}

Frequency frequency_from_json(const nlohmann::json& j) {
  const std::string decimal = j.at("value_decimal").get<std::string>();
  unsigned bits = 0;
  if (j.contains("precision_bits")) {
    bits = j.at("precision_bits").get<unsigned>();
  } else {
    bits = static_cast<unsigned>(std::ceil(static_cast<double>(decimal.size()) * std::log2(10.0)));
  }
  std::vector<BigInt> quotients;
  for (const auto& a : j.at("quotients")) quotients.emplace_back(a.get<std::string>());
  Frequency freq(std::move(quotients), parse_real(decimal, bits), j.value("truncated", false));
  if (j.contains("convergents")) {
    const auto& stored = j.at("convergents");
    const auto conv = freq.convergents().subspan(1);
    if (stored.size() != conv.size()) {
      throw std::invalid_argument("frequency json: convergent count does not match quotients");
    }
    for (std::size_t k = 0; k < conv.size(); ++k) {
      if (BigInt(stored[k].at(0).get<std::string>()) != conv[k].p ||
          BigInt(stored[k].at(1).get<std::string>()) != conv[k].q) {
        throw std::invalid_argument("frequency json: convergents inconsistent with quotients");
      }
    }
  }
  return freq;
}

nlohmann::json to_json(const BetaEstimate& beta) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& [k, value] : beta.per_level) levels.push_back({{"k", k}, {"value", value}});
  return {{"beta_hat", beta.beta_hat}, {"depth_used", beta.depth_used}, {"per_level", levels}};
}

nlohmann::json to_json(const ResonanceRecord& record) {
  nlohmann::json list = nlohmann::json::array();
  for (const Resonance& r : record.resonances) list.push_back({{"k", r.k}, {"dist", r.dist}});
  return {{"theta", record.theta},
          {"epsilon0", record.epsilon0},
          {"search_bound", record.search_bound},
          {"resonances", list}};
}

}  // namespace qpspec
