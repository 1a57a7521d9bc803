#pragma once

// Continued-fraction machinery for irrational frequencies: convergents,
// the exponential approximation rate beta(alpha), Diophantine checks and
// epsilon0-resonances of a phase.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>
#include <nlohmann/json.hpp>

namespace qpspec {

using BigInt = boost::multiprecision::mpz_int;
using BigFloat = boost::multiprecision::mpfr_float;

/// Default working precision for frequencies built from decimal input.
inline constexpr unsigned kDefaultPrecisionBits = 512;

struct Convergent {
  BigInt p;
  BigInt q;
};

/// An irrational frequency in (0,1) carried with its partial quotients
/// a_1..a_D and convergents p_k/q_k for k = 0..D, where (p_0, q_0) = (0, 1).
///
/// The value is kept at a precision large enough to resolve ||q_k alpha||
/// for every stored k.  Frequencies are immutable once built.
class Frequency {
 public:
  Frequency(std::vector<BigInt> quotients, BigFloat value, bool truncated);

  const BigFloat& value() const { return value_; }
  double alpha() const { return alpha_; }
  unsigned precision_bits() const { return precision_bits_; }

  /// Number of partial quotients D.
  int depth() const { return static_cast<int>(quotients_.size()); }
  bool truncated() const { return truncated_; }

  std::span<const BigInt> quotients() const { return quotients_; }
  /// Convergents indexed 0..D.
  std::span<const Convergent> convergents() const { return convergents_; }
  const Convergent& convergent(int k) const { return convergents_.at(k); }

 private:
  std::vector<BigInt> quotients_;
  std::vector<Convergent> convergents_;
  BigFloat value_;
  double alpha_ = 0.0;
  unsigned precision_bits_ = 0;
  bool truncated_ = false;
};

struct BetaEstimate {
  double beta_hat = 0.0;
  /// (k, ln q_{k+1} / q_k) for k = 0..D-1.
  std::vector<std::pair<int, double>> per_level;
  int depth_used = 0;
};

struct DiophantineResult {
  bool holds = true;
  BigInt worst_k;
  /// min over checked k of ln(||k alpha|| |k|^tau / kappa); negative iff the
  /// condition fails somewhere.
  double log_margin = 0.0;
  /// Largest k covered by the check (min(K, q_D - 1)).
  BigInt checked_up_to;
};

struct Resonance {
  std::int64_t k = 0;
  double dist = 0.0;
};

struct ResonanceRecord {
  double theta = 0.0;
  double epsilon0 = 0.0;
  std::vector<Resonance> resonances;
  std::int64_t search_bound = 0;

  /// The resonance of largest |k| (n_0 = 0 when theta is non-resonant).
  const Resonance& last() const { return resonances.back(); }
};

double torus_distance(double x);
BigFloat torus_distance(const BigFloat& x);

/// Parses a decimal string into a BigFloat at the given precision.
BigFloat parse_real(const std::string& decimal, unsigned precision_bits = kDefaultPrecisionBits);

/// Expands x in (0,1) to at most `depth` partial quotients.  Quotients are
/// emitted only while they are determined by x to within one ulp; when the
/// precision runs out the result is flagged truncated.  Throws
/// std::domain_error("rational frequency") if x is rational to working
/// precision.
Frequency continued_fraction(const BigFloat& x, int depth);

/// Liouville-type frequency with beta(alpha) = beta_target.  After the seed,
/// each quotient is the smallest a_{k+1} >= 1 with q_{k+1} >= exp(beta q_k),
/// so ln q_{k+1} / q_k -> beta.  Throws std::length_error naming the largest
/// attainable depth when q would exceed `max_bits`.
Frequency build_frequency_with_beta(double beta_target, int depth,
                                    std::vector<std::int64_t> seed = {1, 1},
                                    unsigned max_bits = 1u << 20);

BetaEstimate beta_estimate(const Frequency& freq, int tail_window = 5);

/// Checks ||k alpha|| > kappa |k|^-tau for 0 < |k| <= K.  Minima of
/// ||k alpha|| |k|^tau over a range are attained at convergent denominators,
/// so only q_n < q_D are visited; the scan is exact for K < q_D.
DiophantineResult diophantine_check(const Frequency& freq, double kappa, double tau,
                                    const BigInt& K);

/// epsilon0-resonances of theta for |k| <= K, ordered by (|k|, k).
ResonanceRecord find_resonances(double theta, double alpha, double epsilon0, std::int64_t K);
inline ResonanceRecord find_resonances(double theta, const Frequency& freq, double epsilon0,
                                       std::int64_t K) {
  return find_resonances(theta, freq.alpha(), epsilon0, K);
}

/// Natural log of a positive big integer.
double log_big(const BigInt& x);

namespace presets {
Frequency golden(int depth = 40, unsigned precision_bits = kDefaultPrecisionBits);
Frequency silver(int depth = 40, unsigned precision_bits = kDefaultPrecisionBits);
Frequency e_minus_two(int depth = 30, unsigned precision_bits = kDefaultPrecisionBits);
/// build_frequency_with_beta(0.5, 7, {1, 1}): q = 1,1,2,3,5,13,668,~e^334.
Frequency beta_half();
}  // namespace presets

/// {value_decimal, quotients, convergents, precision_bits, truncated}; big
/// integers are strings so they survive the round trip exactly.
nlohmann::json to_json(const Frequency& freq);
Frequency frequency_from_json(const nlohmann::json& j);

nlohmann::json to_json(const BetaEstimate& beta);
nlohmann::json to_json(const ResonanceRecord& record);

}  // namespace qpspec
