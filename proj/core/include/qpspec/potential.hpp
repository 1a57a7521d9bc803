#pragma once

#include <complex>
#include <limits>
#include <map>

#include <nlohmann/json.hpp>

namespace qpspec {

/// Real trigonometric polynomial v(x) = sum_k vhat_k e^{2 pi i k x} together
/// with the coupling lambda it is always paired with.
class PotentialSpec {
 public:
  using Coefficients = std::map<int, std::complex<double>>;

  PotentialSpec() = default;
  /// Throws std::invalid_argument unless vhat_{-k} = conj(vhat_k).
  PotentialSpec(double lambda, Coefficients coeffs,
                double eta_max = std::numeric_limits<double>::infinity());

  double lambda() const { return lambda_; }
  const Coefficients& coeffs() const { return coeffs_; }
  /// Largest |k| with a nonzero coefficient.
  int degree() const { return degree_; }
  double eta_max() const { return eta_max_; }
  std::complex<double> coeff(int k) const;

  /// v(x) without the coupling.
  double operator()(double x) const;
  /// lambda v(x).
  double coupled(double x) const { return lambda_ * (*this)(x); }

  PotentialSpec with_lambda(double lambda) const;

 private:
  double lambda_ = 0.0;
  Coefficients coeffs_;
  double eta_max_ = std::numeric_limits<double>::infinity();
  int degree_ = 0;
  // v(x) = c0 + sum_{k>0} 2 (re_k cos 2 pi k x - im_k sin 2 pi k x)
  double constant_ = 0.0;
  std::map<int, std::complex<double>> positive_;
};

/// v(x) = 2 cos 2 pi x.
PotentialSpec make_amo(double lambda);

/// Evaluates the complex Fourier sum and rejects an imaginary residue above
/// 1e-12 (corrupted coefficients).
double eval_potential(const PotentialSpec& v, double x);

/// sum_k |vhat_k| e^{2 pi eta |k|}, an upper bound for sup |v| on |Im x| < eta.
double strip_norm(const PotentialSpec& v, double eta);

nlohmann::json to_json(const PotentialSpec& v);
PotentialSpec potential_from_json(const nlohmann::json& j);

}  // namespace qpspec
