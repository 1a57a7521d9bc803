#include "qpspec/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qpspec {

PotentialSpec::PotentialSpec(double lambda, Coefficients coeffs, double eta_max)
    : lambda_(lambda), eta_max_(eta_max) {
  for (const auto& [k, c] : coeffs) {
    if (c == std::complex<double>{}) continue;
    coeffs_[k] = c;
  }
  for (const auto& [k, c] : coeffs_) {
    auto it = coeffs_.find(-k);
    const std::complex<double> partner = it == coeffs_.end() ? std::complex<double>{} : it->second;
    const double scale = std::max(1.0, std::abs(c));
    if (std::abs(partner - std::conj(c)) > 1e-12 * scale) {
      throw std::invalid_argument("potential coefficients must satisfy vhat_{-k} = conj(vhat_k) (k = " +
                                  std::to_string(k) + ")");
    }
    degree_ = std::max(degree_, std::abs(k));
    if (k == 0) constant_ = c.real();
    if (k > 0) positive_[k] = c;
  }
  if (!(eta_max_ > 0.0)) throw std::invalid_argument("eta_max must be positive");
}

std::complex<double> PotentialSpec::coeff(int k) const {
  auto it = coeffs_.find(k);
  return it == coeffs_.end() ? std::complex<double>{} : it->second;
}

double PotentialSpec::operator()(double x) const {
  double sum = constant_;
  for (const auto& [k, c] : positive_) {
    const double phase = 2.0 * std::numbers::pi * k * x;
    sum += 2.0 * (c.real() * std::cos(phase) - c.imag() * std::sin(phase));
  }
  return sum;
}

PotentialSpec PotentialSpec::with_lambda(double lambda) const {
  PotentialSpec out = *this;
  out.lambda_ = lambda;
  return out;
}

PotentialSpec make_amo(double lambda) { return PotentialSpec(lambda, {{-1, 1.0}, {1, 1.0}}); }

double eval_potential(const PotentialSpec& v, double x) {
  std::complex<double> sum;
  double magnitude = 0.0;
  for (const auto& [k, c] : v.coeffs()) {
    sum += c * std::polar(1.0, 2.0 * std::numbers::pi * k * x);
    magnitude += std::abs(c);
  }
  if (std::abs(sum.imag()) > 1e-12 * std::max(1.0, magnitude)) {
    throw std::domain_error("potential evaluates to a non-real value (corrupted coefficients)");
  }
  return sum.real();
}

double strip_norm(const PotentialSpec& v, double eta) {
  if (eta < 0.0) throw std::invalid_argument("strip_norm: eta must be nonnegative");
  double sum = 0.0;
  for (const auto& [k, c] : v.coeffs()) {
    sum += std::abs(c) * std::exp(2.0 * std::numbers::pi * eta * std::abs(k));
  }
  return sum;
}

nlohmann::json to_json(const PotentialSpec& v) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& [k, c] : v.coeffs()) {
    coeffs.push_back({{"k", k}, {"re", c.real()}, {"im", c.imag()}});
  }
  nlohmann::json out = {{"lambda", v.lambda()}, {"coeffs", coeffs}};
  if (std::isfinite(v.eta_max())) out["eta_max"] = v.eta_max();
  return out;
}

PotentialSpec potential_from_json(const nlohmann::json& j) {
  PotentialSpec::Coefficients coeffs;
  for (const auto& entry : j.at("coeffs")) {
    const int k = entry.at("k").get<int>();
    const std::complex<double> c(entry.value("re", 0.0), entry.value("im", 0.0));
    if (!coeffs.emplace(k, c).second) {
      throw std::invalid_argument("potential json: duplicate coefficient k = " + std::to_string(k));
    }
  }
  const double eta = j.contains("eta_max") ? j.at("eta_max").get<double>()
                                           : std::numeric_limits<double>::infinity();
  return PotentialSpec(j.value("lambda", 0.0), std::move(coeffs), eta);
}

}  // namespace qpspec
