#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace oracle {

std::vector<double> jacobi_eigenvalues(Matrix a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    }
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i][i];
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> hermitian_eigenvalues(const CMatrix& h) {
  const std::size_t n = h.size();
  Matrix a(2 * n, std::vector<double>(2 * n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a[i][j] = a[i + n][j + n] = h[i][j].real();
      a[i + n][j] = h[i][j].imag();
      a[i][j + n] = -h[i][j].imag();
    }
  }
  // Every eigenvalue appears twice in the embedding.
  const auto doubled = jacobi_eigenvalues(std::move(a));
  std::vector<double> out;
  for (std::size_t i = 0; i < doubled.size(); i += 2) out.push_back(0.5 * (doubled[i] + doubled[i + 1]));
  return out;
}

double trig_poly(const Coeffs& c, double x) {
  std::complex<double> sum = 0.0;
  for (const auto& [k, ck] : c) sum += ck * std::polar(1.0, 2.0 * std::numbers::pi * k * x);
  return sum.real();
}

Matrix schrodinger_matrix(const Coeffs& c, double lambda, double alpha, double theta, int L,
                          std::int64_t first_site) {
  Matrix h(L, std::vector<double>(L, 0.0));
  for (int i = 0; i < L; ++i) {
    const auto n = static_cast<double>(first_site + i);
    h[i][i] = lambda * trig_poly(c, theta + n * alpha);
    if (i + 1 < L) h[i][i + 1] = h[i + 1][i] = 1.0;
  }
  return h;
}

CMatrix dual_matrix(const Coeffs& c, double lambda, double alpha, double theta, int L,
                    std::int64_t first_site) {
  CMatrix h(L, std::vector<std::complex<double>>(L, 0.0));
  for (int i = 0; i < L; ++i) {
    const auto n = static_cast<double>(first_site + i);
    for (int j = 0; j < L; ++j) {
      const auto it = c.find(i - j);
      if (it != c.end()) h[i][j] += lambda * it->second;
    }
    h[i][i] += 2.0 * std::cos(2.0 * std::numbers::pi * (theta + n * alpha));
  }
  return h;
}

double free_ids(double E) {
  if (E <= -2.0) return 0.0;
  if (E >= 2.0) return 1.0;
  return 1.0 - std::acos(E / 2.0) / std::numbers::pi;
}

double free_rotation(double E) {
  if (E <= -2.0) return 0.5;
  if (E >= 2.0) return 0.0;
  return std::acos(E / 2.0) / (2.0 * std::numbers::pi);
}

double free_lyapunov(double E) { return std::abs(E) <= 2.0 ? 0.0 : std::acosh(std::abs(E) / 2.0); }

std::vector<long long> textbook_quotients(const qpspec::BigFloat& x0, int depth) {
  qpspec::BigFloat x = x0;
  std::vector<long long> out;
  for (int i = 0; i < depth; ++i) {
    const qpspec::BigFloat inv = 1 / x;
    const qpspec::BigFloat a = floor(inv);
    out.push_back(a.convert_to<long long>());
    x = inv - a;
  }
  return out;
}

std::vector<BruteResonance> brute_resonances(double theta, double alpha, double eps0, std::int64_t K) {
  auto dist = [&](std::int64_t j) {
    const long double y = 2.0L * theta - static_cast<long double>(j) * alpha;
    return static_cast<double>(std::fabs(y - std::nearbyint(y)));
  };
  std::vector<BruteResonance> out{{0, dist(0)}};
  for (std::int64_t m = 1; m <= K; ++m) {
    for (std::int64_t k : {-m, m}) {
      const double d = dist(k);
      if (d > std::exp(-eps0 * static_cast<double>(m))) continue;
      double best = std::numeric_limits<double>::infinity();
      for (std::int64_t j = -m; j <= m; ++j) best = std::min(best, dist(j));
      if (d <= best) out.push_back({k, d});
    }
  }
  return out;
}

BruteDiophantine brute_diophantine(const qpspec::BigFloat& alpha, double kappa, double tau,
                                   std::int64_t K) {
  BruteDiophantine out{true, 0, std::numeric_limits<double>::infinity()};
  for (std::int64_t k = 1; k <= K; ++k) {
    qpspec::BigFloat y = alpha * k;
    y = abs(y - round(y));
    const double margin = std::log(y.convert_to<double>()) + tau * std::log(static_cast<double>(k)) - std::log(kappa);
    if (margin < out.log_margin) {
      out.log_margin = margin;
      out.worst_k = k;
    }
  }
  out.holds = out.log_margin > 0.0;
  return out;
}

qpspec::Mat2 plain_product(const Coeffs& c, double lambda, double alpha, double E, double x, int n) {
  double m[2][2] = {{1, 0}, {0, 1}};
  for (int s = 0; s < n; ++s) {
    const double a = E - lambda * trig_poly(c, x + s * alpha);
    const double r[2][2] = {{a * m[0][0] - m[1][0], a * m[0][1] - m[1][1]}, {m[0][0], m[0][1]}};
    std::copy(&r[0][0], &r[0][0] + 4, &m[0][0]);
  }
  return {m[0][0], m[0][1], m[1][0], m[1][1]};
}

double spearman_by_counting(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double below = 0, equal = 0;
      for (double w : v) {
        below += w < v[i];
        equal += w == v[i];
      }
      r[i] = below + (equal + 1.0) / 2.0;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += rx[i] / n, my += ry[i] / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace oracle
