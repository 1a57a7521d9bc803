#include "banded.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include <lapacke.h>

namespace qpspec::detail {
namespace {

std::optional<std::int64_t> sturm_count(const TruncatedOperator& op, double E) {
  const int n = op.size();
  const std::complex<double>* off = op.bands.empty() ? nullptr : op.bands[0].data();
  std::int64_t count = 0;
  double pivot = 1.0;
  for (int i = 0; i < n; ++i) {
    double p = op.diagonal[i] - E;
    if (i > 0 && off) p -= std::norm(off[i - 1]) / pivot;
    // Tiny pivots still give the correct inertia; only an exact breakdown
    // needs the jittered retry.
    if (std::abs(p) < std::numeric_limits<double>::min()) return std::nullopt;
    if (p < 0.0) ++count;
    pivot = p;
  }
  return count;
}

// LDL^H of a Hermitian band matrix without pivoting; the signs of D give the
// inertia (Sylvester).
std::optional<std::int64_t> band_ldl_count(const TruncatedOperator& op, double E) {
  const int n = op.size();
  const int d = op.band_width();
  const double scale = std::max(1.0, op.gershgorin_bound());
  // low[k][m] = W(m + k, m) for the working lower band.
  std::vector<std::vector<std::complex<double>>> low(d + 1);
  low[0].resize(n);
  for (int i = 0; i < n; ++i) low[0][i] = op.diagonal[i] - E;
  for (int k = 1; k <= d; ++k) {
    low[k].resize(n - k > 0 ? n - k : 0);
    for (int m = 0; m + k < n; ++m) low[k][m] = std::conj(op.bands[k - 1][m]);
  }
  std::int64_t count = 0;
  for (int i = 0; i < n; ++i) {
    const double p = low[0][i].real();
    if (std::abs(p) < 1e-14 * scale) return std::nullopt;
    if (p < 0.0) ++count;
    const int last = std::min(n - 1, i + d);
    for (int k = i + 1; k <= last; ++k) {
      const std::complex<double> w_ki = low[k - i][i];
      if (w_ki == std::complex<double>{}) continue;
      for (int m = i + 1; m <= k; ++m) {
        low[k - m][m] -= w_ki * std::conj(low[m - i][i]) / p;
      }
    }
  }
  return count;
}

void check_info(lapack_int info, const char* routine) {
  if (info != 0) {
    throw std::runtime_error(std::string(routine) + " failed with info = " + std::to_string(info));
  }
}

}  // namespace

std::optional<std::int64_t> inertia_below(const TruncatedOperator& op, double E) {
  if (op.band_width() <= 1) return sturm_count(op, E);
  return band_ldl_count(op, E);
}

std::vector<double> all_eigenvalues(const TruncatedOperator& op) {
  const int n = op.size();
  if (n == 0) return {};
  if (op.is_real() && op.band_width() <= 1) {
    std::vector<double> d = op.diagonal, e(std::max(n - 1, 1), 0.0), w(n);
    for (int i = 0; i + 1 < n; ++i) e[i] = op.bands[0][i].real();
    std::vector<lapack_int> support(2 * n);
    lapack_int found = 0;
    check_info(LAPACKE_dstevr(LAPACK_COL_MAJOR, 'N', 'A', n, d.data(), e.data(), 0.0, 0.0, 0, 0,
                              0.0, &found, w.data(), nullptr, 1, support.data()),
               "dstevr");
    w.resize(found);
    return w;
  }
  const int kd = op.band_width();
  const int ldab = kd + 1;
  std::vector<double> w(n);
  if (op.is_real()) {
    // Upper band storage: ab[kd + i - j + j * ldab] = H(i, j).
    std::vector<double> ab(static_cast<std::size_t>(ldab) * n, 0.0);
    for (int j = 0; j < n; ++j) {
      ab[kd + j * ldab] = op.diagonal[j];
      for (int k = 1; k <= kd && j - k >= 0; ++k) ab[kd - k + j * ldab] = op.bands[k - 1][j - k].real();
    }
    check_info(LAPACKE_dsbev(LAPACK_COL_MAJOR, 'N', 'U', n, kd, ab.data(), ldab, w.data(), nullptr, 1),
               "dsbev");
  } else {
    std::vector<lapack_complex_double> ab(static_cast<std::size_t>(ldab) * n);
    for (auto& x : ab) x = lapack_make_complex_double(0.0, 0.0);
    for (int j = 0; j < n; ++j) {
      ab[kd + j * ldab] = lapack_make_complex_double(op.diagonal[j], 0.0);
      for (int k = 1; k <= kd && j - k >= 0; ++k) {
        const auto h = op.bands[k - 1][j - k];
        ab[kd - k + j * ldab] = lapack_make_complex_double(h.real(), h.imag());
      }
    }
    check_info(LAPACKE_zhbev(LAPACK_COL_MAJOR, 'N', 'U', n, kd, ab.data(), ldab, w.data(), nullptr, 1),
               "zhbev");
  }
  return w;
}

EigenPairs real_eigenpairs(const TruncatedOperator& op, int il, int iu) {
  if (!op.is_real()) throw std::invalid_argument("real_eigenpairs: operator has complex bands");
  const int n = op.size();
  if (il < 1 || iu > n || il > iu) throw std::invalid_argument("real_eigenpairs: bad index range");
  const int m = iu - il + 1;
  EigenPairs out;
  out.values.resize(n);
  out.vectors.resize(static_cast<std::size_t>(n) * m);
  lapack_int found = 0;
  const char range = (il == 1 && iu == n) ? 'A' : 'I';
  if (op.band_width() <= 1 && range == 'I') {
    // Bisection plus inverse iteration is far cheaper than a full MRRR
    // solve when only a few eigenpairs are wanted.
    std::vector<double> d = op.diagonal, e(std::max(n - 1, 1), 0.0);
    for (int i = 0; i + 1 < n; ++i) e[i] = op.bands[0].empty() ? 0.0 : op.bands[0][i].real();
    lapack_int nsplit = 0;
    std::vector<lapack_int> block(n), split(n), fail(std::max(m, 1));
    const double abstol = 2.0 * LAPACKE_dlamch('S');
    check_info(LAPACKE_dstebz('I', 'B', n, 0.0, 0.0, il, iu, abstol, d.data(), e.data(), &found,
                              &nsplit, out.values.data(), block.data(), split.data()),
               "dstebz");
    check_info(LAPACKE_dstein(LAPACK_COL_MAJOR, n, d.data(), e.data(), found, out.values.data(),
                              block.data(), split.data(), out.vectors.data(), n, fail.data()),
               "dstein");
  } else if (op.band_width() <= 1) {
    std::vector<double> d = op.diagonal, e(std::max(n - 1, 1), 0.0);
    for (int i = 0; i + 1 < n; ++i) e[i] = op.bands[0].empty() ? 0.0 : op.bands[0][i].real();
    std::vector<lapack_int> support(2 * std::max(m, 1));
    check_info(LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', range, n, d.data(), e.data(), 0.0, 0.0, il,
                              iu, 0.0, &found, out.values.data(), out.vectors.data(), n,
                              support.data()),
               "dstevr");
  } else {
    const int kd = op.band_width();
    const int ldab = kd + 1;
    std::vector<double> ab(static_cast<std::size_t>(ldab) * n, 0.0);
    for (int j = 0; j < n; ++j) {
      ab[kd + j * ldab] = op.diagonal[j];
      for (int k = 1; k <= kd && j - k >= 0; ++k) ab[kd - k + j * ldab] = op.bands[k - 1][j - k].real();
    }
    std::vector<double> q(static_cast<std::size_t>(n) * n);
    std::vector<lapack_int> fail(n);
    check_info(LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'V', range, 'U', n, kd, ab.data(), ldab, q.data(),
                              n, 0.0, 0.0, il, iu, 0.0, &found, out.values.data(),
                              out.vectors.data(), n, fail.data()),
               "dsbevx");
  }
  out.values.resize(found);
  out.vectors.resize(static_cast<std::size_t>(n) * found);
  return out;
}

bool solve_symmetric_banded(const std::vector<double>& diag,
                            const std::vector<std::vector<double>>& bands,
                            std::vector<double>& rhs) {
  const int n = static_cast<int>(diag.size());
  const int k = static_cast<int>(bands.size());
  if (n == 0) return true;
  if (k == 0) {
    for (int i = 0; i < n; ++i) {
      if (diag[i] == 0.0) return false;
      rhs[i] /= diag[i];
    }
    return true;
  }
  // General band storage with room for fill-in: ldab = 2 kl + ku + 1.
  const int ldab = 3 * k + 1;
  std::vector<double> ab(static_cast<std::size_t>(ldab) * n, 0.0);
  auto at = [&](int i, int j) -> double& { return ab[(2 * k + i - j) + static_cast<std::size_t>(j) * ldab]; };
  for (int i = 0; i < n; ++i) at(i, i) = diag[i];
  for (int b = 1; b <= k; ++b) {
    for (int i = 0; i + b < n; ++i) {
      at(i, i + b) = bands[b - 1][i];
      at(i + b, i) = bands[b - 1][i];
    }
  }
  std::vector<lapack_int> ipiv(n);
  const lapack_int info = LAPACKE_dgbsv(LAPACK_COL_MAJOR, n, k, k, 1, ab.data(), ldab, ipiv.data(),
                                        rhs.data(), n);
  if (info < 0) check_info(info, "dgbsv");
  return info == 0;
}

}  // namespace qpspec::detail
