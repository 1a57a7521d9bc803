#pragma once

// Reference computations for the tests.  Everything here is written from
// the definitions and shares no code with the library beyond its data
// types, so agreement between the two is meaningful.

#include <complex>
#include <cstdint>
#include <map>
#include <vector>

#include "qpspec/arithmetic.hpp"
#include "qpspec/mat2.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;
using CMatrix = std::vector<std::vector<std::complex<double>>>;
using Coeffs = std::map<int, std::complex<double>>;

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
std::vector<double> jacobi_eigenvalues(Matrix a);
/// Eigenvalues of a Hermitian matrix via its real 2n x 2n embedding.
std::vector<double> hermitian_eigenvalues(const CMatrix& h);

/// v(x) = sum_k c_k e^{2 pi i k x}, real part.
double trig_poly(const Coeffs& c, double x);

/// Dense (H u)_n = u_{n+1} + u_{n-1} + lambda v(theta + n alpha) u_n on the
/// given sites.
Matrix schrodinger_matrix(const Coeffs& c, double lambda, double alpha, double theta, int L,
                          std::int64_t first_site);
/// Dense dual operator: H(n, m) = lambda c_{n-m} off the diagonal,
/// 2 cos 2 pi (theta + n alpha) + lambda c_0 on it.
CMatrix dual_matrix(const Coeffs& c, double lambda, double alpha, double theta, int L,
                    std::int64_t first_site);

/// Free Laplacian closed forms.
double free_ids(double E);
double free_rotation(double E);
double free_lyapunov(double E);

/// Partial quotients by the textbook recursion x -> 1/x - floor(1/x) in
/// high precision.
std::vector<long long> textbook_quotients(const qpspec::BigFloat& x, int depth);

struct BruteResonance {
  std::int64_t k;
  double dist;
};
/// Resonances straight from the definition: for every k with
/// 0 < |k| <= K, compare against the minimum over all |j| <= |k|.
std::vector<BruteResonance> brute_resonances(double theta, double alpha, double eps0, std::int64_t K);

struct BruteDiophantine {
  bool holds;
  std::int64_t worst_k;
  double log_margin;
};
/// Checks every 1 <= k <= K.
BruteDiophantine brute_diophantine(const qpspec::BigFloat& alpha, double kappa, double tau,
                                   std::int64_t K);

/// Plain left-to-right product of n Schroedinger matrices without
/// renormalization.
qpspec::Mat2 plain_product(const Coeffs& c, double lambda, double alpha, double E, double x, int n);

/// Rank correlation as the Pearson correlation of average ranks, with ranks
/// obtained by counting.
double spearman_by_counting(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace oracle
