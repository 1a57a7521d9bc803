#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qpspec/spectrum.hpp"

namespace qpspec::detail {

/// Negative-pivot count of H - E, or nullopt when a pivot vanishes.
std::optional<std::int64_t> inertia_below(const TruncatedOperator& op, double E);

std::vector<double> all_eigenvalues(const TruncatedOperator& op);

/// Eigenpairs with 1-based indices il..iu of a real operator; vectors are
/// column-major n x (iu - il + 1).
struct EigenPairs {
  std::vector<double> values;
  std::vector<double> vectors;
};
EigenPairs real_eigenpairs(const TruncatedOperator& op, int il, int iu);

/// Solves the real banded system M x = rhs with kl = ku = bandwidth.
/// `diag` and `bands` describe a symmetric matrix (bands[k-1][i] = M(i, i+k)).
/// Returns false when the matrix is singular.
bool solve_symmetric_banded(const std::vector<double>& diag,
                            const std::vector<std::vector<double>>& bands,
                            std::vector<double>& rhs);

}  // namespace qpspec::detail
