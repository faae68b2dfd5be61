#pragma once

#include <vector>

namespace fdn {

// Dense SVD result: A = U diag(s) V^T with s non-increasing.
struct SvdResult {
    int m = 0, n = 0, k = 0;        // k = min(m, n)
    std::vector<double> u;          // m x k, row-major
    std::vector<double> s;          // k
    std::vector<double> v;          // n x k, row-major
};

// One-sided Jacobi SVD of a dense row-major m x n matrix. Accurate for the
// small matrices used here; throws on non-convergence.
SvdResult svd(const std::vector<double>& a, int m, int n);

// Singular values only, non-increasing.
std::vector<double> singular_values(const std::vector<double>& a, int m, int n);

}  // namespace fdn
