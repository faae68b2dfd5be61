#include "fdn/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fdn {

namespace {

// One-sided Jacobi on columns of an m x n matrix (m >= n), column-major work
// array. Rotates column pairs until all are mutually orthogonal.
void jacobi_columns(std::vector<double>& a, std::vector<double>& v, int m, int n) {
    // v starts as identity (n x n, column-major)
    const double tol = 1e-14;
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double* cp = a.data() + static_cast<size_t>(p) * m;
                double* cq = a.data() + static_cast<size_t>(q) * m;
                double app = 0, aqq = 0, apq = 0;
                for (int i = 0; i < m; ++i) {
                    app += cp[i] * cp[i];
                    aqq += cq[i] * cq[i];
                    apq += cp[i] * cq[i];
                }
                if (std::abs(apq) <= tol * std::sqrt(app * aqq) || apq == 0.0) continue;
                rotated = true;
                double tau = (aqq - app) / (2.0 * apq);
                double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = c * t;
                for (int i = 0; i < m; ++i) {
                    double xp = cp[i], xq = cq[i];
                    cp[i] = c * xp - s * xq;
                    cq[i] = s * xp + c * xq;
                }
                double* vp = v.data() + static_cast<size_t>(p) * n;
                double* vq = v.data() + static_cast<size_t>(q) * n;
                for (int i = 0; i < n; ++i) {
                    double xp = vp[i], xq = vq[i];
                    vp[i] = c * xp - s * xq;
                    vq[i] = s * xp + c * xq;
                }
            }
        }
        if (!rotated) return;
    }
    throw std::runtime_error("svd: Jacobi iteration did not converge");
}

}  // namespace

SvdResult svd(const std::vector<double>& a_in, int m, int n) {
    if (m <= 0 || n <= 0 || a_in.size() != static_cast<size_t>(m) * n)
        throw std::invalid_argument("svd: bad dimensions");

    bool transposed = m < n;
    int mm = transposed ? n : m;
    int nn = transposed ? m : n;

    // column-major copy of A (or A^T)
    std::vector<double> work(static_cast<size_t>(mm) * nn);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            double val = a_in[static_cast<size_t>(i) * n + j];
            if (transposed)
                work[static_cast<size_t>(i) * mm + j] = val;  // col i of A^T
            else
                work[static_cast<size_t>(j) * mm + i] = val;
        }

    std::vector<double> v(static_cast<size_t>(nn) * nn, 0.0);
    for (int i = 0; i < nn; ++i) v[static_cast<size_t>(i) * nn + i] = 1.0;

    jacobi_columns(work, v, mm, nn);

    std::vector<double> sv(nn);
    for (int j = 0; j < nn; ++j) {
        double s2 = 0;
        const double* col = work.data() + static_cast<size_t>(j) * mm;
        for (int i = 0; i < mm; ++i) s2 += col[i] * col[i];
        sv[j] = std::sqrt(s2);
    }

    std::vector<int> order(nn);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return sv[x] > sv[y]; });

    SvdResult r;
    r.m = m;
    r.n = n;
    r.k = nn;
    r.s.resize(nn);
    // "U" of the tall factorization: mm x nn; "V": nn x nn
    std::vector<double> utall(static_cast<size_t>(mm) * nn, 0.0);
    std::vector<double> vsq(static_cast<size_t>(nn) * nn, 0.0);
    for (int jj = 0; jj < nn; ++jj) {
        int j = order[jj];
        r.s[jj] = sv[j];
        const double* col = work.data() + static_cast<size_t>(j) * mm;
        double inv = sv[j] > 0 ? 1.0 / sv[j] : 0.0;
        for (int i = 0; i < mm; ++i) utall[static_cast<size_t>(i) * nn + jj] = col[i] * inv;
        const double* vcol = v.data() + static_cast<size_t>(j) * nn;
        for (int i = 0; i < nn; ++i) vsq[static_cast<size_t>(i) * nn + jj] = vcol[i];
    }
    if (!transposed) {
        r.u = std::move(utall);  // m x k
        r.v = std::move(vsq);    // n x k
    } else {
        r.u = std::move(vsq);    // m x k (square side)
        r.v = std::move(utall);  // n x k
    }
    return r;
}

std::vector<double> singular_values(const std::vector<double>& a, int m, int n) {
    return svd(a, m, n).s;
}

}  // namespace fdn
