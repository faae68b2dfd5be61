#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "fdn/hankel.hpp"

namespace fdn {

// Dense pooling/unpooling pair with phi_dual * phi^T = I.
struct PoolingPair {
    int n = 0;
    std::vector<double> phi;       // n x n row-major
    std::vector<double> phi_dual;  // n x n row-major

    static PoolingPair identity(int n);
    double check_duality() const;  // max |phi_dual * phi^T - I|
};

// Single-layer convolutional framelet operator pair:
//   analysis  W f      = Phi^T (f (*) flipped(Psi))      (n x q coefficients)
//   synthesis W~^T C   = (Phi_dual C) (*) nu(Psi_dual)   (length-n signal)
// Pooling defaults to identity (not stored in that case).
struct FrameOperator {
    int n = 0;  // signal length
    int d = 0;  // filter taps
    int q = 0;  // coefficient channels
    std::vector<double> psi;       // d x q row-major (encoder filters, columns)
    std::vector<double> psi_dual;  // d x q row-major (decoder filters)
    std::optional<PoolingPair> pooling;  // identity when absent
    double declared_alpha = 0.0;   // 0 = unknown
    double declared_beta = 0.0;

    double psi_at(int t, int j) const { return psi[static_cast<size_t>(t) * q + j]; }
    double dual_at(int t, int j) const { return psi_dual[static_cast<size_t>(t) * q + j]; }

    // Tight PR pair from an orthogonal d x d matrix: psi = Q/sqrt(d),
    // psi_dual = d*psi, so Psi Psi~^T = I and W^T W = I.
    static FrameOperator tight_from_orthogonal(int n, const std::vector<double>& Q, int d);
    // Undecimated Haar pair (d = 2), tight with unit bounds.
    static FrameOperator haar(int n);
};

struct CoefficientTensor {
    int n = 0, q = 0;
    std::vector<double> values;  // n x q row-major
    double at(int i, int j) const { return values[static_cast<size_t>(i) * q + j]; }
};

CoefficientTensor encode(const std::vector<double>& f, const FrameOperator& op);
std::vector<double> decode(const CoefficientTensor& c, const FrameOperator& op);
// Adjoint of encode as a linear map R^n -> R^{n x q}.
std::vector<double> encode_adjoint(const CoefficientTensor& c, const FrameOperator& op);

// Generic linear operator for spectral estimation.
struct LinearOp {
    int domain_dim = 0;
    std::function<std::vector<double>(const std::vector<double>&)> apply;
    std::function<std::vector<double>(const std::vector<double>&)> apply_adjoint;
};

LinearOp analysis_op(const FrameOperator& op);

struct FrameBounds {
    double alpha = 0.0;
    double beta = 0.0;
    bool is_frame = true;  // false when alpha collapsed to zero
};

// Randomized bounds: power iteration on W^T W for beta, shifted power
// iteration (smallest Ritz value) for alpha.
FrameBounds estimate_frame_bounds(const LinearOp& w, int iters = 200, int restarts = 8,
                                  unsigned long long seed = 7);

struct PrReport {
    bool ok = false;
    double max_residual = 0.0;
};

// Probe-basis perfect reconstruction check: max_i ||W~^T W e_i - e_i||_inf.
// All n canonical vectors when n <= 1024, else 256 Gaussian probes.
PrReport verify_pr(const FrameOperator& op, double tolerance);

struct LowRankPair {
    FrameOperator op;            // psi = psi_dual = top-r right singular vectors
    std::vector<double> sigma;   // full singular spectrum of H_d(f)
};

// Psi Psi~^T = V V^T projects onto the top-r right singular subspace of
// H_d(f); round-trip is exact when rank H_d(f) <= r.
LowRankPair lowrank_pair_from_signal(const std::vector<double>& f, int d, int r);

// ||f (*) flipped(Psi)||_F / ||f||.
double annihilation_residual(const std::vector<double>& f, const std::vector<double>& psi_dxq,
                             int d, int q);

}  // namespace fdn
