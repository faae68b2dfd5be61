#include "fdn/framelets.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "fdn/svd.hpp"

namespace fdn {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

PoolingPair PoolingPair::identity(int n) {
    PoolingPair p;
    p.n = n;
    p.phi.assign(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) p.phi[static_cast<size_t>(i) * n + i] = 1.0;
    p.phi_dual = p.phi;
    return p;
}

double PoolingPair::check_duality() const {
    double worst = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0;
            for (int k = 0; k < n; ++k)
                acc += phi_dual[static_cast<size_t>(i) * n + k] * phi[static_cast<size_t>(j) * n + k];
            worst = std::max(worst, std::abs(acc - (i == j ? 1.0 : 0.0)));
        }
    return worst;
}

FrameOperator FrameOperator::tight_from_orthogonal(int n, const std::vector<double>& Q, int d) {
    if (static_cast<int>(Q.size()) != d * d)
        throw std::invalid_argument("tight_from_orthogonal: Q must be d x d");
    FrameOperator op;
    op.n = n;
    op.d = d;
    op.q = d;
    double inv = 1.0 / std::sqrt(static_cast<double>(d));
    op.psi.resize(Q.size());
    op.psi_dual.resize(Q.size());
    for (size_t i = 0; i < Q.size(); ++i) {
        op.psi[i] = Q[i] * inv;
        op.psi_dual[i] = Q[i] * inv * d;
    }
    op.declared_alpha = op.declared_beta = 1.0;
    return op;
}

FrameOperator FrameOperator::haar(int n) {
    const double s = 1.0 / std::sqrt(2.0);
    return tight_from_orthogonal(n, {s, s, s, -s}, 2);
}

CoefficientTensor encode(const std::vector<double>& f, const FrameOperator& op) {
    int n = static_cast<int>(f.size());
    if (n != op.n) throw std::invalid_argument("encode: signal length mismatch");
    CoefficientTensor c;
    c.n = n;
    c.q = op.q;
    c.values.assign(static_cast<size_t>(n) * op.q, 0.0);
    // raw = H_d(f) Psi
    std::vector<double> raw(static_cast<size_t>(n) * op.q, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < op.q; ++j) {
            double acc = 0;
            for (int t = 0; t < op.d; ++t) acc += f[(i + t) % n] * op.psi_at(t, j);
            raw[static_cast<size_t>(i) * op.q + j] = acc;
        }
    if (!op.pooling) {
        c.values = std::move(raw);
    } else {
        const auto& phi = op.pooling->phi;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < op.q; ++j) {
                double acc = 0;
                for (int k = 0; k < n; ++k)
                    acc += phi[static_cast<size_t>(k) * n + i] * raw[static_cast<size_t>(k) * op.q + j];
                c.values[static_cast<size_t>(i) * op.q + j] = acc;
            }
    }
    return c;
}

std::vector<double> decode(const CoefficientTensor& c, const FrameOperator& op) {
    if (c.n != op.n || c.q != op.q) throw std::invalid_argument("decode: shape mismatch");
    const int n = op.n;
    std::vector<double> g;  // Phi_dual * C
    const std::vector<double>* G = &c.values;
    if (op.pooling) {
        g.assign(static_cast<size_t>(n) * op.q, 0.0);
        const auto& pd = op.pooling->phi_dual;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < op.q; ++j) {
                double acc = 0;
                for (int k = 0; k < n; ++k)
                    acc += pd[static_cast<size_t>(i) * n + k] * c.values[static_cast<size_t>(k) * op.q + j];
                g[static_cast<size_t>(i) * op.q + j] = acc;
            }
        G = &g;
    }
    // f[t] = (1/d) sum_m sum_k G[(t-k) mod n, m] * psi_dual[k, m]
    std::vector<double> f(n, 0.0);
    for (int t = 0; t < n; ++t) {
        double acc = 0;
        for (int m = 0; m < op.q; ++m)
            for (int k = 0; k < op.d; ++k)
                acc += (*G)[static_cast<size_t>((t - k + n) % n) * op.q + m] * op.dual_at(k, m);
        f[t] = acc / op.d;
    }
    return f;
}

std::vector<double> encode_adjoint(const CoefficientTensor& c, const FrameOperator& op) {
    if (c.n != op.n || c.q != op.q) throw std::invalid_argument("encode_adjoint: shape mismatch");
    const int n = op.n;
    // M = Phi C Psi^T (n x d), then accumulate circular anti-diagonals.
    std::vector<double> pc;
    const std::vector<double>* C = &c.values;
    if (op.pooling) {
        pc.assign(static_cast<size_t>(n) * op.q, 0.0);
        const auto& phi = op.pooling->phi;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < op.q; ++j) {
                double acc = 0;
                for (int k = 0; k < n; ++k)
                    acc += phi[static_cast<size_t>(i) * n + k] * c.values[static_cast<size_t>(k) * op.q + j];
                pc[static_cast<size_t>(i) * op.q + j] = acc;
            }
        C = &pc;
    }
    std::vector<double> f(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int t = 0; t < op.d; ++t) {
            double m = 0;
            for (int j = 0; j < op.q; ++j)
                m += (*C)[static_cast<size_t>(i) * op.q + j] * op.psi_at(t, j);
            f[(i + t) % n] += m;
        }
    return f;
}

LinearOp analysis_op(const FrameOperator& op) {
    LinearOp w;
    w.domain_dim = op.n;
    w.apply = [op](const std::vector<double>& f) { return encode(f, op).values; };
    w.apply_adjoint = [op](const std::vector<double>& cv) {
        CoefficientTensor c;
        c.n = op.n;
        c.q = op.q;
        c.values = cv;
        return encode_adjoint(c, op);
    };
    return w;
}

FrameBounds estimate_frame_bounds(const LinearOp& w, int iters, int restarts,
                                  unsigned long long seed) {
    if (iters < 1 || restarts < 1) throw std::invalid_argument("estimate_frame_bounds: bad config");
    const int n = w.domain_dim;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto wtw = [&](const std::vector<double>& x) { return w.apply_adjoint(w.apply(x)); };

    auto power = [&](auto&& matvec) {
        double best = 0;
        for (int r = 0; r < restarts; ++r) {
            std::vector<double> x(n);
            for (auto& v : x) v = gauss(rng);
            double nx = norm(x);
            for (auto& v : x) v /= nx;
            double lam = 0;
            for (int it = 0; it < iters; ++it) {
                auto y = matvec(x);
                lam = dot(x, y);
                double ny = norm(y);
                if (ny < 1e-300) {
                    lam = 0;
                    break;
                }
                for (int i = 0; i < n; ++i) x[i] = y[i] / ny;
            }
            best = std::max(best, lam);
        }
        return best;
    };

    FrameBounds fb;
    fb.beta = power(wtw);
    double shift = fb.beta;
    double gap = power([&](const std::vector<double>& x) {
        auto y = wtw(x);
        for (int i = 0; i < n; ++i) y[i] = shift * x[i] - y[i];
        return y;
    });
    fb.alpha = std::max(0.0, shift - gap);
    if (fb.alpha <= 1e-14 * std::max(1.0, fb.beta)) {
        fb.alpha = 0.0;
        fb.is_frame = false;
    }
    return fb;
}

PrReport verify_pr(const FrameOperator& op, double tolerance) {
    const int n = op.n;
    PrReport rep;
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss(0.0, 1.0);
    int probes = n <= 1024 ? n : 256;
    for (int i = 0; i < probes; ++i) {
        std::vector<double> e(n, 0.0);
        if (n <= 1024)
            e[i] = 1.0;
        else
            for (auto& v : e) v = gauss(rng);
        auto r = decode(encode(e, op), op);
        for (int t = 0; t < n; ++t) rep.max_residual = std::max(rep.max_residual, std::abs(r[t] - e[t]));
    }
    rep.ok = rep.max_residual <= tolerance;
    return rep;
}

LowRankPair lowrank_pair_from_signal(const std::vector<double>& f, int d, int r) {
    int n = static_cast<int>(f.size());
    if (r < 1 || r > d) throw std::invalid_argument("lowrank_pair_from_signal: need 1 <= r <= d");
    auto H = build_hankel(f, d);
    auto dec = svd(H.rows, n, d);
    LowRankPair lp;
    lp.sigma = dec.s;
    FrameOperator op;
    op.n = n;
    op.d = d;
    op.q = r;
    op.psi.resize(static_cast<size_t>(d) * r);
    for (int t = 0; t < d; ++t)
        for (int j = 0; j < r; ++j)
            op.psi[static_cast<size_t>(t) * r + j] = dec.v[static_cast<size_t>(t) * dec.k + j];
    op.psi_dual = op.psi;
    lp.op = std::move(op);
    return lp;
}

double annihilation_residual(const std::vector<double>& f, const std::vector<double>& psi_dxq,
                             int d, int q) {
    if (static_cast<int>(psi_dxq.size()) != d * q)
        throw std::invalid_argument("annihilation_residual: filter shape mismatch");
    double nf = norm(f);
    if (nf == 0.0) throw std::invalid_argument("annihilation_residual: zero signal");
    int n = static_cast<int>(f.size());
    double acc = 0;
    for (int j = 0; j < q; ++j) {
        for (int i = 0; i < n; ++i) {
            double y = 0;
            for (int t = 0; t < d; ++t) y += f[(i + t) % n] * psi_dxq[static_cast<size_t>(t) * q + j];
            acc += y * y;
        }
    }
    return std::sqrt(acc) / nf;
}

}  // namespace fdn
