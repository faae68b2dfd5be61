#include "fdn/classical.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace fdn {

namespace {

double l2(const std::vector<double>& a) {
    double s = 0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

// Eq-style objective: mu/2 ||g-f||^2 + (1-mu)/2 (||Wf - T(Wf)||^2 + lambda ||T(Wf)||_1)
double objective(const std::vector<double>& g, const std::vector<double>& f,
                 const FrameOperator& op, const DenoiseConfig& cfg) {
    double fid = 0;
    for (size_t i = 0; i < g.size(); ++i) fid += (g[i] - f[i]) * (g[i] - f[i]);
    auto c = encode(f, op).values;
    auto a = soft_threshold(c, cfg.lambda);
    double pen = 0, l1 = 0;
    for (size_t i = 0; i < c.size(); ++i) {
        pen += (c[i] - a[i]) * (c[i] - a[i]);
        l1 += std::abs(a[i]);
    }
    return 0.5 * cfg.mu * fid + 0.5 * (1.0 - cfg.mu) * (pen + cfg.lambda * l1);
}

bool is_tight(const FrameOperator& op) {
    auto pr = verify_pr(op, 1e-8);
    if (!pr.ok) return false;
    // norm preservation on a few random probes
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int t = 0; t < 4; ++t) {
        std::vector<double> f(op.n);
        for (auto& v : f) v = gauss(rng);
        double nf = l2(f);
        double nc = l2(encode(f, op).values);
        if (std::abs(nc - nf) > 1e-8 * nf) return false;
    }
    return true;
}

}  // namespace

std::vector<double> soft_threshold(const std::vector<double>& x, double lambda) {
    if (lambda < 0) throw std::invalid_argument("soft_threshold: negative lambda");
    std::vector<double> y(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        double m = std::abs(x[i]) - lambda;
        y[i] = m > 0 ? (x[i] > 0 ? m : -m) : 0.0;
    }
    return y;
}

FrameDenoiseResult frame_denoise(const std::vector<double>& g, const FrameOperator& op,
                                 const DenoiseConfig& cfg) {
    if (static_cast<int>(g.size()) != op.n) throw std::invalid_argument("frame_denoise: length mismatch");
    if (cfg.mu < 0 || cfg.mu > 1) throw std::invalid_argument("frame_denoise: mu outside [0,1]");
    if (cfg.lambda < 0) throw std::invalid_argument("frame_denoise: negative lambda");
    if (cfg.max_iters < 1) throw std::invalid_argument("frame_denoise: max_iters < 1");
    if (!is_tight(op))
        throw std::invalid_argument("frame_denoise: operator is not a tight frame (W^T W != I)");

    FrameDenoiseResult res;
    std::vector<double> f = g;
    for (int it = 0; it < cfg.max_iters; ++it) {
        auto c = encode(f, op);
        c.values = soft_threshold(c.values, cfg.lambda);
        auto wt = decode(c, op);
        std::vector<double> next(f.size());
        for (size_t i = 0; i < f.size(); ++i) next[i] = cfg.mu * g[i] + (1.0 - cfg.mu) * wt[i];

        double nf = l2(f);
        std::vector<double> diff(f.size());
        for (size_t i = 0; i < f.size(); ++i) diff[i] = next[i] - f[i];
        double rel = nf > 0 ? l2(diff) / nf : l2(diff);
        f = std::move(next);
        res.residuals.push_back(rel);
        res.objective.push_back(objective(g, f, op, cfg));
        res.iterations = it + 1;
        if (rel < cfg.stop_tol) {
            res.converged = true;
            break;
        }
    }
    res.output = std::move(f);
    return res;
}

double grid_search_lambda(const std::vector<double>& g, const std::vector<double>& reference,
                          const FrameOperator& op, const DenoiseConfig& base,
                          const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("grid_search_lambda: empty grid");
    double best_lambda = grid[0];
    double best_mse = std::numeric_limits<double>::infinity();
    for (double lam : grid) {
        DenoiseConfig cfg = base;
        cfg.lambda = lam;
        auto r = frame_denoise(g, op, cfg);
        double mse = 0;
        for (size_t i = 0; i < reference.size(); ++i) {
            double d = r.output[i] - reference[i];
            mse += d * d;
        }
        mse /= reference.size();
        if (mse < best_mse) {
            best_mse = mse;
            best_lambda = lam;
        }
    }
    return best_lambda;
}

}  // namespace fdn
