#include "fdn/km.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "fdn/metrics.hpp"

namespace fdn {

namespace {

double l2(const std::vector<double>& a) {
    double s = 0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

}  // namespace

KMResult km_denoise(const Image& g, const DenoiserMap& q, const KMConfig& cfg,
                    const Image* ref, double peak) {
    if (cfg.mu <= 0 || cfg.mu >= 1) throw std::invalid_argument("km_denoise: mu must be in (0,1)");
    if (cfg.max_iters < 1) throw std::invalid_argument("km_denoise: max_iters < 1");
    for (double l : cfg.lambda_schedule)
        if (l <= 0 || l >= 1)
            throw std::invalid_argument("km_denoise: lambda_n must be strictly inside (0,1)");

    KMResult res;
    Image f = g;  // f_0 = f_1 = g
    for (int n = 0; n < cfg.max_iters; ++n) {
        Image qn = q(f);
        if (qn.height != g.height || qn.width != g.width)
            throw std::invalid_argument("km_denoise: denoiser changed image shape");
        for (double v : qn.data)
            if (!std::isfinite(v)) throw std::runtime_error("km_denoise: non-finite iterate");

        double lam = cfg.lambda_at(n);
        Image next(g.height, g.width, 0.0);
        for (size_t i = 0; i < f.data.size(); ++i) {
            double fbar = cfg.mu * g.data[i] + (1.0 - cfg.mu) * qn.data[i];
            next.data[i] = f.data[i] + lam * (fbar - f.data[i]);
        }

        std::vector<double> diff(f.data.size());
        for (size_t i = 0; i < diff.size(); ++i) diff[i] = next.data[i] - f.data[i];
        double nf = l2(f.data);
        double rel = nf > 0 ? l2(diff) / nf : l2(diff);

        f = std::move(next);
        res.iterations = n + 1;
        if (cfg.record_trace) {
            res.trace.residual.push_back(rel);
            if (ref) {
                res.trace.psnr_f.push_back(psnr(f, *ref, peak));
                res.trace.psnr_q.push_back(psnr(qn, *ref, peak));
            }
        }
        if (rel < cfg.stop_tol) {
            res.converged = true;
            break;
        }
    }
    res.output = std::move(f);
    return res;
}

double estimate_lipschitz(const DenoiserMap& q, const std::vector<Image>& probes, int steps,
                          unsigned long long seed, double eps) {
    if (probes.empty()) throw std::invalid_argument("estimate_lipschitz: no probes");
    if (steps < 1) throw std::invalid_argument("estimate_lipschitz: steps < 1");
    if (eps <= 0 || eps < 1e-12) throw std::runtime_error("estimate_lipschitz: epsilon underflow");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double best = 0;
    for (const auto& z : probes) {
        const size_t n = z.data.size();
        Image qz = q(z);

        auto jvp = [&](const std::vector<double>& v) {  // J v by forward differences
            Image zp = z;
            for (size_t i = 0; i < n; ++i) zp.data[i] += eps * v[i];
            Image qp = q(zp);
            std::vector<double> out(qz.data.size());
            for (size_t i = 0; i < out.size(); ++i) out[i] = (qp.data[i] - qz.data[i]) / eps;
            return out;
        };
        auto vjp = [&](const std::vector<double>& w) {  // J^T w, coordinate loop
            std::vector<double> out(n);
            for (size_t i = 0; i < n; ++i) {
                Image zp = z;
                zp.data[i] += eps;
                Image qp = q(zp);
                double acc = 0;
                for (size_t j = 0; j < w.size(); ++j) acc += (qp.data[j] - qz.data[j]) * w[j];
                out[i] = acc / eps;
            }
            return out;
        };

        // power iteration on J^T J
        std::vector<double> v(n);
        for (auto& x : v) x = gauss(rng);
        double sigma = 0;
        for (int s = 0; s < steps; ++s) {
            double nv = l2(v);
            if (nv == 0) break;
            for (auto& x : v) x /= nv;
            auto w = jvp(v);
            sigma = l2(w);
            v = vjp(w);
        }
        best = std::max(best, sigma);
    }
    return best;
}

double suggest_mu(double l_est, double mu_floor) {
    if (l_est <= 0) throw std::invalid_argument("suggest_mu: non-positive Lipschitz estimate");
    double mu = 1.0 - 1.0 / l_est;
    mu = std::max(mu, mu_floor);
    return std::min(mu, 1.0 - 1e-9);
}

}  // namespace fdn
