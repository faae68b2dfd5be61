#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "fdn/image.hpp"

namespace fdn {

using DenoiserMap = std::function<Image(const Image&)>;

struct KMConfig {
    double mu = 0.1;                        // in (0, 1)
    std::vector<double> lambda_schedule;    // each in (0, 1); last value repeats
    int max_iters = 20;
    double stop_tol = 1e-5;
    bool record_trace = true;

    double lambda_at(int n) const {
        if (lambda_schedule.empty()) return 0.5;
        return n < static_cast<int>(lambda_schedule.size()) ? lambda_schedule[n]
                                                            : lambda_schedule.back();
    }
};

struct IterationTrace {
    std::vector<double> residual;   // ||f_{n+1} - f_n|| / ||f_n||
    std::vector<double> psnr_f;     // PSNR of f_n vs reference (if given)
    std::vector<double> psnr_q;     // PSNR of Q(f_n) vs reference (if given)
};

struct KMResult {
    Image output;
    IterationTrace trace;
    int iterations = 0;
    bool converged = false;
};

// Relaxed fixed-point denoising:
//   q_n = Q(f_n);  fbar = mu*g + (1-mu)*q_n;  f_{n+1} = f_n + lambda_n*(fbar - f_n)
// with f_0 = f_1 = g.
KMResult km_denoise(const Image& g, const DenoiserMap& q, const KMConfig& cfg,
                    const Image* psnr_reference = nullptr, double psnr_peak = 1.0);

// Finite-difference directional-derivative estimate of the Lipschitz constant
// of Q, maximized over probes and random unit directions.
double estimate_lipschitz(const DenoiserMap& q, const std::vector<Image>& probes, int steps,
                          unsigned long long seed = 19, double eps = 1e-4);

// mu = max(1 - 1/L, mu_floor), clamped into (0, 1).
double suggest_mu(double l_est, double mu_floor = 0.1);

}  // namespace fdn
