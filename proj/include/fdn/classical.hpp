#pragma once

#include <vector>

#include "fdn/framelets.hpp"

namespace fdn {

struct DenoiseConfig {
    double mu = 0.5;        // data-fidelity weight in [0, 1]
    double lambda = 0.1;    // soft threshold, > 0
    int max_iters = 200;
    double stop_tol = 1e-6;  // relative iterate change
};

std::vector<double> soft_threshold(const std::vector<double>& x, double lambda);

struct FrameDenoiseResult {
    std::vector<double> output;
    std::vector<double> objective;  // per-iteration value of the penalized cost
    std::vector<double> residuals;  // per-iteration ||f_{n+1}-f_n|| / ||f_n||
    int iterations = 0;
    bool converged = false;
};

// Picard iteration f_{n+1} = mu*g + (1-mu) W^T T_lambda(W f_n) for a tight
// frame (refused otherwise: convergence is only guaranteed for W^T W = I).
FrameDenoiseResult frame_denoise(const std::vector<double>& g, const FrameOperator& op,
                                 const DenoiseConfig& cfg);

// Plumbing: pick lambda on a grid by MSE against a reference signal.
double grid_search_lambda(const std::vector<double>& g, const std::vector<double>& reference,
                          const FrameOperator& op, const DenoiseConfig& base,
                          const std::vector<double>& grid);

}  // namespace fdn
