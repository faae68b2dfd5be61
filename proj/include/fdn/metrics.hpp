#pragma once

#include "fdn/image.hpp"

namespace fdn {

struct MetricReport {
    double rmse = 0.0;
    double psnr = 0.0;
    double ssim = 0.0;
};

inline constexpr double kPsnrCap = 200.0;  // sentinel for identical images

double rmse(const Image& a, const Image& b);
double psnr(const Image& a, const Image& b, double peak);

struct SsimParams {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
};

double ssim(const Image& a, const Image& b, const SsimParams& p = {});

MetricReport evaluate(const Image& a, const Image& b, double peak);

}  // namespace fdn
