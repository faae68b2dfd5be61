#include "fdn/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace fdn {

double rmse(const Image& a, const Image& b) {
    if (a.height != b.height || a.width != b.width)
        throw std::invalid_argument("rmse: dimension mismatch");
    double s = 0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        double d = a.data[i] - b.data[i];
        s += d * d;
    }
    return std::sqrt(s / a.data.size());
}

double psnr(const Image& a, const Image& b, double peak) {
    if (peak <= 0) throw std::invalid_argument("psnr: non-positive peak");
    double r = rmse(a, b);
    if (r == 0) return kPsnrCap;
    return std::min(kPsnrCap, 20.0 * std::log10(peak / r));
}

double ssim(const Image& a, const Image& b, const SsimParams& p) {
    if (a.height != b.height || a.width != b.width)
        throw std::invalid_argument("ssim: dimension mismatch");
    if (p.window > a.height || p.window > a.width)
        throw std::invalid_argument("ssim: window larger than image");

    const int r = p.window / 2;
    std::vector<double> kernel(static_cast<size_t>(p.window) * p.window);
    double ksum = 0;
    for (int y = -r; y <= r; ++y)
        for (int x = -r; x <= r; ++x) {
            double v = std::exp(-(y * y + x * x) / (2.0 * p.sigma * p.sigma));
            kernel[(y + r) * p.window + (x + r)] = v;
            ksum += v;
        }
    for (auto& v : kernel) v /= ksum;

    const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
    const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);

    double total = 0;
    long count = 0;
    // valid-region windows (no boundary extension in the quality metric)
#pragma omp parallel for schedule(static) reduction(+ : total, count)
    for (int y = r; y < a.height - r; ++y) {
        for (int x = r; x < a.width - r; ++x) {
            double ma = 0, mb = 0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    double k = kernel[(dy + r) * p.window + (dx + r)];
                    ma += k * a.at(y + dy, x + dx);
                    mb += k * b.at(y + dy, x + dx);
                }
            double va = 0, vb = 0, cov = 0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    double k = kernel[(dy + r) * p.window + (dx + r)];
                    double da = a.at(y + dy, x + dx) - ma;
                    double db = b.at(y + dy, x + dx) - mb;
                    va += k * da * da;
                    vb += k * db * db;
                    cov += k * da * db;
                }
            double num = (2 * ma * mb + c1) * (2 * cov + c2);
            double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
            total += num / den;
            ++count;
        }
    }
    return total / count;
}

MetricReport evaluate(const Image& a, const Image& b, double peak) {
    MetricReport r;
    r.rmse = rmse(a, b);
    r.psnr = psnr(a, b, peak);
    SsimParams p;
    p.dynamic_range = peak;
    r.ssim = ssim(a, b, p);
    return r;
}

}  // namespace fdn
