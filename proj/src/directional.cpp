#include "fdn/directional.hpp"

#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <stdexcept>

#include "fdn/fft.hpp"

namespace fdn {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool power_of_two(int v) { return v >= 1 && (v & (v - 1)) == 0; }

// cos/sin crossfade pair at boundary c with transition over [c, sqrt(2)*c]:
// down^2 + up^2 = 1 everywhere.
double ramp(double rho, double c) {
    double hi = c * std::sqrt(2.0);
    if (rho <= c) return 0.0;
    if (rho >= hi) return 1.0;
    return (rho - c) / (hi - c);
}

}  // namespace

DirectionalTransform::DirectionalTransform(int levels, std::vector<int> dirs, bool merge)
    : levels_(levels), dirs_(std::move(dirs)), merge_(merge) {
    if (levels_ < 1) throw std::invalid_argument("DirectionalTransform: levels >= 1 required");
    if (static_cast<int>(dirs_.size()) != levels_)
        throw std::invalid_argument("DirectionalTransform: one direction count per level");
    for (int m : dirs_)
        if (!power_of_two(m))
            throw std::invalid_argument("DirectionalTransform: directions must be a power of two");
    if (merge_ && dirs_.back() != 1)
        throw std::invalid_argument(
            "DirectionalTransform: lowpass merge requires a single direction at the coarsest level");
    band_count_ = std::accumulate(dirs_.begin(), dirs_.end(), 0) + (merge_ ? 0 : 1);

    // Certify the resolution of identity on a reference grid before use.
    int ref = std::max(64, 1 << (levels_ + 1));
    double res = identity_residual(ref, ref);
    if (res > 1e-10)
        throw std::runtime_error("DirectionalTransform: identity residual " + std::to_string(res) +
                                 " exceeds tolerance");
}

std::shared_ptr<std::vector<std::vector<double>>> DirectionalTransform::build_spectra(
    int h, int w) const {
    if (std::min(h, w) < (1 << (levels_ + 1)))
        throw std::invalid_argument("DirectionalTransform: image too small for level count");
    auto out = std::make_shared<std::vector<std::vector<double>>>(
        band_count_, std::vector<double>(static_cast<size_t>(h) * w, 0.0));

    for (int uy = 0; uy < h; ++uy) {
        double fy = (uy <= h / 2 ? uy : uy - h) / (h / 2.0);  // (-1, 1]
        for (int ux = 0; ux < w; ++ux) {
            double fx = (ux <= w / 2 ? ux : ux - w) / (w / 2.0);
            size_t idx = static_cast<size_t>(uy) * w + ux;
            double rho = std::hypot(fx, fy);
            double theta = std::atan2(fy, fx);
            if (theta < 0) theta += kPi;  // orientation modulo pi
            if (theta >= kPi) theta -= kPi;

            // Radial partition: D_l = prod of "down" fades through level l.
            double cum_down = 1.0;
            int band = 0;
            for (int l = 0; l < levels_; ++l) {
                double c = std::pow(2.0, -(l + 1));
                double t = ramp(rho, c);
                double up = std::sin(0.5 * kPi * t);
                double down = std::cos(0.5 * kPi * t);
                double radial = up * cum_down;
                cum_down *= down;

                int m = dirs_[l];
                if (m == 1) {
                    (*out)[band][idx] = radial;
                    ++band;
                } else {
                    double tt = theta * m / kPi;  // circular in [0, m)
                    for (int k = 0; k < m; ++k) {
                        double delta = std::abs(tt - k);
                        delta = std::min(delta, m - delta);
                        double ang = delta < 1.0 ? std::cos(0.5 * kPi * delta) : 0.0;
                        (*out)[band + k][idx] = radial * ang;
                    }
                    band += m;
                }
            }
            if (merge_) {
                // fold the lowpass residual into the coarsest band, keeping
                // the squared partition exact
                double& last = (*out)[band - 1][idx];
                last = std::sqrt(last * last + cum_down * cum_down);
            } else {
                (*out)[band][idx] = cum_down;
            }
        }
    }

    // The angular assignment is ambiguous on self-mirrored Nyquist bins
    // (the bin for +1 is also the bin for -1). Symmetrize each band with
    // its frequency mirror by quadratic mean; this keeps sum_b T_b^2 = 1
    // exact and makes every multiplier even, so real inputs stay real.
    for (auto& band : *out) {
        for (int uy = 0; uy < h; ++uy) {
            int my = (h - uy) % h;
            for (int ux = 0; ux < w; ++ux) {
                int mx = (w - ux) % w;
                size_t a = static_cast<size_t>(uy) * w + ux;
                size_t b = static_cast<size_t>(my) * w + mx;
                if (a >= b) continue;
                double v = std::sqrt(0.5 * (band[a] * band[a] + band[b] * band[b]));
                band[a] = band[b] = v;
            }
        }
    }
    return out;
}

const std::vector<std::vector<double>>& DirectionalTransform::spectra(int h, int w) const {
    std::lock_guard<std::mutex> lk(cache_mutex_);
    auto key = std::make_pair(h, w);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, build_spectra(h, w)).first;
    return *it->second;
}

double DirectionalTransform::identity_residual(int h, int w) const {
    const auto& sp = spectra(h, w);
    double worst = 0.0;
    for (size_t i = 0; i < sp[0].size(); ++i) {
        double s = 0;
        for (const auto& band : sp) s += band[i] * band[i];
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

SubbandStack DirectionalTransform::forward(const Image& x) const {
    const int h = x.height, w = x.width;
    const auto& sp = spectra(h, w);

    std::vector<std::complex<double>> in(x.data.begin(), x.data.end()), F;
    fft2(in, F, h, w);

    std::vector<Image> bands(band_count_, Image(h, w, 0.0));
#pragma omp parallel for schedule(static)
    for (int b = 0; b < band_count_; ++b) {
        std::vector<std::complex<double>> fb(F.size()), out;
        for (size_t i = 0; i < F.size(); ++i) fb[i] = F[i] * sp[b][i];
        ifft2(fb, out, h, w);
        for (size_t i = 0; i < out.size(); ++i) bands[b].data[i] = out[i].real();
    }
    return SubbandStack(std::move(bands));
}

Image DirectionalTransform::inverse(const SubbandStack& stack) const {
    if (stack.band_count() != band_count_)
        throw std::invalid_argument("DirectionalTransform::inverse: band count mismatch");
    const int h = stack.height(), w = stack.width();
    const auto& sp = spectra(h, w);

    std::vector<std::complex<double>> acc(static_cast<size_t>(h) * w, 0.0);
    for (int b = 0; b < band_count_; ++b) {
        std::vector<std::complex<double>> in(stack.bands[b].data.begin(), stack.bands[b].data.end()),
            F;
        fft2(in, F, h, w);
        for (size_t i = 0; i < F.size(); ++i) acc[i] += F[i] * sp[b][i];
    }
    std::vector<std::complex<double>> out;
    ifft2(acc, out, h, w);
    Image img(h, w, 0.0);
    for (size_t i = 0; i < out.size(); ++i) img.data[i] = out[i].real();
    return img;
}

DirectionalTransform build_transform(int levels, const std::vector<int>& dirs, bool merge_lowpass) {
    return DirectionalTransform(levels, dirs, merge_lowpass);
}

}  // namespace fdn
