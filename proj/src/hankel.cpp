#include "fdn/hankel.hpp"

#include <cmath>
#include <stdexcept>

#include "fdn/svd.hpp"

namespace fdn {

FilterBank FilterBank::make_1d(int d, int in_ch, int out_ch) {
    if (d <= 0 || in_ch <= 0 || out_ch <= 0)
        throw std::invalid_argument("FilterBank: non-positive shape");
    FilterBank b;
    b.kh = d;
    b.kw = 1;
    b.in_channels = in_ch;
    b.out_channels = out_ch;
    b.coeff.assign(static_cast<size_t>(out_ch) * in_ch * d, 0.0);
    return b;
}

FilterBank FilterBank::make_2d(int kh, int kw, int in_ch, int out_ch) {
    if (kh <= 0 || kw <= 0 || in_ch <= 0 || out_ch <= 0)
        throw std::invalid_argument("FilterBank: non-positive shape");
    FilterBank b;
    b.kh = kh;
    b.kw = kw;
    b.in_channels = in_ch;
    b.out_channels = out_ch;
    b.coeff.assign(static_cast<size_t>(out_ch) * in_ch * kh * kw, 0.0);
    return b;
}

HankelMatrix build_hankel(const std::vector<double>& f, int d) {
    int n = static_cast<int>(f.size());
    if (d < 1 || d > n) throw std::invalid_argument("build_hankel: need 1 <= d <= n");
    HankelMatrix h;
    h.n = n;
    h.d = d;
    h.rows.resize(static_cast<size_t>(n) * d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) h.rows[static_cast<size_t>(i) * d + j] = f[(i + j) % n];
    return h;
}

ExtendedHankelMatrix build_extended_hankel(const std::vector<std::vector<double>>& channels, int d) {
    if (channels.empty()) throw std::invalid_argument("build_extended_hankel: no channels");
    int n = static_cast<int>(channels[0].size());
    int p = static_cast<int>(channels.size());
    for (const auto& c : channels)
        if (static_cast<int>(c.size()) != n)
            throw std::invalid_argument("build_extended_hankel: channel length mismatch");
    if (d < 1 || d > n) throw std::invalid_argument("build_extended_hankel: need 1 <= d <= n");
    ExtendedHankelMatrix H;
    H.n = n;
    H.d = d;
    H.p = p;
    H.rows.resize(static_cast<size_t>(n) * d * p);
    for (int c = 0; c < p; ++c) {
        const auto& f = channels[c];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j)
                H.rows[static_cast<size_t>(i) * (d * p) + c * d + j] = f[(i + j) % n];
    }
    return H;
}

std::vector<double> siso_conv(const std::vector<double>& f, const std::vector<double>& psi) {
    int n = static_cast<int>(f.size());
    int d = static_cast<int>(psi.size());
    if (d < 1 || d > n) throw std::invalid_argument("siso_conv: need 1 <= d <= n");
    std::vector<double> y(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double acc = 0;
        for (int j = 0; j < d; ++j) acc += f[(i + j) % n] * psi[j];
        y[i] = acc;
    }
    return y;
}

std::vector<std::vector<double>> mimo_conv(const std::vector<std::vector<double>>& channels,
                                           const FilterBank& bank) {
    if (static_cast<int>(channels.size()) != bank.in_channels)
        throw std::invalid_argument("mimo_conv: channel count mismatch");
    if (bank.kw != 1) throw std::invalid_argument("mimo_conv: expected 1-D filter bank");
    int n = static_cast<int>(channels[0].size());
    int d = bank.taps();
    std::vector<std::vector<double>> out(bank.out_channels, std::vector<double>(n, 0.0));
#pragma omp parallel for schedule(static)
    for (int o = 0; o < bank.out_channels; ++o) {
        for (int c = 0; c < bank.in_channels; ++c) {
            const auto& f = channels[c];
            for (int i = 0; i < n; ++i) {
                double acc = 0;
                for (int j = 0; j < d; ++j) acc += f[(i + j) % n] * bank.at(o, c, j);
                out[o][i] += acc;
            }
        }
    }
    return out;
}

std::vector<double> hankel_spectrum(const ExtendedHankelMatrix& H) {
    for (double v : H.rows)
        if (!std::isfinite(v)) throw std::invalid_argument("hankel_spectrum: non-finite entry");
    return singular_values(H.rows, H.n, H.cols());
}

namespace {

std::vector<Image> conv2d_impl(const std::vector<Image>& input, const FilterBank& bank,
                               bool parallel) {
    if (static_cast<int>(input.size()) != bank.in_channels)
        throw std::invalid_argument("conv2d: channel count mismatch");
    if (bank.kh % 2 == 0 || bank.kw % 2 == 0)
        throw std::invalid_argument("conv2d: kernel dims must be odd");
    const int H = input[0].height, W = input[0].width;
    for (const auto& im : input)
        if (im.height != H || im.width != W) throw std::invalid_argument("conv2d: input size mismatch");
    const int rh = bank.kh / 2, rw = bank.kw / 2;

    std::vector<Image> out(bank.out_channels, Image(H, W, 0.0));
#pragma omp parallel for schedule(static) if (parallel)
    for (int o = 0; o < bank.out_channels; ++o) {
        Image& dst = out[o];
        for (int c = 0; c < bank.in_channels; ++c) {
            const Image& src = input[c];
            const double* k = &bank.coeff[(static_cast<size_t>(o) * bank.in_channels + c) *
                                          bank.taps()];
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x) {
                    double acc = 0;
                    for (int ky = -rh; ky <= rh; ++ky) {
                        int yy = y + ky;
                        yy = (yy % H + H) % H;
                        for (int kx = -rw; kx <= rw; ++kx) {
                            int xx = x + kx;
                            xx = (xx % W + W) % W;
                            acc += src.at(yy, xx) * k[(ky + rh) * bank.kw + (kx + rw)];
                        }
                    }
                    dst.at(y, x) += acc;
                }
        }
    }
    return out;
}

}  // namespace

std::vector<Image> conv2d(const std::vector<Image>& input, const FilterBank& bank) {
    return conv2d_impl(input, bank, true);
}

std::vector<Image> conv2d_serial(const std::vector<Image>& input, const FilterBank& bank) {
    return conv2d_impl(input, bank, false);
}

}  // namespace fdn
