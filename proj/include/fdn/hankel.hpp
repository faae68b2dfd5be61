#pragma once

#include <vector>

#include "fdn/image.hpp"

namespace fdn {

// Wrap-around Hankel matrix: row i is the circular window f[i..i+d-1].
struct HankelMatrix {
    int n = 0;  // source length
    int d = 0;  // window (filter taps)
    std::vector<double> rows;  // n x d, row-major

    double at(int i, int j) const { return rows[static_cast<size_t>(i) * d + j]; }
};

// Horizontal stacking [H_d(f1) ... H_d(fp)].
struct ExtendedHankelMatrix {
    int n = 0;
    int d = 0;
    int p = 0;
    std::vector<double> rows;  // n x (d*p), row-major

    int cols() const { return d * p; }
    double at(int i, int j) const { return rows[static_cast<size_t>(i) * cols() + j]; }
};

// MIMO convolution filter set. 1-D filters: taps = d, kh = d, kw = 1.
// 2-D filters: taps = kh*kw. Coefficient layout: [out][in][taps].
struct FilterBank {
    int kh = 0, kw = 0;
    int in_channels = 0;
    int out_channels = 0;
    std::vector<double> coeff;  // out*in*kh*kw

    int taps() const { return kh * kw; }
    double& at(int o, int i, int t) {
        return coeff[(static_cast<size_t>(o) * in_channels + i) * taps() + t];
    }
    double at(int o, int i, int t) const {
        return coeff[(static_cast<size_t>(o) * in_channels + i) * taps() + t];
    }
    static FilterBank make_1d(int d, int in_ch, int out_ch);
    static FilterBank make_2d(int kh, int kw, int in_ch, int out_ch);
};

HankelMatrix build_hankel(const std::vector<double>& f, int d);
ExtendedHankelMatrix build_extended_hankel(const std::vector<std::vector<double>>& channels, int d);

// y = f (*) psi_flipped = H_d(f) psi; circular, output length n.
std::vector<double> siso_conv(const std::vector<double>& f, const std::vector<double>& psi);

// Y[:,j] = sum_i f_i (*) flipped(psi_j^i); bank taps give d.
// Output: q columns of length n.
std::vector<std::vector<double>> mimo_conv(const std::vector<std::vector<double>>& channels,
                                           const FilterBank& bank);

// Full singular value list, non-increasing, via one-sided Jacobi.
std::vector<double> hankel_spectrum(const ExtendedHankelMatrix& H);

// Circular multi-channel 2-D cross-correlation with centered odd kernels,
// matching the 1-D flip convention. OpenMP over output channels/rows.
std::vector<Image> conv2d(const std::vector<Image>& input, const FilterBank& bank);
// Serial reference kept for testing and benchmarking.
std::vector<Image> conv2d_serial(const std::vector<Image>& input, const FilterBank& bank);

}  // namespace fdn
