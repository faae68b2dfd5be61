#pragma once

#include <complex>
#include <vector>

namespace fdn {

// 2-D DFT helpers backed by FFTW (plans are created under a global lock,
// execution is per-call). Row-major h x w arrays.
void fft2(const std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out,
          int h, int w);
void ifft2(const std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out,
           int h, int w);  // normalized by 1/(h*w)

// 1-D complex DFT of length n (forward: negative exponent).
void fft1(const std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out,
          bool inverse);

}  // namespace fdn
