#include "fdn/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace fdn {

namespace {
std::mutex plan_mutex;  // FFTW planning is not thread-safe
}

void fft2(const std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out,
          int h, int w) {
    if (in.size() != static_cast<size_t>(h) * w) throw std::invalid_argument("fft2: size mismatch");
    out.resize(in.size());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lk(plan_mutex);
        plan = fftw_plan_dft_2d(h, w,
                                reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data())),
                                reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD,
                                FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    }
    fftw_execute(plan);
    std::lock_guard<std::mutex> lk(plan_mutex);
    fftw_destroy_plan(plan);
}

void ifft2(const std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out,
           int h, int w) {
    if (in.size() != static_cast<size_t>(h) * w) throw std::invalid_argument("ifft2: size mismatch");
    out.resize(in.size());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lk(plan_mutex);
        plan = fftw_plan_dft_2d(h, w,
                                reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data())),
                                reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD,
                                FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lk(plan_mutex);
        fftw_destroy_plan(plan);
    }
    double scale = 1.0 / (static_cast<double>(h) * w);
    for (auto& v : out) v *= scale;
}

void fft1(const std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out,
          bool inverse) {
    int n = static_cast<int>(in.size());
    out.resize(in.size());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lk(plan_mutex);
        plan = fftw_plan_dft_1d(n,
                                reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data())),
                                reinterpret_cast<fftw_complex*>(out.data()),
                                inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                                FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lk(plan_mutex);
        fftw_destroy_plan(plan);
    }
    if (inverse)
        for (auto& v : out) v /= n;
}

}  // namespace fdn
