// Serial-vs-OpenMP comparison for the hot kernels: multichannel circular
// convolution and forward projection.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "fdn/ctsim.hpp"
#include "fdn/hankel.hpp"
#include "fdn/image.hpp"

namespace {

std::vector<fdn::Image> make_input(int channels, int size) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<fdn::Image> in;
    for (int c = 0; c < channels; ++c) {
        fdn::Image img(size, size);
        for (auto& v : img.data) v = gauss(rng);
        in.push_back(std::move(img));
    }
    return in;
}

fdn::FilterBank make_bank(int in_ch, int out_ch) {
    fdn::FilterBank bank = fdn::FilterBank::make_2d(3, 3, in_ch, out_ch);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& c : bank.coeff) c = gauss(rng);
    return bank;
}

void bm_conv2d_serial(benchmark::State& state) {
    auto in = make_input(8, static_cast<int>(state.range(0)));
    auto bank = make_bank(8, 8);
    for (auto _ : state) benchmark::DoNotOptimize(fdn::conv2d_serial(in, bank));
}

void bm_conv2d_parallel(benchmark::State& state) {
    auto in = make_input(8, static_cast<int>(state.range(0)));
    auto bank = make_bank(8, 8);
    for (auto _ : state) benchmark::DoNotOptimize(fdn::conv2d(in, bank));
}

void bm_project(benchmark::State& state) {
    fdn::Image x = fdn::make_phantom("ellipses", static_cast<int>(state.range(0)));
    auto angles = fdn::uniform_angles(90);
    for (auto _ : state) benchmark::DoNotOptimize(fdn::project(x, angles, 128));
}

}  // namespace

BENCHMARK(bm_conv2d_serial)->Arg(33)->Arg(64)->Arg(128);
BENCHMARK(bm_conv2d_parallel)->Arg(33)->Arg(64)->Arg(128);
BENCHMARK(bm_project)->Arg(64)->Arg(128);

BENCHMARK_MAIN();
