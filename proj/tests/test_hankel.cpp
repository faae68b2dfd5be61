#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "fdn/hankel.hpp"
#include "fdn/svd.hpp"

using namespace fdn;

namespace {

std::vector<double> random_vec(size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = gauss(rng);
    return v;
}

// y[i] = sum_j f[(i+j) mod n] * psi[j]
std::vector<double> direct_circ_corr(const std::vector<double>& f, const std::vector<double>& psi) {
    const int n = static_cast<int>(f.size());
    const int d = static_cast<int>(psi.size());
    std::vector<double> y(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) y[i] += f[(i + j) % n] * psi[j];
    return y;
}

}  // namespace

TEST_CASE("hankel rows follow the circular index arithmetic") {
    std::mt19937_64 rng(11);
    auto f = random_vec(16, rng);
    HankelMatrix H = build_hankel(f, 5);
    REQUIRE(H.n == 16);
    REQUIRE(H.d == 5);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 5; ++j) CHECK(H.at(i, j) == doctest::Approx(f[(i + j) % 16]));
}

TEST_CASE("hankel-matrix product equals direct circular convolution") {
    std::mt19937_64 rng(12);
    auto f = random_vec(32, rng);
    auto psi = random_vec(7, rng);
    HankelMatrix H = build_hankel(f, 7);
    auto via_conv = siso_conv(f, psi);
    for (int i = 0; i < 32; ++i) {
        double via_hankel = 0.0;
        for (int j = 0; j < 7; ++j) via_hankel += H.at(i, j) * psi[j];
        CHECK(via_conv[i] == doctest::Approx(via_hankel).epsilon(1e-13));
    }
    auto oracle = direct_circ_corr(f, psi);
    for (int i = 0; i < 32; ++i) CHECK(via_conv[i] == doctest::Approx(oracle[i]).epsilon(1e-13));
}

TEST_CASE("extended hankel times filter block equals multichannel convolution sum") {
    std::mt19937_64 rng(13);
    const int n = 16, d = 3, p = 3, q = 4;
    std::vector<std::vector<double>> channels;
    for (int i = 0; i < p; ++i) channels.push_back(random_vec(n, rng));
    FilterBank bank = FilterBank::make_1d(d, p, q);
    for (auto& c : bank.coeff) c = std::normal_distribution<double>(0.0, 1.0)(rng);

    ExtendedHankelMatrix E = build_extended_hankel(channels, d);
    REQUIRE(E.cols() == d * p);
    auto out = mimo_conv(channels, bank);
    REQUIRE(out.size() == q);
    for (int o = 0; o < q; ++o) {
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int c = 0; c < p; ++c)
                for (int t = 0; t < d; ++t) acc += E.at(i, c * d + t) * bank.at(o, c, t);
            CHECK(out[o][i] == doctest::Approx(acc).epsilon(1e-12));
        }
        // and independently against the per-channel direct loop
        std::vector<double> acc(n, 0.0);
        for (int c = 0; c < p; ++c) {
            std::vector<double> psi(d);
            for (int t = 0; t < d; ++t) psi[t] = bank.at(o, c, t);
            auto part = direct_circ_corr(channels[c], psi);
            for (int i = 0; i < n; ++i) acc[i] += part[i];
        }
        for (int i = 0; i < n; ++i) CHECK(out[o][i] == doctest::Approx(acc[i]).epsilon(1e-12));
    }
}

TEST_CASE("jacobi svd matches reconstruction and orthogonality on random matrices") {
    std::mt19937_64 rng(14);
    for (auto [m, n] : {std::pair{6, 6}, std::pair{8, 5}, std::pair{4, 9}}) {
        auto a = random_vec(static_cast<size_t>(m) * n, rng);
        SvdResult r = svd(a, m, n);
        REQUIRE(r.k == std::min(m, n));
        // A = U S V^T
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int k = 0; k < r.k; ++k) acc += r.u[i * r.k + k] * r.s[k] * r.v[j * r.k + k];
                CHECK(acc == doctest::Approx(a[i * n + j]).epsilon(1e-10));
            }
        // ordering and orthonormal columns
        for (int k = 1; k < r.k; ++k) CHECK(r.s[k] <= r.s[k - 1] + 1e-12);
        for (int k1 = 0; k1 < r.k; ++k1)
            for (int k2 = 0; k2 < r.k; ++k2) {
                double uu = 0.0, vv = 0.0;
                for (int i = 0; i < m; ++i) uu += r.u[i * r.k + k1] * r.u[i * r.k + k2];
                for (int j = 0; j < n; ++j) vv += r.v[j * r.k + k1] * r.v[j * r.k + k2];
                double want = k1 == k2 ? 1.0 : 0.0;
                CHECK(uu == doctest::Approx(want).epsilon(1e-9));
                CHECK(vv == doctest::Approx(want).epsilon(1e-9));
            }
    }
}

TEST_CASE("svd singular values of a diagonal matrix are the absolute entries") {
    std::vector<double> a = {3.0, 0.0, 0.0, 0.0, -5.0, 0.0, 0.0, 0.0, 1.0};
    auto s = singular_values(a, 3, 3);
    CHECK(s[0] == doctest::Approx(5.0));
    CHECK(s[1] == doctest::Approx(3.0));
    CHECK(s[2] == doctest::Approx(1.0));
}

TEST_CASE("hankel spectrum of a pure sinusoid has numerical rank two") {
    const int n = 48, d = 8;
    std::vector<double> f(n);
    for (int i = 0; i < n; ++i) f[i] = std::cos(2.0 * M_PI * 3.0 * i / n + 0.4);
    ExtendedHankelMatrix E = build_extended_hankel({f}, d);
    auto s = hankel_spectrum(E);
    REQUIRE(static_cast<int>(s.size()) == d);
    CHECK(s[1] > 1e-6 * s[0]);
    for (size_t k = 2; k < s.size(); ++k) CHECK(s[k] < 1e-8 * s[0]);
}

TEST_CASE("conv2d matches the naive quadruple-loop oracle") {
    std::mt19937_64 rng(15);
    const int h = 8, w = 8, kh = 3, kw = 3;
    Image x(h, w);
    for (auto& v : x.data) v = std::normal_distribution<double>(0.0, 1.0)(rng);
    FilterBank bank = FilterBank::make_2d(kh, kw, 1, 2);
    for (auto& c : bank.coeff) c = std::normal_distribution<double>(0.0, 1.0)(rng);

    auto out = conv2d({x}, bank);
    REQUIRE(out.size() == 2);
    const int cy = kh / 2, cx = kw / 2;
    for (int o = 0; o < 2; ++o)
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx) {
                double acc = 0.0;
                for (int ky = 0; ky < kh; ++ky)
                    for (int kx = 0; kx < kw; ++kx)
                        acc += x.wrap(y + ky - cy, xx + kx - cx) * bank.at(o, 0, ky * kw + kx);
                CHECK(out[o].at(y, xx) == doctest::Approx(acc).epsilon(1e-13));
            }
}

TEST_CASE("separable 2-D kernel equals row conv followed by column conv") {
    std::mt19937_64 rng(16);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int h = 12, w = 10;
    Image x(h, w);
    for (auto& v : x.data) v = gauss(rng);
    std::vector<double> pr(3), pc(5);
    for (auto& v : pr) v = gauss(rng);
    for (auto& v : pc) v = gauss(rng);

    FilterBank full = FilterBank::make_2d(3, 5, 1, 1);
    for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 5; ++kx) full.at(0, 0, ky * 5 + kx) = pr[ky] * pc[kx];
    FilterBank rows = FilterBank::make_2d(3, 1, 1, 1);
    for (int ky = 0; ky < 3; ++ky) rows.at(0, 0, ky) = pr[ky];
    FilterBank cols = FilterBank::make_2d(1, 5, 1, 1);
    for (int kx = 0; kx < 5; ++kx) cols.at(0, 0, kx) = pc[kx];

    auto direct = conv2d({x}, full);
    auto staged = conv2d(conv2d({x}, rows), cols);
    for (size_t i = 0; i < direct[0].data.size(); ++i)
        CHECK(direct[0].data[i] == doctest::Approx(staged[0].data[i]).epsilon(1e-12));
}

TEST_CASE("parallel and serial conv2d agree bit-for-bit in result") {
    std::mt19937_64 rng(17);
    const int h = 17, w = 19;
    std::vector<Image> in;
    for (int c = 0; c < 3; ++c) {
        Image x(h, w);
        for (auto& v : x.data) v = std::normal_distribution<double>(0.0, 1.0)(rng);
        in.push_back(std::move(x));
    }
    FilterBank bank = FilterBank::make_2d(5, 3, 3, 4);
    for (auto& c : bank.coeff) c = std::normal_distribution<double>(0.0, 1.0)(rng);
    auto a = conv2d(in, bank);
    auto b = conv2d_serial(in, bank);
    REQUIRE(a.size() == b.size());
    for (size_t o = 0; o < a.size(); ++o)
        for (size_t i = 0; i < a[o].data.size(); ++i) CHECK(a[o].data[i] == b[o].data[i]);
}

TEST_CASE("randomized hankel-convolution equivalence sweep") {
    std::mt19937_64 rng(18);
    std::uniform_int_distribution<int> nd(4, 64), dd(1, 9), pq(1, 4);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        int n = nd(rng);
        int d = std::min(dd(rng), n);
        int p = pq(rng), q = pq(rng);
        std::vector<std::vector<double>> channels;
        for (int c = 0; c < p; ++c) channels.push_back(random_vec(n, rng));
        FilterBank bank = FilterBank::make_1d(d, p, q);
        for (auto& c : bank.coeff) c = std::normal_distribution<double>(0.0, 1.0)(rng);
        ExtendedHankelMatrix E = build_extended_hankel(channels, d);
        auto out = mimo_conv(channels, bank);
        for (int o = 0; o < q; ++o)
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                for (int c = 0; c < p; ++c)
                    for (int t = 0; t < d; ++t) acc += E.at(i, c * d + t) * bank.at(o, c, t);
                double scale = std::max({1.0, std::abs(acc), std::abs(out[o][i])});
                worst = std::max(worst, std::abs(out[o][i] - acc) / scale);
            }
    }
    CHECK(worst <= 1e-12);
}
