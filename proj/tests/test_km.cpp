#include <cmath>
#include <random>

#include "doctest.h"
#include "fdn/km.hpp"
#include "fdn/svd.hpp"

using namespace fdn;

namespace {

Image random_image(int h, int w, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Image img(h, w);
    for (auto& v : img.data) v = gauss(rng);
    return img;
}

double max_abs_diff(const Image& a, const Image& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

}  // namespace

TEST_CASE("scaling maps reach the closed-form fixed point") {
    // Q(f) = c*f: the relaxed iteration converges to f* = mu*g / (1 - (1-mu)*c)
    Image g = random_image(6, 6, 51);
    for (double c : {0.3, 0.5, 0.9}) {
        double mu = suggest_mu(c);
        DenoiserMap q = [c](const Image& f) {
            Image out = f;
            for (auto& v : out.data) v *= c;
            return out;
        };
        KMConfig cfg;
        cfg.mu = mu;
        cfg.lambda_schedule = {0.9};
        cfg.max_iters = 200;
        cfg.stop_tol = 0.0;  // run to the iteration budget
        KMResult r = km_denoise(g, q, cfg);
        double scale = mu / (1.0 - (1.0 - mu) * c);
        Image fixed = g;
        for (auto& v : fixed.data) v *= scale;
        CHECK(max_abs_diff(r.output, fixed) <= 1e-8);
    }
}

TEST_CASE("observed contraction rate respects the theory bound") {
    Image g = random_image(8, 8, 52);
    const double c = 0.9;
    double mu = suggest_mu(c);
    // record the iterates Q sees to measure the error to the fixed point
    std::vector<Image> seen;
    DenoiserMap q = [c, &seen](const Image& f) {
        seen.push_back(f);
        Image out = f;
        for (auto& v : out.data) v *= c;
        return out;
    };
    KMConfig cfg;
    cfg.mu = mu;
    cfg.lambda_schedule = {1.0 - 1e-9};  // strict (0,1), rate -> (1-mu)c
    cfg.max_iters = 40;
    cfg.stop_tol = 0.0;
    km_denoise(g, q, cfg);
    double scale = mu / (1.0 - (1.0 - mu) * c);
    Image fixed = g;
    for (auto& v : fixed.data) v *= scale;
    std::vector<double> err;
    for (const auto& f : seen) err.push_back(max_abs_diff(f, fixed));
    for (size_t i = 1; i + 1 < err.size(); ++i) {
        if (err[i] < 1e-13) break;
        CHECK(err[i + 1] / err[i] <= (1.0 - mu) * c + 1e-6);
    }
}

TEST_CASE("f0 = f1 = g warmup means the identity denoiser is a fixed point") {
    Image g = random_image(5, 7, 53);
    KMConfig cfg;
    cfg.mu = 0.3;
    KMResult r = km_denoise(g, [](const Image& f) { return f; }, cfg);
    CHECK(r.converged);
    CHECK(r.iterations <= 2);
    CHECK(max_abs_diff(r.output, g) <= 1e-14);
}

TEST_CASE("lambda outside the open interval is rejected") {
    Image g(4, 4, 1.0);
    auto identity = [](const Image& f) { return f; };
    KMConfig cfg;
    cfg.lambda_schedule = {1.0};
    CHECK_THROWS(km_denoise(g, identity, cfg));
    cfg.lambda_schedule = {0.0};
    CHECK_THROWS(km_denoise(g, identity, cfg));
    cfg.lambda_schedule = {0.5};
    cfg.mu = 1.0;
    CHECK_THROWS(km_denoise(g, identity, cfg));
    cfg.mu = 0.0;
    CHECK_THROWS(km_denoise(g, identity, cfg));
}

TEST_CASE("denoiser output shape mismatch is rejected") {
    Image g(4, 4, 1.0);
    KMConfig cfg;
    CHECK_THROWS(km_denoise(g, [](const Image&) { return Image(3, 3, 0.0); }, cfg));
}

TEST_CASE("psnr traces are recorded against a reference") {
    Image ref = random_image(6, 6, 54);
    Image g = ref;
    for (auto& v : g.data) v += 0.1;
    KMConfig cfg;
    cfg.mu = 0.5;
    cfg.max_iters = 5;
    cfg.stop_tol = 0.0;
    KMResult r = km_denoise(g, [](const Image& f) { return f; }, cfg, &ref, 1.0);
    CHECK(r.trace.psnr_f.size() == r.trace.residual.size());
    CHECK(r.trace.psnr_q.size() == r.trace.residual.size());
    for (double v : r.trace.psnr_f) CHECK(std::isfinite(v));
}

TEST_CASE("lipschitz estimate matches the top singular value of a linear map") {
    std::mt19937_64 rng(55);
    const int n = 9;  // 3x3 images
    std::vector<double> a(n * n);
    for (auto& v : a) v = std::normal_distribution<double>(0.0, 1.0)(rng);
    DenoiserMap q = [&a, n](const Image& f) {
        Image out(3, 3, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out.data[i] += a[static_cast<size_t>(i) * n + j] * f.data[j];
        return out;
    };
    std::vector<Image> probes = {random_image(3, 3, 56), random_image(3, 3, 57)};
    double l_est = estimate_lipschitz(q, probes, 60);
    double sigma = singular_values(a, n, n).front();
    CHECK(l_est == doctest::Approx(sigma).epsilon(0.02));
}

TEST_CASE("suggest_mu applies the floor and stays inside (0,1)") {
    CHECK(suggest_mu(0.5) == doctest::Approx(0.1));   // 1-1/L negative -> floor
    CHECK(suggest_mu(2.0) == doctest::Approx(0.5));   // 1 - 1/2
    CHECK(suggest_mu(10.0) == doctest::Approx(0.9));
    double huge = suggest_mu(1e18);
    CHECK(huge < 1.0);
    CHECK(huge > 0.0);
}
