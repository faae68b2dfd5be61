#include <cmath>
#include <cstdlib>
#include <functional>
#include <random>

#include "doctest.h"
#include "fdn/wavresnet.hpp"

using namespace fdn;

namespace {

ArchConfig tiny_arch() {
    ArchConfig a;
    a.in_bands = 3;
    a.channels = 4;
    a.module_count = 2;
    a.convs_per_module = 2;
    a.kernel = 3;
    a.patch_h = 9;
    a.patch_w = 9;
    return a;
}

Batch random_batch(int b, int c, int h, int w, unsigned seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, scale);
    Batch out(b, c, h, w);
    for (auto& v : out.v) v = gauss(rng);
    return out;
}

}  // namespace

TEST_CASE("arch validation rejects bad configurations") {
    ArchConfig a = tiny_arch();
    CHECK_NOTHROW(a.validate());
    a.kernel = 4;
    CHECK_THROWS(a.validate());
    a = tiny_arch();
    a.channels = 0;
    CHECK_THROWS(a.validate());
    a = tiny_arch();
    a.module_count = 0;
    CHECK_THROWS(a.validate());
}

TEST_CASE("full-scale configuration is constructible with the right shape") {
    ArchConfig a;
    a.in_bands = 15;
    a.channels = 128;
    a.module_count = 6;
    a.patch_h = 55;
    a.patch_w = 55;
    a.validate();
    CHECK(a.concat_channels() == 7 * 128);
    NetworkParams p = NetworkParams::init(a, 1);
    CHECK(p.param_count() > 0);
    // concat-fusion layer consumes exactly (module_count+1)*channels inputs
    bool found = false;
    for (const auto& l : p.layers)
        if (l.in_c == a.concat_channels()) found = true;
    CHECK(found);
}

TEST_CASE("zero trunk output conv makes the network an exact identity") {
    ArchConfig a = tiny_arch();
    NetworkParams p = NetworkParams::init(a, 2);
    // zero out the final conv (weights and bias): residual becomes zero
    const LayerDesc& last = p.layers.back();
    size_t wcount = static_cast<size_t>(last.in_c) * last.out_c * a.kernel * a.kernel;
    for (size_t i = 0; i < wcount; ++i) p.values[last.w_off + i] = 0.0;
    for (int i = 0; i < last.out_c; ++i) p.values[last.b_off + i] = 0.0;

    Batch in = random_batch(2, a.in_bands, a.patch_h, a.patch_w, 3);
    Batch out = forward(p, in, false);
    REQUIRE(out.v.size() == in.v.size());
    for (size_t i = 0; i < in.v.size(); ++i) CHECK(out.v[i] == in.v[i]);  // bitwise
}

TEST_CASE("training and inference modes differ while bn stats are warm") {
    ArchConfig a = tiny_arch();
    NetworkParams p = NetworkParams::init(a, 4, 0.05);
    Batch in = random_batch(2, a.in_bands, a.patch_h, a.patch_w, 5);
    Batch train_out = forward_residual(p, in, true);  // also updates running stats
    Batch infer_out = forward_residual(p, in, false);
    double diff = 0.0;
    for (size_t i = 0; i < train_out.v.size(); ++i)
        diff = std::max(diff, std::abs(train_out.v[i] - infer_out.v[i]));
    CHECK(diff > 0.0);  // batch stats vs momentum-blended running stats
}

TEST_CASE("gradients match central finite differences on a tiny net") {
    const double eps = 1e-4;
    for (unsigned seed : {11u, 12u, 13u}) {
        ArchConfig a = tiny_arch();
        NetworkParams p = NetworkParams::init(a, seed, 0.05);
        Batch in = random_batch(2, a.in_bands, a.patch_h, a.patch_w, seed + 100, 0.5);
        Batch target = random_batch(2, a.in_bands, a.patch_h, a.patch_w, seed + 200, 0.5);

        LossGrad lg = loss_and_grad(p, in, target);
        REQUIRE(lg.grad.size() == p.values.size());

        // check a deterministic subset of coordinates across all layers
        std::mt19937_64 rng(seed + 300);
        std::uniform_int_distribution<size_t> pick(0, p.values.size() - 1);
        auto central = [&](size_t i, double e) {
            NetworkParams pp = p;
            pp.values[i] += e;
            NetworkParams pm = p;
            pm.values[i] -= e;
            return (loss_and_grad(pp, in, target).loss - loss_and_grad(pm, in, target).loss) /
                   (2.0 * e);
        };
        double worst = 0.0;
        int checked = 0;
        for (int t = 0; t < 200; ++t) {
            size_t i = pick(rng);
            double fd = central(i, eps);
            double denom = std::max({std::abs(fd), std::abs(lg.grad[i]), 1e-6});
            double rel = std::abs(fd - lg.grad[i]) / denom;
            if (rel >= 1e-3) {
                // distinguish a ReLU kink inside the eps window from a wrong
                // gradient: the estimate must stabilize as the step shrinks
                double fd_small = central(i, eps / 10.0);
                double drift = std::abs(fd - fd_small) /
                               std::max({std::abs(fd), std::abs(fd_small), 1e-6});
                if (drift > 1e-3) continue;  // nonsmooth neighborhood, excluded
                rel = std::abs(fd_small - lg.grad[i]) /
                      std::max({std::abs(fd_small), std::abs(lg.grad[i]), 1e-6});
            }
            worst = std::max(worst, rel);
            ++checked;
        }
        CHECK(checked > 100);
        CHECK(worst < 1e-3);
    }
}

TEST_CASE("training reduces the loss on a learnable problem") {
    ArchConfig a = tiny_arch();
    NetworkParams p = NetworkParams::init(a, 21, 0.05);
    // learn a fixed residual pattern
    std::vector<TrainingSample> data;
    std::mt19937_64 rng(22);
    std::normal_distribution<double> gauss(0.0, 1.0);
    size_t elems = static_cast<size_t>(a.in_bands) * a.patch_h * a.patch_w;
    for (int s = 0; s < 12; ++s) {
        TrainingSample ts;
        ts.input.resize(elems);
        ts.target.resize(elems);
        for (size_t i = 0; i < elems; ++i) {
            ts.input[i] = gauss(rng);
            ts.target[i] = 0.3 * ts.input[i];  // residual proportional to input
        }
        data.push_back(std::move(ts));
    }
    TrainConfig cfg;
    cfg.stage_epochs = {120, 0, 0};
    cfg.stages = 1;
    cfg.batch_size = 4;
    cfg.lr_initial = 0.02;
    cfg.lr_final = 2e-3;
    cfg.clip = 5e-2;
    cfg.augment_flips = false;
    TrainResult r = train(p, data, cfg);
    REQUIRE(r.steps > 0);
    double head = 0.0, tail = 0.0;
    for (int i = 0; i < 3; ++i) head += r.loss_curve[i];
    for (int i = 0; i < 3; ++i) tail += r.loss_curve[r.loss_curve.size() - 1 - i];
    CHECK(tail < 0.5 * head);
}

TEST_CASE("training is deterministic for a fixed seed") {
    ArchConfig a = tiny_arch();
    auto run = [&]() {
        NetworkParams p = NetworkParams::init(a, 31, 0.05);
        std::vector<TrainingSample> data;
        std::mt19937_64 rng(32);
        std::normal_distribution<double> gauss(0.0, 1.0);
        size_t elems = static_cast<size_t>(a.in_bands) * a.patch_h * a.patch_w;
        for (int s = 0; s < 6; ++s) {
            TrainingSample ts;
            ts.input.resize(elems);
            ts.target.resize(elems);
            for (size_t i = 0; i < elems; ++i) {
                ts.input[i] = gauss(rng);
                ts.target[i] = 0.1 * ts.input[i];
            }
            data.push_back(std::move(ts));
        }
        TrainConfig cfg;
        cfg.stage_epochs = {4, 0, 0};
        cfg.stages = 1;
        cfg.batch_size = 3;
        cfg.seed = 9;
        train(p, data, cfg);
        return p.values;
    };
    auto v1 = run();
    auto v2 = run();
    REQUIRE(v1.size() == v2.size());
    for (size_t i = 0; i < v1.size(); ++i) CHECK(v1[i] == v2[i]);
}

TEST_CASE("module outputs expose the boosting taps") {
    ArchConfig a = tiny_arch();
    NetworkParams p = NetworkParams::init(a, 41, 0.05);
    Batch in = random_batch(1, a.in_bands, a.patch_h, a.patch_w, 42);
    auto mods = module_outputs(p, in);
    REQUIRE(static_cast<int>(mods.size()) == a.module_count);
    for (const auto& m : mods) {
        CHECK(m.c == a.channels);
        CHECK(m.h == a.patch_h);
        CHECK(m.w == a.patch_w);
    }
}

TEST_CASE("infer_image with a zero trunk is the identity within transform tolerance") {
    ArchConfig a = tiny_arch();
    a.in_bands = 4;  // match the 1-level transform band count below
    NetworkParams p = NetworkParams::init(a, 51);
    const LayerDesc& last = p.layers.back();
    size_t wcount = static_cast<size_t>(last.in_c) * last.out_c * a.kernel * a.kernel;
    for (size_t i = 0; i < wcount; ++i) p.values[last.w_off + i] = 0.0;
    for (int i = 0; i < last.out_c; ++i) p.values[last.b_off + i] = 0.0;

    DirectionalTransform t(1, {2});  // 3 bands... adjust arch accordingly
    ArchConfig a2 = a;
    a2.in_bands = t.band_count();
    NetworkParams p2 = NetworkParams::init(a2, 51);
    const LayerDesc& last2 = p2.layers.back();
    size_t wcount2 = static_cast<size_t>(last2.in_c) * last2.out_c * a2.kernel * a2.kernel;
    for (size_t i = 0; i < wcount2; ++i) p2.values[last2.w_off + i] = 0.0;
    for (int i = 0; i < last2.out_c; ++i) p2.values[last2.b_off + i] = 0.0;

    Image x(16, 16);
    std::mt19937_64 rng(52);
    for (auto& v : x.data) v = std::normal_distribution<double>(0.0, 1.0)(rng);
    Image y = infer_image(p2, x, t, 4);
    double worst = 0.0;
    for (size_t i = 0; i < x.data.size(); ++i) worst = std::max(worst, std::abs(y.data[i] - x.data[i]));
    CHECK(worst <= 1e-10);
}
