#include "fdn/wavresnet.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace fdn {

void ArchConfig::validate() const {
    if (in_bands < 1 || channels < 1 || module_count < 1 || convs_per_module < 1)
        throw std::invalid_argument("ArchConfig: non-positive field");
    if (kernel < 1 || kernel % 2 == 0) throw std::invalid_argument("ArchConfig: kernel must be odd");
    if (patch_h < kernel || patch_w < kernel)
        throw std::invalid_argument("ArchConfig: patch smaller than kernel");
}

NetworkParams NetworkParams::init(const ArchConfig& arch, unsigned long long seed,
                                  double weight_std) {
    arch.validate();
    NetworkParams p;
    p.arch = arch;

    size_t off = 0;
    size_t bn_off = 0;
    auto add_layer = [&](int in_c, int out_c, bool bn, bool relu) {
        LayerDesc L;
        L.in_c = in_c;
        L.out_c = out_c;
        L.has_bn = bn;
        L.has_relu = relu;
        L.w_off = off;
        off += static_cast<size_t>(out_c) * in_c * arch.kernel * arch.kernel;
        L.b_off = off;
        off += out_c;
        if (bn) {
            L.g_off = off;
            off += out_c;
            L.s_off = off;
            off += out_c;
            L.bn_index = static_cast<int>(p.bn_offsets.size());
            p.bn_offsets.push_back(bn_off);
            bn_off += out_c;
        }
        p.layers.push_back(L);
    };

    const int C = arch.channels;
    add_layer(arch.in_bands, C, true, true);                  // first
    for (int m = 0; m < arch.module_count; ++m) {
        for (int j = 0; j < arch.convs_per_module; ++j) add_layer(C, C, true, true);
        add_layer(C, C, false, true);                         // module bypass
    }
    add_layer(arch.concat_channels(), C, true, true);         // concat fusion
    add_layer(C, arch.in_bands, false, false);                // output (linear)

    p.values.assign(off, 0.0);
    p.running_mean.assign(bn_off, 0.0);
    p.running_var.assign(bn_off, 1.0);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, weight_std);
    for (const auto& L : p.layers) {
        size_t nw = static_cast<size_t>(L.out_c) * L.in_c * arch.kernel * arch.kernel;
        for (size_t i = 0; i < nw; ++i) p.values[L.w_off + i] = gauss(rng);
        // biases start at zero; batchnorm scale at one
        if (L.has_bn)
            for (int c = 0; c < L.out_c; ++c) p.values[L.g_off + c] = 1.0;
    }
    return p;
}

namespace {

struct LayerCache {
    Batch in;       // layer input
    Batch pre_bn;   // conv output before normalization (only when has_bn)
    std::vector<double> mean, invstd;
    Batch out;      // layer output (post relu)
};

void conv_forward(const NetworkParams& p, const LayerDesc& L, const Batch& in, Batch& out) {
    const int k = p.arch.kernel, r = k / 2;
    const int H = in.h, W = in.w;
    out = Batch(in.b, L.out_c, H, W);
#pragma omp parallel for schedule(static) collapse(2)
    for (int b = 0; b < in.b; ++b)
        for (int o = 0; o < L.out_c; ++o) {
            double* dst = out.at(b, o);
            double bias = p.values[L.b_off + o];
            for (size_t i = 0; i < out.plane(); ++i) dst[i] = bias;
            for (int c = 0; c < L.in_c; ++c) {
                const double* src = in.at(b, c);
                const double* w =
                    &p.values[L.w_off + (static_cast<size_t>(o) * L.in_c + c) * k * k];
                for (int y = 0; y < H; ++y)
                    for (int x = 0; x < W; ++x) {
                        double acc = 0;
                        for (int ky = -r; ky <= r; ++ky) {
                            int yy = y + ky;
                            yy = yy < 0 ? yy + H : (yy >= H ? yy - H : yy);
                            for (int kx = -r; kx <= r; ++kx) {
                                int xx = x + kx;
                                xx = xx < 0 ? xx + W : (xx >= W ? xx - W : xx);
                                acc += src[static_cast<size_t>(yy) * W + xx] *
                                       w[(ky + r) * k + (kx + r)];
                            }
                        }
                        dst[static_cast<size_t>(y) * W + x] += acc;
                    }
            }
        }
}

Batch layer_forward(NetworkParams& p, int layer_idx, const Batch& in, bool training,
                    LayerCache* cache) {
    const LayerDesc& L = p.layers[layer_idx];
    Batch out;
    conv_forward(p, L, in, out);
    for (double v : out.v)
        if (!std::isfinite(v))
            throw std::runtime_error("forward: non-finite activation at layer " +
                                     std::to_string(layer_idx));

    if (L.has_bn) {
        if (cache) cache->pre_bn = out;
        const size_t N = static_cast<size_t>(out.b) * out.plane();
        std::vector<double> mean(L.out_c, 0.0), invstd(L.out_c, 0.0);
        size_t rs = p.bn_offsets[L.bn_index];
        if (training) {
            for (int c = 0; c < L.out_c; ++c) {
                double m = 0;
                for (int b = 0; b < out.b; ++b) {
                    const double* x = out.at(b, c);
                    for (size_t i = 0; i < out.plane(); ++i) m += x[i];
                }
                m /= N;
                double v = 0;
                for (int b = 0; b < out.b; ++b) {
                    const double* x = out.at(b, c);
                    for (size_t i = 0; i < out.plane(); ++i) v += (x[i] - m) * (x[i] - m);
                }
                v /= N;
                mean[c] = m;
                invstd[c] = 1.0 / std::sqrt(v + p.bn_eps);
                p.running_mean[rs + c] = p.bn_momentum * p.running_mean[rs + c] +
                                         (1 - p.bn_momentum) * m;
                p.running_var[rs + c] =
                    p.bn_momentum * p.running_var[rs + c] + (1 - p.bn_momentum) * v;
            }
        } else {
            for (int c = 0; c < L.out_c; ++c) {
                mean[c] = p.running_mean[rs + c];
                invstd[c] = 1.0 / std::sqrt(p.running_var[rs + c] + p.bn_eps);
            }
        }
        for (int b = 0; b < out.b; ++b)
            for (int c = 0; c < L.out_c; ++c) {
                double* x = out.at(b, c);
                double g = p.values[L.g_off + c], s = p.values[L.s_off + c];
                for (size_t i = 0; i < out.plane(); ++i)
                    x[i] = g * (x[i] - mean[c]) * invstd[c] + s;
            }
        if (cache) {
            cache->mean = std::move(mean);
            cache->invstd = std::move(invstd);
        }
    }
    if (L.has_relu)
        for (auto& v : out.v) v = v > 0 ? v : 0.0;
    if (cache) {
        cache->in = in;
        cache->out = out;
    }
    return out;
}

// Backward through one layer; returns gradient w.r.t. layer input, adds
// parameter gradients into `grad`.
Batch layer_backward(const NetworkParams& p, int layer_idx, const LayerCache& cache,
                     Batch grad_out, std::vector<double>& grad) {
    const LayerDesc& L = p.layers[layer_idx];
    const int k = p.arch.kernel, r = k / 2;
    const int H = grad_out.h, W = grad_out.w;

    if (L.has_relu) {
        for (size_t i = 0; i < grad_out.v.size(); ++i)
            if (cache.out.v[i] <= 0.0) grad_out.v[i] = 0.0;
    }

    if (L.has_bn) {
        const size_t N = static_cast<size_t>(grad_out.b) * grad_out.plane();
        for (int c = 0; c < L.out_c; ++c) {
            double g = p.values[L.g_off + c];
            double m = cache.mean[c], is = cache.invstd[c];
            double dsum = 0, dxhat_sum = 0;
            for (int b = 0; b < grad_out.b; ++b) {
                const double* dy = grad_out.at(b, c);
                const double* x = cache.pre_bn.at(b, c);
                for (size_t i = 0; i < grad_out.plane(); ++i) {
                    dsum += dy[i];
                    dxhat_sum += dy[i] * (x[i] - m) * is;
                }
            }
            grad[L.s_off + c] += dsum;
            grad[L.g_off + c] += dxhat_sum;
            for (int b = 0; b < grad_out.b; ++b) {
                double* dy = grad_out.at(b, c);
                const double* x = cache.pre_bn.at(b, c);
                for (size_t i = 0; i < grad_out.plane(); ++i) {
                    double xhat = (x[i] - m) * is;
                    dy[i] = g * is * (dy[i] - dsum / N - xhat * dxhat_sum / N);
                }
            }
        }
    }

    // bias gradients
    for (int o = 0; o < L.out_c; ++o) {
        double acc = 0;
        for (int b = 0; b < grad_out.b; ++b) {
            const double* dy = grad_out.at(b, o);
            for (size_t i = 0; i < grad_out.plane(); ++i) acc += dy[i];
        }
        grad[L.b_off + o] += acc;
    }

    // weight gradients: fixed loop order per weight, deterministic
#pragma omp parallel for schedule(static)
    for (int o = 0; o < L.out_c; ++o)
        for (int c = 0; c < L.in_c; ++c) {
            double* gw = &grad[L.w_off + (static_cast<size_t>(o) * L.in_c + c) * k * k];
            for (int b = 0; b < grad_out.b; ++b) {
                const double* dy = grad_out.at(b, o);
                const double* x = cache.in.at(b, c);
                for (int ky = -r; ky <= r; ++ky)
                    for (int kx = -r; kx <= r; ++kx) {
                        double acc = 0;
                        for (int y = 0; y < H; ++y) {
                            int yy = y + ky;
                            yy = yy < 0 ? yy + H : (yy >= H ? yy - H : yy);
                            for (int xx0 = 0; xx0 < W; ++xx0) {
                                int xx = xx0 + kx;
                                xx = xx < 0 ? xx + W : (xx >= W ? xx - W : xx);
                                acc += dy[static_cast<size_t>(y) * W + xx0] *
                                       x[static_cast<size_t>(yy) * W + xx];
                            }
                        }
                        gw[(ky + r) * k + (kx + r)] += acc;
                    }
            }
        }

    // input gradients (correlation transpose)
    Batch grad_in(grad_out.b, L.in_c, H, W);
#pragma omp parallel for schedule(static) collapse(2)
    for (int b = 0; b < grad_out.b; ++b)
        for (int c = 0; c < L.in_c; ++c) {
            double* dst = grad_in.at(b, c);
            for (int o = 0; o < L.out_c; ++o) {
                const double* dy = grad_out.at(b, o);
                const double* w =
                    &p.values[L.w_off + (static_cast<size_t>(o) * L.in_c + c) * k * k];
                for (int y = 0; y < H; ++y)
                    for (int x = 0; x < W; ++x) {
                        double acc = 0;
                        for (int ky = -r; ky <= r; ++ky) {
                            int yy = y - ky;
                            yy = yy < 0 ? yy + H : (yy >= H ? yy - H : yy);
                            for (int kx = -r; kx <= r; ++kx) {
                                int xx = x - kx;
                                xx = xx < 0 ? xx + W : (xx >= W ? xx - W : xx);
                                acc += dy[static_cast<size_t>(yy) * W + xx] *
                                       w[(ky + r) * k + (kx + r)];
                            }
                        }
                        dst[static_cast<size_t>(y) * W + x] += acc;
                    }
            }
        }
    return grad_in;
}

struct TrunkCaches {
    std::vector<LayerCache> caches;        // one per layer
    std::vector<Batch> module_out;         // module outputs (post add)
    Batch f0;
    Batch concat;
};

// Runs the trunk and returns the residual estimate. Layer indexing follows
// NetworkParams::init: [first, (convs..., bypass) x modules, fuse, out].
Batch run_trunk(NetworkParams& p, const Batch& input, bool training, TrunkCaches* tc) {
    const ArchConfig& a = p.arch;
    if (input.c != a.in_bands) throw std::invalid_argument("forward: band count mismatch");
    if (tc) tc->caches.resize(p.layers.size());
    auto cache_at = [&](int idx) { return tc ? &tc->caches[idx] : nullptr; };

    int li = 0;
    Batch f0 = layer_forward(p, li, input, training, cache_at(li));
    ++li;
    if (tc) tc->f0 = f0;

    Batch prev = f0;
    std::vector<Batch> module_out;
    for (int m = 0; m < a.module_count; ++m) {
        Batch t = prev;
        for (int j = 0; j < a.convs_per_module; ++j) {
            t = layer_forward(p, li, t, training, cache_at(li));
            ++li;
        }
        Batch byp = layer_forward(p, li, prev, training, cache_at(li));
        ++li;
        for (size_t i = 0; i < t.v.size(); ++i) t.v[i] += byp.v[i];
        module_out.push_back(t);
        prev = module_out.back();
    }

    Batch cat(input.b, a.concat_channels(), input.h, input.w);
    for (int b = 0; b < input.b; ++b) {
        int c_out = 0;
        auto copy_block = [&](const Batch& src) {
            for (int c = 0; c < src.c; ++c, ++c_out)
                std::copy(src.at(b, c), src.at(b, c) + src.plane(), cat.at(b, c_out));
        };
        copy_block(f0);
        for (const auto& mo : module_out) copy_block(mo);
    }
    if (tc) {
        tc->module_out = module_out;
        tc->concat = cat;
    }

    Batch fused = layer_forward(p, li, cat, training, cache_at(li));
    ++li;
    Batch residual = layer_forward(p, li, fused, training, cache_at(li));
    return residual;
}

}  // namespace

Batch forward_residual(NetworkParams& params, const Batch& input, bool training) {
    return run_trunk(params, input, training, nullptr);
}

Batch forward(NetworkParams& params, const Batch& input, bool training) {
    Batch res = run_trunk(params, input, training, nullptr);
    Batch out = input;
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] -= res.v[i];
    return out;
}

std::vector<Batch> module_outputs(NetworkParams& params, const Batch& input) {
    TrunkCaches tc;
    run_trunk(params, input, false, &tc);
    return tc.module_out;
}

LossGrad loss_and_grad(NetworkParams& params, const Batch& input, const Batch& target) {
    if (input.b < 1) throw std::invalid_argument("loss_and_grad: empty batch");
    if (target.v.size() != input.v.size())
        throw std::invalid_argument("loss_and_grad: target shape mismatch");

    TrunkCaches tc;
    Batch residual = run_trunk(params, input, true, &tc);

    LossGrad lg;
    lg.grad.assign(params.values.size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(residual.v.size());
    Batch dres(residual.b, residual.c, residual.h, residual.w);
    for (size_t i = 0; i < residual.v.size(); ++i) {
        double d = residual.v[i] - target.v[i];
        lg.loss += d * d;
        dres.v[i] = 2.0 * d * inv_n;
    }
    lg.loss *= inv_n;

    const ArchConfig& a = params.arch;
    int li = static_cast<int>(params.layers.size()) - 1;
    Batch dfused = layer_backward(params, li, tc.caches[li], std::move(dres), lg.grad);
    --li;
    Batch dcat = layer_backward(params, li, tc.caches[li], std::move(dfused), lg.grad);
    --li;

    // split concat gradient
    const int C = a.channels;
    auto slice = [&](int block) {
        Batch g(input.b, C, input.h, input.w);
        for (int b = 0; b < input.b; ++b)
            for (int c = 0; c < C; ++c)
                std::copy(dcat.at(b, block * C + c), dcat.at(b, block * C + c) + g.plane(),
                          g.at(b, c));
        return g;
    };

    Batch df0 = slice(0);
    // modules in reverse; d_prev carries gradient flowing into module input
    Batch d_modout;
    for (int m = a.module_count - 1; m >= 0; --m) {
        Batch dm = slice(m + 1);
        if (m == a.module_count - 1) {
            d_modout = std::move(dm);
        } else {
            for (size_t i = 0; i < d_modout.v.size(); ++i) d_modout.v[i] += dm.v[i];
        }
        int bypass_idx = 1 + m * (a.convs_per_module + 1) + a.convs_per_module;
        Batch d_prev_bypass =
            layer_backward(params, bypass_idx, tc.caches[bypass_idx], d_modout, lg.grad);
        Batch d_t = std::move(d_modout);
        for (int j = a.convs_per_module - 1; j >= 0; --j) {
            int idx = 1 + m * (a.convs_per_module + 1) + j;
            d_t = layer_backward(params, idx, tc.caches[idx], std::move(d_t), lg.grad);
        }
        for (size_t i = 0; i < d_t.v.size(); ++i) d_t.v[i] += d_prev_bypass.v[i];
        d_modout = std::move(d_t);  // gradient w.r.t. previous module output (or f0)
    }
    for (size_t i = 0; i < df0.v.size(); ++i) df0.v[i] += d_modout.v[i];
    layer_backward(params, 0, tc.caches[0], std::move(df0), lg.grad);
    return lg;
}

namespace {

void flip_patch(std::vector<double>& v, int c, int h, int w, bool horiz, bool vert) {
    for (int ci = 0; ci < c; ++ci) {
        double* p = v.data() + static_cast<size_t>(ci) * h * w;
        if (horiz)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w / 2; ++x) std::swap(p[y * w + x], p[y * w + (w - 1 - x)]);
        if (vert)
            for (int y = 0; y < h / 2; ++y)
                for (int x = 0; x < w; ++x) std::swap(p[y * w + x], p[(h - 1 - y) * w + x]);
    }
}

}  // namespace

TrainResult train(NetworkParams& params, std::vector<TrainingSample> dataset,
                  const TrainConfig& cfg) {
    const ArchConfig& a = params.arch;
    if (cfg.stages < 1 || cfg.stages > 3) throw std::invalid_argument("train: stages must be 1..3");
    if (static_cast<int>(cfg.stage_epochs.size()) < cfg.stages)
        throw std::invalid_argument("train: missing per-stage epoch counts");
    const size_t sample_len = static_cast<size_t>(a.in_bands) * a.patch_h * a.patch_w;

    std::vector<const TrainingSample*> db0;
    for (const auto& s : dataset) {
        if (s.input.size() != sample_len || s.target.size() != sample_len)
            throw std::invalid_argument("train: sample shape mismatch");
        if (s.stage == TrainingSample::Stage::Db0) db0.push_back(&s);
    }
    if (db0.empty()) throw std::invalid_argument("train: no stage-1 samples");

    std::mt19937_64 rng(cfg.seed);
    TrainResult result;

    // crude total-step estimate for the exponential lr schedule
    long total_steps = 0;
    for (int s = 0; s < cfg.stages; ++s) {
        long n = static_cast<long>(db0.size()) * (s + 1);
        total_steps += cfg.stage_epochs[s] * std::max<long>(1, (n + cfg.batch_size - 1) / cfg.batch_size);
    }
    const double decay = std::log(cfg.lr_final / cfg.lr_initial);

    std::vector<TrainingSample> dbi, identity;
    long step = 0;

    auto regenerate_dbi = [&]() {
        dbi.clear();
        for (const auto* s : db0) {
            Batch in(1, a.in_bands, a.patch_h, a.patch_w);
            in.v = s->input;
            Batch pred = forward_residual(params, in, false);
            TrainingSample ns;
            ns.stage = TrainingSample::Stage::DbI;
            ns.input.resize(sample_len);
            ns.target.resize(sample_len);
            for (size_t i = 0; i < sample_len; ++i) {
                ns.input[i] = s->input[i] - pred.v[i];
                ns.target[i] = s->target[i] - pred.v[i];
            }
            dbi.push_back(std::move(ns));
        }
    };

    for (int stage = 1; stage <= cfg.stages; ++stage) {
        if (stage == 3) {
            identity.clear();
            for (const auto* s : db0) {
                TrainingSample ns;
                ns.stage = TrainingSample::Stage::Identity;
                ns.input.resize(sample_len);
                ns.target.assign(sample_len, 0.0);
                for (size_t i = 0; i < sample_len; ++i) ns.input[i] = s->input[i] - s->target[i];
                identity.push_back(std::move(ns));
            }
        }
        for (int epoch = 0; epoch < cfg.stage_epochs[stage - 1]; ++epoch) {
            if (stage == 2 && epoch % cfg.dbi_refresh_epochs == 0) regenerate_dbi();

            std::vector<const TrainingSample*> active = db0;
            if (stage >= 2)
                for (const auto& s : dbi) active.push_back(&s);
            if (stage >= 3)
                for (const auto& s : identity) active.push_back(&s);
            std::shuffle(active.begin(), active.end(), rng);

            for (size_t base = 0; base < active.size(); base += cfg.batch_size) {
                int bs = static_cast<int>(std::min<size_t>(cfg.batch_size, active.size() - base));
                Batch in(bs, a.in_bands, a.patch_h, a.patch_w);
                Batch tgt(bs, a.in_bands, a.patch_h, a.patch_w);
                for (int b = 0; b < bs; ++b) {
                    std::vector<double> iv = active[base + b]->input;
                    std::vector<double> tv = active[base + b]->target;
                    if (cfg.augment_flips) {
                        bool fh = rng() & 1, fv = rng() & 1;
                        flip_patch(iv, a.in_bands, a.patch_h, a.patch_w, fh, fv);
                        flip_patch(tv, a.in_bands, a.patch_h, a.patch_w, fh, fv);
                    }
                    std::copy(iv.begin(), iv.end(), in.v.begin() + static_cast<size_t>(b) * sample_len);
                    std::copy(tv.begin(), tv.end(),
                              tgt.v.begin() + static_cast<size_t>(b) * sample_len);
                }
                auto lg = loss_and_grad(params, in, tgt);
                if (!std::isfinite(lg.loss) || lg.loss > cfg.divergence_limit)
                    throw std::runtime_error("train: divergence at step " + std::to_string(step) +
                                             " (loss=" + std::to_string(lg.loss) + ")");
                double lr = cfg.lr_initial *
                            std::exp(decay * static_cast<double>(step) / std::max<long>(1, total_steps));
                for (size_t i = 0; i < params.values.size(); ++i) {
                    double g = std::clamp(lg.grad[i], -cfg.clip, cfg.clip);
                    params.values[i] -= lr * g;
                }
                result.loss_curve.push_back(lg.loss);
                ++step;
            }
        }
    }
    result.steps = static_cast<int>(step);
    return result;
}

Image infer_image(NetworkParams& params, const Image& image, const DirectionalTransform& transform,
                  int patch_stride) {
    const ArchConfig& a = params.arch;
    if (transform.band_count() != a.in_bands)
        throw std::invalid_argument("infer_image: transform band count does not match network");
    if (patch_stride < 1) throw std::invalid_argument("infer_image: stride must be >= 1");

    SubbandStack stack = transform.forward(image);
    PatchSet ps = extract_patches(stack, a.patch_h, a.patch_w, patch_stride);

    const int group = 8;
    for (size_t base = 0; base < ps.patches.size(); base += group) {
        int bs = static_cast<int>(std::min<size_t>(group, ps.patches.size() - base));
        Batch in(bs, a.in_bands, a.patch_h, a.patch_w);
        for (int b = 0; b < bs; ++b)
            std::copy(ps.patches[base + b].begin(), ps.patches[base + b].end(),
                      in.v.begin() + static_cast<size_t>(b) * ps.patch_elems());
        Batch out = forward(params, in, false);
        for (int b = 0; b < bs; ++b)
            std::copy(out.v.begin() + static_cast<size_t>(b) * ps.patch_elems(),
                      out.v.begin() + static_cast<size_t>(b + 1) * ps.patch_elems(),
                      ps.patches[base + b].begin());
    }
    SubbandStack denoised = average_patches(ps);
    return transform.inverse(denoised);
}

}  // namespace fdn
