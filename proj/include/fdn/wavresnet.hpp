#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fdn/directional.hpp"
#include "fdn/image.hpp"

namespace fdn {

struct ArchConfig {
    int in_bands = 15;
    int channels = 16;         // full-scale: 128
    int module_count = 3;      // full-scale: 6
    int convs_per_module = 3;
    int kernel = 3;            // odd
    int patch_h = 33;          // full-scale: 55
    int patch_w = 33;

    void validate() const;
    int concat_channels() const { return (module_count + 1) * channels; }
};

// One learned layer: conv weights [out][in][k][k] + bias, optional batchnorm
// scale/shift, optional ReLU. All trainable scalars live in one flat vector
// shared across layers (NetworkParams::values).
struct LayerDesc {
    int in_c = 0, out_c = 0;
    bool has_bn = false;
    bool has_relu = false;
    size_t w_off = 0, b_off = 0;   // into values
    size_t g_off = 0, s_off = 0;   // batchnorm gamma/shift, if has_bn
    int bn_index = -1;             // into running stats arrays
};

struct NetworkParams {
    ArchConfig arch;
    std::vector<LayerDesc> layers;       // derived from arch, fixed order
    std::vector<double> values;          // all trainable scalars
    std::vector<double> running_mean;    // bn_count * channels-of-layer, packed
    std::vector<double> running_var;
    std::vector<size_t> bn_offsets;      // offset of each bn layer in running arrays
    double bn_momentum = 0.9;
    double bn_eps = 1e-5;

    static NetworkParams init(const ArchConfig& arch, unsigned long long seed,
                              double weight_std = 0.01);
    size_t param_count() const { return values.size(); }
    // index of the final (output) conv layer in `layers`
    int output_layer() const { return static_cast<int>(layers.size()) - 1; }
};

// Batched activation tensor [B][C][H][W].
struct Batch {
    int b = 0, c = 0, h = 0, w = 0;
    std::vector<double> v;

    Batch() = default;
    Batch(int b_, int c_, int h_, int w_)
        : b(b_), c(c_), h(h_), w(w_),
          v(static_cast<size_t>(b_) * c_ * h_ * w_, 0.0) {}
    size_t plane() const { return static_cast<size_t>(h) * w; }
    double* at(int bi, int ci) { return v.data() + (static_cast<size_t>(bi) * c + ci) * plane(); }
    const double* at(int bi, int ci) const {
        return v.data() + (static_cast<size_t>(bi) * c + ci) * plane();
    }
};

struct TrainingSample {
    std::vector<double> input;   // bands * h * w (subband patch)
    std::vector<double> target;  // residual coefficients, same shape
    enum class Stage { Db0, DbI, Identity } stage = Stage::Db0;
};

// Forward pass. Training mode uses batch statistics and records them into
// running stats; inference mode is deterministic via running averages.
// Output = input - trunk residual (end-to-end bypass).
Batch forward(NetworkParams& params, const Batch& input, bool training);
// Trunk residual alone (what the loss is defined on).
Batch forward_residual(NetworkParams& params, const Batch& input, bool training);

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;  // same layout as NetworkParams::values
};

// MSE between predicted and target residual coefficients; reverse-mode
// gradients through conv, batchnorm, ReLU, concat and bypasses.
LossGrad loss_and_grad(NetworkParams& params, const Batch& input, const Batch& target);

struct TrainConfig {
    double lr_initial = 0.01;
    double lr_final = 1e-4;
    double clip = 1e-3;        // per-coordinate gradient clip range [-clip, clip]
    int batch_size = 10;
    std::vector<int> stage_epochs = {40, 20, 20};  // per stage, in order
    int stages = 3;            // 1 = DB0 only, 2 = +DB_i, 3 = +identity
    int dbi_refresh_epochs = 50;
    bool augment_flips = true;
    double divergence_limit = 1e6;
    unsigned long long seed = 1;
};

struct TrainResult {
    std::vector<double> loss_curve;  // per step
    int steps = 0;
};

TrainResult train(NetworkParams& params, std::vector<TrainingSample> dataset,
                  const TrainConfig& cfg);

// transform -> patches -> per-patch network -> patch averaging -> inverse.
Image infer_image(NetworkParams& params, const Image& image, const DirectionalTransform& transform,
                  int patch_stride);

// Per-module feature maps on a probe image patch (inference mode), for the
// singular-spectrum diagnostics: element i is the output of module i+1.
std::vector<Batch> module_outputs(NetworkParams& params, const Batch& input);

}  // namespace fdn
