#pragma once

#include <string>
#include <vector>

#include "fdn/directional.hpp"
#include "fdn/image.hpp"
#include "fdn/wavresnet.hpp"

namespace fdn {

// Raw tensor container: magic "FDTN0001", u32 ndim, u32 dims..., f64 LE data.
void save_tensor(const std::string& path, const std::vector<double>& data,
                 const std::vector<unsigned>& dims);
std::vector<double> load_tensor(const std::string& path, std::vector<unsigned>& dims);

void save_image(const std::string& path, const Image& img);  // tensor container, dims {h, w}
Image load_image(const std::string& path);

// 16-bit binary PGM for visual outputs; values clamped to [lo, hi].
void save_pgm16(const std::string& path, const Image& img, double lo, double hi);

// Model checkpoint: magic "FDCK0001", u32 header length, JSON header (arch,
// transform, momentum/eps), f32 LE values + running stats, u64 FNV-1a
// checksum of everything before it.
void save_checkpoint(const std::string& path, const NetworkParams& params, int transform_levels,
                     const std::vector<int>& transform_dirs, bool transform_merge);

struct Checkpoint {
    NetworkParams params;
    int transform_levels = 0;
    std::vector<int> transform_dirs;
    bool transform_merge = false;

    DirectionalTransform make_transform() const {
        return DirectionalTransform(transform_levels, transform_dirs, transform_merge);
    }
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace fdn
