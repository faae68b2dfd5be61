#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fdn {

// 2-D real-valued grid. Row-major, 64-bit reals. Immutable by convention
// after construction (operations return new objects).
struct Image {
    int height = 0;
    int width = 0;
    std::vector<double> data;  // height*width

    Image() = default;
    Image(int h, int w, double fill = 0.0);
    Image(int h, int w, std::vector<double> d);

    double& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
    double at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
    // circular access
    double wrap(int y, int x) const;
    size_t size() const { return data.size(); }

    void validate() const;  // throws on non-finite or shape mismatch
};

// Ordered list of equally sized bands (the multi-channel subband signal).
struct SubbandStack {
    std::vector<Image> bands;

    SubbandStack() = default;
    explicit SubbandStack(std::vector<Image> b);

    int band_count() const { return static_cast<int>(bands.size()); }
    int height() const { return bands.empty() ? 0 : bands[0].height; }
    int width() const { return bands.empty() ? 0 : bands[0].width; }
};

// Patches cut on a stride grid with circular extension; the same spatial
// locations across all bands.
struct PatchSet {
    int patch_h = 0, patch_w = 0;
    int stride = 0;
    int source_h = 0, source_w = 0;
    int band_count = 0;
    std::vector<std::pair<int, int>> locations;        // top-left (y, x)
    std::vector<std::vector<double>> patches;          // per location: band*ph*pw

    size_t patch_elems() const {
        return static_cast<size_t>(band_count) * patch_h * patch_w;
    }
};

PatchSet extract_patches(const SubbandStack& stack, int patch_h, int patch_w, int stride);

// Overlap-averaged recomposition: each pixel is the mean of all patch values
// covering it. Inverse of extract_patches when patches are untouched.
SubbandStack average_patches(const PatchSet& patches);

}  // namespace fdn
