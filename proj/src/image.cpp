#include "fdn/image.hpp"

#include <cmath>

namespace fdn {

Image::Image(int h, int w, double fill) : height(h), width(w) {
    if (h <= 0 || w <= 0) throw std::invalid_argument("Image: non-positive dimensions");
    data.assign(static_cast<size_t>(h) * w, fill);
}

Image::Image(int h, int w, std::vector<double> d) : height(h), width(w), data(std::move(d)) {
    if (h <= 0 || w <= 0) throw std::invalid_argument("Image: non-positive dimensions");
    if (data.size() != static_cast<size_t>(h) * w)
        throw std::invalid_argument("Image: data length does not match dimensions");
}

double Image::wrap(int y, int x) const {
    y %= height;
    if (y < 0) y += height;
    x %= width;
    if (x < 0) x += width;
    return at(y, x);
}

void Image::validate() const {
    if (data.size() != static_cast<size_t>(height) * width)
        throw std::invalid_argument("Image: data length does not match dimensions");
    for (double v : data)
        if (!std::isfinite(v)) throw std::invalid_argument("Image: non-finite value");
}

SubbandStack::SubbandStack(std::vector<Image> b) : bands(std::move(b)) {
    for (const auto& im : bands)
        if (im.height != bands[0].height || im.width != bands[0].width)
            throw std::invalid_argument("SubbandStack: bands differ in size");
}

PatchSet extract_patches(const SubbandStack& stack, int patch_h, int patch_w, int stride) {
    if (patch_h <= 0 || patch_w <= 0) throw std::invalid_argument("extract_patches: non-positive patch size");
    if (stride <= 0) throw std::invalid_argument("extract_patches: non-positive stride");
    if (stack.band_count() < 1) throw std::invalid_argument("extract_patches: empty stack");

    PatchSet ps;
    ps.patch_h = patch_h;
    ps.patch_w = patch_w;
    ps.stride = stride;
    ps.source_h = stack.height();
    ps.source_w = stack.width();
    ps.band_count = stack.band_count();

    for (int y = 0; y < ps.source_h; y += stride)
        for (int x = 0; x < ps.source_w; x += stride)
            ps.locations.emplace_back(y, x);

    ps.patches.resize(ps.locations.size());
#pragma omp parallel for schedule(static)
    for (long li = 0; li < static_cast<long>(ps.locations.size()); ++li) {
        auto [y0, x0] = ps.locations[li];
        std::vector<double> p(ps.patch_elems());
        size_t k = 0;
        for (int b = 0; b < ps.band_count; ++b)
            for (int dy = 0; dy < patch_h; ++dy)
                for (int dx = 0; dx < patch_w; ++dx)
                    p[k++] = stack.bands[b].wrap(y0 + dy, x0 + dx);
        ps.patches[li] = std::move(p);
    }
    return ps;
}

SubbandStack average_patches(const PatchSet& ps) {
    if (ps.locations.empty()) throw std::invalid_argument("average_patches: empty patch set");

    const int H = ps.source_h, W = ps.source_w;
    std::vector<Image> bands(ps.band_count, Image(H, W, 0.0));
    std::vector<double> counts(static_cast<size_t>(H) * W, 0.0);

    // Accumulation runs over patches in index order per band: deterministic
    // under any thread count (bands are independent).
#pragma omp parallel for schedule(static)
    for (int b = 0; b < ps.band_count; ++b) {
        Image& out = bands[b];
        for (size_t li = 0; li < ps.locations.size(); ++li) {
            auto [y0, x0] = ps.locations[li];
            const double* p = ps.patches[li].data() + static_cast<size_t>(b) * ps.patch_h * ps.patch_w;
            for (int dy = 0; dy < ps.patch_h; ++dy) {
                int y = (y0 + dy) % H;
                for (int dx = 0; dx < ps.patch_w; ++dx) {
                    int x = (x0 + dx) % W;
                    out.at(y, x) += p[dy * ps.patch_w + dx];
                }
            }
        }
    }
    // coverage counts are band-independent
    for (size_t li = 0; li < ps.locations.size(); ++li) {
        auto [y0, x0] = ps.locations[li];
        for (int dy = 0; dy < ps.patch_h; ++dy) {
            int y = (y0 + dy) % H;
            for (int dx = 0; dx < ps.patch_w; ++dx)
                counts[static_cast<size_t>(y) * W + (x0 + dx) % W] += 1.0;
        }
    }
    for (auto& im : bands)
        for (size_t i = 0; i < im.data.size(); ++i) im.data[i] /= counts[i];
    return SubbandStack(std::move(bands));
}

}  // namespace fdn
