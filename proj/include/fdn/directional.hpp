#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "fdn/image.hpp"

namespace fdn {

// Shift-invariant directional subband transform. Undecimated Meyer-style
// radial pyramid crossed with raised-cosine angular fans, designed directly
// in the frequency domain so that sum_k T_k(w)^2 = 1 on every grid, which
// gives the exact resolution of identity sum_k T~_k^T T_k = I with dual
// multipliers equal to the analysis multipliers.
class DirectionalTransform {
  public:
    // directions_per_level: finest level first, each a power of two.
    // merge_lowpass folds the residual lowpass into the coarsest band
    // (requires directions_per_level.back() == 1); with levels=4 and
    // [8,4,2,1] this yields the 15-channel configuration.
    DirectionalTransform(int levels, std::vector<int> directions_per_level,
                         bool merge_lowpass = false);

    int levels() const { return levels_; }
    const std::vector<int>& directions_per_level() const { return dirs_; }
    bool merge_lowpass() const { return merge_; }
    int band_count() const { return band_count_; }

    SubbandStack forward(const Image& x) const;
    Image inverse(const SubbandStack& stack) const;

    // Max |sum_k T_k^2 - 1| over the h x w frequency grid.
    double identity_residual(int h, int w) const;

    // Frequency multipliers for a given grid (band-major, h*w each).
    const std::vector<std::vector<double>>& spectra(int h, int w) const;

  private:
    int levels_ = 0;
    std::vector<int> dirs_;
    bool merge_ = false;
    int band_count_ = 0;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::pair<int, int>, std::shared_ptr<std::vector<std::vector<double>>>> cache_;

    std::shared_ptr<std::vector<std::vector<double>>> build_spectra(int h, int w) const;
};

DirectionalTransform build_transform(int levels, const std::vector<int>& directions_per_level,
                                     bool merge_lowpass = false);

}  // namespace fdn
