#pragma once

#include <string>
#include <vector>

#include "fdn/directional.hpp"
#include "fdn/image.hpp"
#include "fdn/wavresnet.hpp"

namespace fdn {

struct Sinogram {
    std::vector<double> angles;  // radians
    int bins = 0;
    std::vector<double> data;    // angles x bins, row-major (line integrals)
    bool photon_starved = false;

    double& at(int a, int b) { return data[static_cast<size_t>(a) * bins + b]; }
    double at(int a, int b) const { return data[static_cast<size_t>(a) * bins + b]; }
};

struct DoseConfig {
    double incident_photons = 1e5;  // I0 at full dose
    double dose_fraction = 1.0;     // in (0, 1]
};

// kinds: "empty", "disk", "ellipses" (fixed composite), "random-ellipses"
// (deterministic family indexed by seed).
Image make_phantom(const std::string& kind, int size, unsigned long long seed = 0);

// Parallel-beam forward projection: ray marching with bilinear sampling,
// detector spacing = width / bins, pixel spacing 1.
Sinogram project(const Image& x, const std::vector<double>& angles, int bins);

std::vector<double> uniform_angles(int count);  // [0, pi)

// Poisson resampling in the count domain: N = I0*frac*exp(-p), N^ ~ Poisson,
// p^ = -log(max(N^,1)/(I0*frac)). Seeded and reproducible.
Sinogram apply_low_dose(const Sinogram& s, const DoseConfig& cfg, unsigned long long seed);

// Ramp-filtered (Ram-Lak) backprojection onto a size x size grid.
Image fbp(const Sinogram& s, int size);

struct DatasetPair {
    Image low;        // FBP of low-dose sinogram
    Image full;       // FBP of full-dose sinogram
    Image phantom;    // ground-truth attenuation map
    double fraction = 1.0;
    unsigned long long seed = 0;
};

struct DatasetConfig {
    std::string phantom_kind = "random-ellipses";
    int size = 64;
    int angles = 120;
    int bins = 96;
    DoseConfig dose;
    std::vector<double> fractions = {0.13, 0.25, 0.5};
    int count = 8;  // pairs per fraction
    unsigned long long seed = 1;
};

std::vector<DatasetPair> make_pairs(const DatasetConfig& cfg);

// Subband residual training samples (paired low/full reconstructions pushed
// through the transform, cut into patches on a stride grid).
std::vector<TrainingSample> make_dataset(const std::vector<DatasetPair>& pairs,
                                         const DirectionalTransform& transform, int patch_h,
                                         int patch_w, int stride);

}  // namespace fdn
