#include "fdn/ctsim.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace fdn {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Ellipse {
    double cx, cy;      // center, in [-1, 1] coords
    double rx, ry;      // semi-axes
    double angle;       // radians
    double value;       // additive attenuation
};

void render(Image& img, const std::vector<Ellipse>& ellipses) {
    const int n = img.height;
    const double scale = 2.0 / n;
    // Attenuation per pixel scales as 1/n so line integrals through the
    // object stay O(1) at any resolution; keeps photon counts physical.
    const double atten = 4.0 / n;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            double px = (x + 0.5) * scale - 1.0;
            double py = (y + 0.5) * scale - 1.0;
            double acc = 0;
            for (const auto& e : ellipses) {
                double dx = px - e.cx, dy = py - e.cy;
                double c = std::cos(e.angle), s = std::sin(e.angle);
                double u = (c * dx + s * dy) / e.rx;
                double v = (-s * dx + c * dy) / e.ry;
                if (u * u + v * v <= 1.0) acc += e.value;
            }
            img.at(y, x) = acc * atten;
        }
}

}  // namespace

Image make_phantom(const std::string& kind, int size, unsigned long long seed) {
    if (size < 32) throw std::invalid_argument("make_phantom: size must be >= 32");
    Image img(size, size, 0.0);
    if (kind == "empty") return img;
    if (kind == "disk") {
        render(img, {{0, 0, 0.6, 0.6, 0, 1.0}});
        return img;
    }
    if (kind == "ellipses") {
        render(img, {{0.0, 0.0, 0.86, 0.86, 0.0, 0.5},
                     {0.0, 0.0, 0.78, 0.78, 0.0, 0.3},
                     {-0.25, -0.15, 0.26, 0.36, 0.4, 0.25},
                     {0.25, -0.15, 0.22, 0.30, -0.4, -0.2},
                     {0.0, 0.35, 0.18, 0.12, 0.0, 0.35},
                     {-0.05, 0.1, 0.046, 0.046, 0.0, 0.3},
                     {0.06, 0.55, 0.06, 0.04, 0.5, -0.15}});
        return img;
    }
    if (kind == "random-ellipses") {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        std::vector<Ellipse> es;
        es.push_back({0, 0, 0.8 + 0.1 * uni(rng), 0.8 + 0.1 * uni(rng), 0, 0.4 + 0.2 * uni(rng)});
        int inner = 3 + static_cast<int>(uni(rng) * 4);
        for (int i = 0; i < inner; ++i) {
            double r = 0.06 + 0.3 * uni(rng);
            es.push_back({-0.5 + uni(rng), -0.5 + uni(rng), r, 0.06 + 0.3 * uni(rng),
                          kPi * uni(rng), (uni(rng) < 0.5 ? -1 : 1) * (0.1 + 0.3 * uni(rng))});
        }
        render(img, es);
        for (auto& v : img.data) v = std::max(v, 0.0);
        return img;
    }
    throw std::invalid_argument("make_phantom: unknown kind '" + kind + "'");
}

Sinogram project(const Image& x, const std::vector<double>& angles, int bins) {
    if (angles.empty()) throw std::invalid_argument("project: no angles");
    if (bins < 1) throw std::invalid_argument("project: bins < 1");
    Sinogram s;
    s.angles = angles;
    s.bins = bins;
    s.data.assign(angles.size() * bins, 0.0);

    const int H = x.height, W = x.width;
    const double cx = (W - 1) / 2.0, cy = (H - 1) / 2.0;
    const double spacing = static_cast<double>(W) / bins;
    const double half_len = std::hypot(W, H) / 2.0;
    const double step = 0.5;

#pragma omp parallel for schedule(static)
    for (long a = 0; a < static_cast<long>(angles.size()); ++a) {
        double c = std::cos(angles[a]), sn = std::sin(angles[a]);
        for (int b = 0; b < bins; ++b) {
            double t = (b - (bins - 1) / 2.0) * spacing;
            double acc = 0;
            for (double r = -half_len; r <= half_len; r += step) {
                // detector axis (c, sn), ray direction (-sn, c)
                double px = cx + t * c - r * sn;
                double py = cy + t * sn + r * c;
                int ix = static_cast<int>(std::floor(px));
                int iy = static_cast<int>(std::floor(py));
                if (ix < 0 || iy < 0 || ix >= W - 1 || iy >= H - 1) continue;
                double fx = px - ix, fy = py - iy;
                acc += (1 - fx) * (1 - fy) * x.at(iy, ix) + fx * (1 - fy) * x.at(iy, ix + 1) +
                       (1 - fx) * fy * x.at(iy + 1, ix) + fx * fy * x.at(iy + 1, ix + 1);
            }
            s.at(static_cast<int>(a), b) = acc * step;
        }
    }
    return s;
}

std::vector<double> uniform_angles(int count) {
    std::vector<double> a(count);
    for (int i = 0; i < count; ++i) a[i] = kPi * i / count;
    return a;
}

Sinogram apply_low_dose(const Sinogram& s, const DoseConfig& cfg, unsigned long long seed) {
    if (cfg.dose_fraction <= 0.0 || cfg.dose_fraction > 1.0)
        throw std::invalid_argument("apply_low_dose: dose fraction outside (0,1]");
    if (cfg.incident_photons * cfg.dose_fraction < 1.0)
        throw std::invalid_argument("apply_low_dose: flux below one photon");
    Sinogram out = s;
    const double flux = cfg.incident_photons * cfg.dose_fraction;
    std::mt19937_64 rng(seed);
    for (auto& p : out.data) {
        double expected = flux * std::exp(-p);
        if (expected < 1.0) out.photon_starved = true;
        std::poisson_distribution<long long> pois(expected);
        double counted = std::max<double>(1.0, static_cast<double>(pois(rng)));
        p = -std::log(counted / flux);
    }
    return out;
}

Image fbp(const Sinogram& s, int size) {
    const int na = static_cast<int>(s.angles.size());
    if (na < 8) throw std::invalid_argument("fbp: need at least 8 angles");
    const int nb = s.bins;
    const double spacing = static_cast<double>(size) / nb;

    // Ram-Lak kernel in the spatial domain
    std::vector<double> kernel(2 * nb - 1, 0.0);
    for (int k = -(nb - 1); k <= nb - 1; ++k) {
        double v = 0;
        if (k == 0)
            v = 1.0 / (4.0 * spacing * spacing);
        else if (k % 2 != 0)
            v = -1.0 / (kPi * kPi * k * k * spacing * spacing);
        kernel[k + nb - 1] = v;
    }

    std::vector<double> filtered(static_cast<size_t>(na) * nb, 0.0);
#pragma omp parallel for schedule(static)
    for (int a = 0; a < na; ++a)
        for (int b = 0; b < nb; ++b) {
            double acc = 0;
            for (int j = 0; j < nb; ++j) acc += s.at(a, j) * kernel[b - j + nb - 1];
            filtered[static_cast<size_t>(a) * nb + b] = acc * spacing;
        }

    Image img(size, size, 0.0);
    const double cx = (size - 1) / 2.0, cy = (size - 1) / 2.0;
    const double weight = kPi / na;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            double acc = 0;
            for (int a = 0; a < na; ++a) {
                double c = std::cos(s.angles[a]), sn = std::sin(s.angles[a]);
                double t = (x - cx) * c + (y - cy) * sn;
                double pos = t / spacing + (nb - 1) / 2.0;
                int ib = static_cast<int>(std::floor(pos));
                if (ib < 0 || ib >= nb - 1) continue;
                double f = pos - ib;
                acc += (1 - f) * filtered[static_cast<size_t>(a) * nb + ib] +
                       f * filtered[static_cast<size_t>(a) * nb + ib + 1];
            }
            img.at(y, x) = acc * weight;
        }
    return img;
}

std::vector<DatasetPair> make_pairs(const DatasetConfig& cfg) {
    if (cfg.count < 1) throw std::invalid_argument("make_pairs: count < 1");
    auto angles = uniform_angles(cfg.angles);
    std::vector<DatasetPair> pairs;
    long index = 0;
    for (double frac : cfg.fractions) {
        if (frac <= 0 || frac > 1) throw std::invalid_argument("make_pairs: fraction outside (0,1]");
        for (int i = 0; i < cfg.count; ++i, ++index) {
            unsigned long long sample_seed = cfg.seed + static_cast<unsigned long long>(index);
            DatasetPair p;
            p.phantom = make_phantom(cfg.phantom_kind, cfg.size, sample_seed);
            Sinogram sino = project(p.phantom, angles, cfg.bins);
            DoseConfig low = cfg.dose;
            low.dose_fraction = frac;
            DoseConfig full = cfg.dose;
            full.dose_fraction = 1.0;
            p.low = fbp(apply_low_dose(sino, low, sample_seed * 2 + 1), cfg.size);
            p.full = fbp(apply_low_dose(sino, full, sample_seed * 2 + 2), cfg.size);
            p.fraction = frac;
            p.seed = sample_seed;
            pairs.push_back(std::move(p));
        }
    }
    return pairs;
}

std::vector<TrainingSample> make_dataset(const std::vector<DatasetPair>& pairs,
                                         const DirectionalTransform& transform, int patch_h,
                                         int patch_w, int stride) {
    std::vector<TrainingSample> samples;
    for (const auto& pr : pairs) {
        SubbandStack low = transform.forward(pr.low);
        SubbandStack full = transform.forward(pr.full);
        PatchSet pl = extract_patches(low, patch_h, patch_w, stride);
        PatchSet pf = extract_patches(full, patch_h, patch_w, stride);
        for (size_t i = 0; i < pl.patches.size(); ++i) {
            TrainingSample s;
            s.stage = TrainingSample::Stage::Db0;
            s.input = pl.patches[i];
            s.target.resize(s.input.size());
            for (size_t j = 0; j < s.input.size(); ++j)
                s.target[j] = pl.patches[i][j] - pf.patches[i][j];
            samples.push_back(std::move(s));
        }
    }
    return samples;
}

}  // namespace fdn
