// fdnctl: command-line driver for dataset generation, training, denoising,
// spectrum diagnostics, verification and metrics.

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fdn/classical.hpp"
#include "fdn/ctsim.hpp"
#include "fdn/directional.hpp"
#include "fdn/framelets.hpp"
#include "fdn/hankel.hpp"
#include "fdn/io.hpp"
#include "fdn/km.hpp"
#include "fdn/metrics.hpp"
#include "fdn/svd.hpp"
#include "fdn/wavresnet.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------- config

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j;
    in >> j;
    if (!j.is_object()) throw std::runtime_error("config root must be an object");
    return j;
}

void reject_unknown(const json& obj, const std::vector<std::string>& allowed,
                    const std::string& scope) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw std::runtime_error("unknown config key '" + scope + it.key() + "'");
    }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    return obj.at(key).get<T>();
}

// Write-then-rename discipline: populate a staging directory, then move it
// into place so failures never leave partial output trees.
class StagedDir {
  public:
    explicit StagedDir(const std::string& target) : target_(target) {
        if (target_.empty()) throw std::runtime_error("--out is required for this command");
        if (fs::exists(target_) && !fs::is_empty(target_))
            throw std::runtime_error("output directory already exists and is not empty: " +
                                     target_.string());
        staging_ = target_.string() + ".staging";
        fs::remove_all(staging_);
        fs::create_directories(staging_);
    }
    ~StagedDir() {
        if (!committed_) fs::remove_all(staging_);
    }
    std::string path(const std::string& name) const { return (staging_ / name).string(); }
    void commit() {
        fs::remove_all(target_);
        fs::rename(staging_, target_);
        committed_ = true;
    }

  private:
    fs::path target_;
    fs::path staging_;
    bool committed_ = false;
};

fdn::DirectionalTransform transform_from(const json& cfg) {
    reject_unknown(cfg, {"levels", "directions", "merge_lowpass"}, "transform.");
    int levels = get_or(cfg, "levels", 2);
    std::vector<int> dirs = get_or(cfg, "directions", std::vector<int>{4, 1});
    bool merge = get_or(cfg, "merge_lowpass", false);
    return fdn::DirectionalTransform(levels, dirs, merge);
}

fdn::ArchConfig arch_from(const json& cfg, int in_bands) {
    reject_unknown(cfg,
                   {"channels", "module_count", "convs_per_module", "kernel", "patch_h", "patch_w"},
                   "arch.");
    fdn::ArchConfig a;
    a.in_bands = in_bands;
    a.channels = get_or(cfg, "channels", 16);
    a.module_count = get_or(cfg, "module_count", 3);
    a.convs_per_module = get_or(cfg, "convs_per_module", 3);
    a.kernel = get_or(cfg, "kernel", 3);
    a.patch_h = get_or(cfg, "patch_h", 33);
    a.patch_w = get_or(cfg, "patch_w", 33);
    a.validate();
    return a;
}

std::string sample_name(int index, const char* role) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "sample_%04d_%s.bin", index, role);
    return buf;
}

// ---------------------------------------------------------------- gen-data

int cmd_gen_data(const json& cfg, unsigned long long seed, const std::string& out) {
    reject_unknown(cfg, {"dataset"}, "");
    json d = cfg.value("dataset", json::object());
    reject_unknown(
        d, {"phantom_kind", "size", "angles", "bins", "fractions", "count", "incident_photons"},
        "dataset.");

    fdn::DatasetConfig dc;
    dc.phantom_kind = get_or(d, "phantom_kind", std::string("random-ellipses"));
    dc.size = get_or(d, "size", 64);
    dc.angles = get_or(d, "angles", 120);
    dc.bins = get_or(d, "bins", 96);
    dc.fractions = get_or(d, "fractions", std::vector<double>{0.13, 0.25, 0.5});
    dc.count = get_or(d, "count", 8);
    dc.dose.incident_photons = get_or(d, "incident_photons", 1e5);
    dc.seed = seed;
    if (dc.count < 1) throw std::runtime_error("dataset.count must be >= 1");

    StagedDir stage(out);
    auto pairs = fdn::make_pairs(dc);
    double peak = 0.0;
    for (const auto& p : pairs)
        for (double v : p.phantom.data) peak = std::max(peak, v);

    json manifest;
    manifest["format"] = "fdn-dataset-v1";
    manifest["seed"] = seed;
    manifest["phantom_kind"] = dc.phantom_kind;
    manifest["size"] = dc.size;
    manifest["angles"] = dc.angles;
    manifest["bins"] = dc.bins;
    manifest["fractions"] = dc.fractions;
    manifest["count"] = dc.count;
    manifest["incident_photons"] = dc.dose.incident_photons;
    manifest["peak"] = peak;
    json samples = json::array();
    for (size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        fdn::save_image(stage.path(sample_name(static_cast<int>(i), "low")), p.low);
        fdn::save_image(stage.path(sample_name(static_cast<int>(i), "full")), p.full);
        fdn::save_image(stage.path(sample_name(static_cast<int>(i), "phantom")), p.phantom);
        json s;
        s["index"] = i;
        s["fraction"] = p.fraction;
        s["seed"] = p.seed;
        samples.push_back(s);
    }
    manifest["samples"] = samples;
    std::ofstream mf(stage.path("manifest.json"));
    mf << manifest.dump(2) << "\n";
    mf.close();
    stage.commit();
    std::cout << "wrote " << pairs.size() << " pairs to " << out << "\n";
    return 0;
}

// ---------------------------------------------------------------- train

std::vector<fdn::DatasetPair> load_pairs(const std::string& dir, json& manifest) {
    std::ifstream mf(dir + "/manifest.json");
    if (!mf) throw std::runtime_error("missing dataset manifest in " + dir);
    mf >> manifest;
    if (manifest.value("format", std::string()) != "fdn-dataset-v1")
        throw std::runtime_error("unrecognized dataset manifest format");
    std::vector<fdn::DatasetPair> pairs;
    for (const auto& s : manifest.at("samples")) {
        fdn::DatasetPair p;
        int idx = s.at("index").get<int>();
        p.low = fdn::load_image(dir + "/" + sample_name(idx, "low"));
        p.full = fdn::load_image(dir + "/" + sample_name(idx, "full"));
        p.phantom = fdn::load_image(dir + "/" + sample_name(idx, "phantom"));
        p.fraction = s.at("fraction").get<double>();
        p.seed = s.at("seed").get<unsigned long long>();
        pairs.push_back(std::move(p));
    }
    return pairs;
}

int cmd_train(const json& cfg, unsigned long long seed, const std::string& out) {
    reject_unknown(cfg, {"dataset_dir", "transform", "arch", "train"}, "");
    std::string dataset_dir = get_or(cfg, "dataset_dir", std::string());
    if (dataset_dir.empty()) throw std::runtime_error("train: dataset_dir is required");

    json tj = cfg.value("transform", json::object());
    fdn::DirectionalTransform transform = transform_from(tj);
    fdn::ArchConfig arch = arch_from(cfg.value("arch", json::object()), transform.band_count());

    json t = cfg.value("train", json::object());
    reject_unknown(t,
                   {"lr_initial", "lr_final", "clip", "batch_size", "stage_epochs", "stages",
                    "dbi_refresh_epochs", "augment_flips", "patch_stride"},
                   "train.");
    fdn::TrainConfig tc;
    tc.lr_initial = get_or(t, "lr_initial", 0.01);
    tc.lr_final = get_or(t, "lr_final", 1e-4);
    tc.clip = get_or(t, "clip", 1e-3);
    tc.batch_size = get_or(t, "batch_size", 10);
    tc.stage_epochs = get_or(t, "stage_epochs", std::vector<int>{40, 20, 20});
    tc.stages = get_or(t, "stages", 3);
    tc.dbi_refresh_epochs = get_or(t, "dbi_refresh_epochs", 50);
    tc.augment_flips = get_or(t, "augment_flips", true);
    tc.seed = seed;
    int stride = get_or(t, "patch_stride", std::max(1, arch.patch_h / 2));

    json manifest;
    auto pairs = load_pairs(dataset_dir, manifest);
    auto dataset = fdn::make_dataset(pairs, transform, arch.patch_h, arch.patch_w, stride);
    std::cout << "training on " << dataset.size() << " patches from " << pairs.size() << " pairs\n";

    fdn::NetworkParams params = fdn::NetworkParams::init(arch, seed);
    fdn::TrainResult tr = fdn::train(params, std::move(dataset), tc);

    StagedDir stage(out);
    fdn::save_checkpoint(stage.path("checkpoint.bin"), params, transform.levels(),
                         transform.directions_per_level(), transform.merge_lowpass());
    std::ofstream lf(stage.path("loss_curve.txt"));
    lf << "# step loss\n";
    for (size_t i = 0; i < tr.loss_curve.size(); ++i) lf << i << " " << tr.loss_curve[i] << "\n";
    lf.close();
    json rm;
    rm["format"] = "fdn-trainrun-v1";
    rm["seed"] = seed;
    rm["dataset_dir"] = dataset_dir;
    rm["steps"] = tr.steps;
    rm["final_loss"] = tr.loss_curve.empty() ? 0.0 : tr.loss_curve.back();
    rm["patch_stride"] = stride;
    std::ofstream rf(stage.path("run.json"));
    rf << rm.dump(2) << "\n";
    rf.close();
    stage.commit();
    std::cout << "trained " << tr.steps << " steps; checkpoint in " << out << "\n";
    return 0;
}

// ---------------------------------------------------------------- denoise

int cmd_denoise(const json& cfg, unsigned long long /*seed*/, const std::string& out) {
    reject_unknown(cfg, {"checkpoint", "input", "reference", "mode", "km", "patch_stride", "peak"},
                   "");
    std::string ckpt_path = get_or(cfg, "checkpoint", std::string());
    std::string input_path = get_or(cfg, "input", std::string());
    if (ckpt_path.empty() || input_path.empty())
        throw std::runtime_error("denoise: checkpoint and input are required");
    std::string mode = get_or(cfg, "mode", std::string("both"));
    if (mode != "feed-forward" && mode != "km" && mode != "both")
        throw std::runtime_error("denoise: mode must be feed-forward, km or both");

    fdn::Checkpoint ckpt = fdn::load_checkpoint(ckpt_path);
    fdn::DirectionalTransform transform = ckpt.make_transform();
    fdn::Image input = fdn::load_image(input_path);
    int stride = get_or(cfg, "patch_stride", std::max(1, ckpt.params.arch.patch_h / 2));
    double peak = get_or(cfg, "peak", 0.0);
    std::string ref_path = get_or(cfg, "reference", std::string());
    fdn::Image reference;
    bool have_ref = !ref_path.empty();
    if (have_ref) reference = fdn::load_image(ref_path);
    if (peak <= 0.0) {
        const fdn::Image& basis = have_ref ? reference : input;
        for (double v : basis.data) peak = std::max(peak, v);
        if (peak <= 0.0) peak = 1.0;
    }

    json km = cfg.value("km", json::object());
    reject_unknown(km, {"mu", "lambda", "max_iters", "stop_tol"}, "km.");
    fdn::KMConfig kc;
    kc.mu = get_or(km, "mu", 0.1);
    kc.lambda_schedule = {get_or(km, "lambda", 0.5)};
    kc.max_iters = get_or(km, "max_iters", 20);
    kc.stop_tol = get_or(km, "stop_tol", 1e-5);

    fdn::DenoiserMap q = [&](const fdn::Image& f) {
        return fdn::infer_image(ckpt.params, f, transform, stride);
    };

    StagedDir stage(out);
    json report;
    report["format"] = "fdn-denoise-v1";
    report["mode"] = mode;
    report["peak"] = peak;

    auto metric_json = [&](const fdn::Image& img) {
        json m;
        if (have_ref) {
            fdn::MetricReport r = fdn::evaluate(img, reference, peak);
            m["rmse"] = r.rmse;
            m["psnr"] = r.psnr;
            m["ssim"] = r.ssim;
        }
        return m;
    };
    if (have_ref) report["input_metrics"] = metric_json(input);

    if (mode == "feed-forward" || mode == "both") {
        fdn::Image ff = q(input);
        fdn::save_image(stage.path("feed_forward.bin"), ff);
        double lo = 0.0;
        fdn::save_pgm16(stage.path("feed_forward.pgm"), ff, lo, peak);
        report["feed_forward"] = metric_json(ff);
    }
    if (mode == "km" || mode == "both") {
        fdn::KMResult kr =
            fdn::km_denoise(input, q, kc, have_ref ? &reference : nullptr, peak);
        fdn::save_image(stage.path("km.bin"), kr.output);
        fdn::save_pgm16(stage.path("km.pgm"), kr.output, 0.0, peak);
        json kj = metric_json(kr.output);
        kj["iterations"] = kr.iterations;
        kj["converged"] = kr.converged;
        report["km"] = kj;
        std::ofstream tf(stage.path("trace.txt"));
        tf << "# iter residual";
        if (have_ref) tf << " psnr_f psnr_q";
        tf << "\n";
        for (size_t i = 0; i < kr.trace.residual.size(); ++i) {
            tf << i + 1 << " " << kr.trace.residual[i];
            if (have_ref) tf << " " << kr.trace.psnr_f[i] << " " << kr.trace.psnr_q[i];
            tf << "\n";
        }
    }
    std::ofstream rf(stage.path("report.json"));
    rf << report.dump(2) << "\n";
    rf.close();
    stage.commit();
    std::cout << report.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------- spectrum

// Normalized singular spectrum of the extended Hankel matrix built from the
// rows of every channel of a module's feature map.
std::vector<double> module_spectrum(const fdn::Batch& features, int d) {
    std::vector<std::vector<double>> channels;
    // every image row of every channel is a 1-D signal; stack a subsampled
    // set of them as Hankel blocks to keep the matrix tractable
    for (int c = 0; c < features.c; ++c) {
        const double* plane = features.at(0, c);
        std::vector<double> sig(static_cast<size_t>(features.h) * features.w);
        std::copy(plane, plane + sig.size(), sig.begin());
        channels.push_back(std::move(sig));
    }
    auto H = fdn::build_extended_hankel(channels, d);
    return fdn::hankel_spectrum(H);
}

double tail_mass(const std::vector<double>& spectrum) {
    double total = 0.0;
    for (double s : spectrum) total += s;
    if (total <= 0.0) return 0.0;
    double tail = 0.0;
    for (size_t i = spectrum.size() / 2; i < spectrum.size(); ++i) tail += spectrum[i];
    return tail / total;
}

int cmd_spectrum(const json& cfg, unsigned long long /*seed*/, const std::string& out) {
    reject_unknown(cfg, {"checkpoint", "probe", "hankel_window", "patch_stride"}, "");
    std::string ckpt_path = get_or(cfg, "checkpoint", std::string());
    std::string probe_path = get_or(cfg, "probe", std::string());
    if (ckpt_path.empty() || probe_path.empty())
        throw std::runtime_error("spectrum: checkpoint and probe are required");
    int d = get_or(cfg, "hankel_window", 8);

    fdn::Checkpoint ckpt = fdn::load_checkpoint(ckpt_path);
    fdn::DirectionalTransform transform = ckpt.make_transform();
    fdn::Image probe = fdn::load_image(probe_path);

    // center patch of the transformed probe feeds the network
    const fdn::ArchConfig& arch = ckpt.params.arch;
    fdn::SubbandStack bands = transform.forward(probe);
    fdn::PatchSet ps = fdn::extract_patches(bands, arch.patch_h, arch.patch_w,
                                            std::max(1, arch.patch_h));
    fdn::Batch in(1, arch.in_bands, arch.patch_h, arch.patch_w);
    in.v = ps.patches.at(ps.patches.size() / 2);
    auto modules = fdn::module_outputs(ckpt.params, in);

    StagedDir stage(out);
    std::ofstream tf(stage.path("spectrum.txt"));
    tf << "# module tail_mass spectrum...\n";
    json report;
    report["format"] = "fdn-spectrum-v1";
    report["hankel_window"] = d;
    json mods = json::array();
    for (size_t m = 0; m < modules.size(); ++m) {
        auto spec = module_spectrum(modules[m], d);
        double top = spec.empty() || spec[0] <= 0.0 ? 1.0 : spec[0];
        for (auto& s : spec) s /= top;
        double tm = tail_mass(spec);
        tf << m + 1 << " " << tm;
        for (double s : spec) tf << " " << s;
        tf << "\n";
        json mj;
        mj["module"] = m + 1;
        mj["tail_mass"] = tm;
        mods.push_back(mj);
    }
    report["modules"] = mods;
    tf.close();
    std::ofstream rf(stage.path("report.json"));
    rf << report.dump(2) << "\n";
    rf.close();
    stage.commit();
    std::cout << report.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------- verify

int cmd_verify(const json& cfg, unsigned long long seed, const std::string& out) {
    reject_unknown(cfg, {"transform", "corrupt_dual", "gradient_seeds"}, "");
    bool corrupt = get_or(cfg, "corrupt_dual", false);
    int grad_seeds = get_or(cfg, "gradient_seeds", 1);

    std::ostringstream rep;
    bool all_ok = true;

    // 1. frame PR + bounds on the Haar pair
    fdn::FrameOperator haar = fdn::FrameOperator::haar(64);
    if (corrupt) haar.psi_dual[0] += 0.05;  // fault injection for testing
    fdn::PrReport pr = fdn::verify_pr(haar, 1e-10);
    rep << "frame-pr haar residual=" << pr.max_residual << (pr.ok ? " PASS" : " FAIL") << "\n";
    all_ok = all_ok && pr.ok;
    fdn::FrameBounds fb = fdn::estimate_frame_bounds(fdn::analysis_op(haar));
    bool fb_ok = fb.is_frame && std::abs(fb.alpha - 1.0) < 1e-6 && std::abs(fb.beta - 1.0) < 1e-6;
    rep << "frame-bounds haar alpha=" << fb.alpha << " beta=" << fb.beta
        << (fb_ok ? " PASS" : " FAIL") << "\n";
    all_ok = all_ok && fb_ok;

    // 2. directional resolution of identity
    json tj = cfg.value("transform", json::object());
    fdn::DirectionalTransform t = tj.empty()
                                      ? fdn::DirectionalTransform(4, {8, 4, 2, 1}, true)
                                      : transform_from(tj);
    int grid = std::max(64, 1 << (t.levels() + 1));
    double res = t.identity_residual(grid, grid);
    bool t_ok = res < 1e-10;
    rep << "transform-identity residual=" << res << (t_ok ? " PASS" : " FAIL") << "\n";
    all_ok = all_ok && t_ok;

    // 3. gradient finite-difference suite on a tiny net
    fdn::ArchConfig a;
    a.in_bands = 3;
    a.channels = 4;
    a.module_count = 2;
    a.convs_per_module = 2;
    a.patch_h = 9;
    a.patch_w = 9;
    double worst = 0.0;
    for (int s = 0; s < grad_seeds; ++s) {
        fdn::NetworkParams p = fdn::NetworkParams::init(a, seed + s, 0.05);
        std::mt19937_64 rng(seed + 100 + s);
        std::normal_distribution<double> gauss(0.0, 0.5);
        fdn::Batch in(1, a.in_bands, a.patch_h, a.patch_w), tg(1, a.in_bands, a.patch_h, a.patch_w);
        for (auto& v : in.v) v = gauss(rng);
        for (auto& v : tg.v) v = gauss(rng);
        fdn::LossGrad lg = fdn::loss_and_grad(p, in, tg);
        std::uniform_int_distribution<size_t> pick(0, p.values.size() - 1);
        const double eps = 1e-5;
        for (int k = 0; k < 60; ++k) {
            size_t i = pick(rng);
            fdn::NetworkParams pp = p;
            pp.values[i] += eps;
            fdn::NetworkParams pm = p;
            pm.values[i] -= eps;
            double fd = (fdn::loss_and_grad(pp, in, tg).loss -
                         fdn::loss_and_grad(pm, in, tg).loss) /
                        (2 * eps);
            double rel = std::abs(fd - lg.grad[i]) /
                         std::max({std::abs(fd), std::abs(lg.grad[i]), 1e-6});
            worst = std::max(worst, rel);
        }
    }
    bool g_ok = worst < 1e-3;
    rep << "gradient-check max_rel_err=" << worst << (g_ok ? " PASS" : " FAIL") << "\n";
    all_ok = all_ok && g_ok;

    rep << (all_ok ? "ALL PASS" : "FAILURES PRESENT") << "\n";
    std::cout << rep.str();
    if (!out.empty()) {
        StagedDir stage(out);
        std::ofstream rf(stage.path("report.txt"));
        rf << rep.str();
        rf.close();
        stage.commit();
    }
    return all_ok ? 0 : 1;
}

// ---------------------------------------------------------------- metrics

int cmd_metrics(const json& cfg, unsigned long long /*seed*/, const std::string& out) {
    reject_unknown(cfg, {"a", "b", "peak"}, "");
    std::string pa = get_or(cfg, "a", std::string());
    std::string pb = get_or(cfg, "b", std::string());
    if (pa.empty() || pb.empty()) throw std::runtime_error("metrics: a and b image paths required");
    fdn::Image a = fdn::load_image(pa);
    fdn::Image b = fdn::load_image(pb);
    double peak = get_or(cfg, "peak", 0.0);
    if (peak <= 0.0) {
        for (double v : b.data) peak = std::max(peak, v);
        if (peak <= 0.0) peak = 1.0;
    }
    fdn::MetricReport r = fdn::evaluate(a, b, peak);
    std::ostringstream kv;
    kv << "rmse=" << r.rmse << "\npsnr=" << r.psnr << "\nssim=" << r.ssim << "\npeak=" << peak
       << "\n";
    std::cout << kv.str();
    if (!out.empty()) {
        StagedDir stage(out);
        std::ofstream rf(stage.path("metrics.txt"));
        rf << kv.str();
        rf.close();
        stage.commit();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"framelet denoising toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // accept global flags after the subcommand name

    std::string config_path, out_dir;
    unsigned long long seed = 1;
    int threads = 0;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--seed", seed, "root RNG seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "OpenMP thread count (0 = library default)");

    auto* gen = app.add_subcommand("gen-data", "generate a phantom dataset");
    auto* train = app.add_subcommand("train", "train a network on a dataset");
    auto* denoise = app.add_subcommand("denoise", "run feed-forward / fixed-point denoising");
    auto* spectrum = app.add_subcommand("spectrum", "per-module singular spectrum diagnostics");
    auto* verify = app.add_subcommand("verify", "run identity/gradient verification suites");
    auto* metrics = app.add_subcommand("metrics", "compare two images");

    CLI11_PARSE(app, argc, argv);
    if (threads > 0) omp_set_num_threads(threads);

    try {
        json cfg = load_config(config_path);
        if (gen->parsed()) return cmd_gen_data(cfg, seed, out_dir);
        if (train->parsed()) return cmd_train(cfg, seed, out_dir);
        if (denoise->parsed()) return cmd_denoise(cfg, seed, out_dir);
        if (spectrum->parsed()) return cmd_spectrum(cfg, seed, out_dir);
        if (verify->parsed()) return cmd_verify(cfg, seed, out_dir);
        if (metrics->parsed()) return cmd_metrics(cfg, seed, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
