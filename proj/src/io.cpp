#include "fdn/io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace fdn {

namespace {

constexpr char kTensorMagic[8] = {'F', 'D', 'T', 'N', '0', '0', '0', '1'};
constexpr char kCheckpointMagic[8] = {'F', 'D', 'C', 'K', '0', '0', '0', '1'};

void write_bytes(std::ofstream& f, const void* p, size_t n) {
    f.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_bytes(std::ifstream& f, void* p, size_t n) {
    f.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!f) throw std::runtime_error("io: truncated file");
}

uint64_t fnv1a(const std::string& bytes) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

void save_tensor(const std::string& path, const std::vector<double>& data,
                 const std::vector<unsigned>& dims) {
    size_t total = 1;
    for (unsigned d : dims) total *= d;
    if (total != data.size()) throw std::invalid_argument("save_tensor: dims do not match data");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_tensor: cannot open " + path);
    write_bytes(f, kTensorMagic, 8);
    uint32_t nd = static_cast<uint32_t>(dims.size());
    write_bytes(f, &nd, 4);
    for (unsigned d : dims) {
        uint32_t v = d;
        write_bytes(f, &v, 4);
    }
    write_bytes(f, data.data(), data.size() * sizeof(double));
    if (!f) throw std::runtime_error("save_tensor: write failed for " + path);
}

std::vector<double> load_tensor(const std::string& path, std::vector<unsigned>& dims) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_tensor: cannot open " + path);
    char magic[8];
    read_bytes(f, magic, 8);
    if (std::memcmp(magic, kTensorMagic, 8) != 0)
        throw std::runtime_error("load_tensor: bad magic in " + path);
    uint32_t nd;
    read_bytes(f, &nd, 4);
    dims.resize(nd);
    size_t total = 1;
    for (uint32_t i = 0; i < nd; ++i) {
        uint32_t v;
        read_bytes(f, &v, 4);
        dims[i] = v;
        total *= v;
    }
    std::vector<double> data(total);
    read_bytes(f, data.data(), total * sizeof(double));
    return data;
}

void save_image(const std::string& path, const Image& img) {
    save_tensor(path, img.data, {static_cast<unsigned>(img.height), static_cast<unsigned>(img.width)});
}

Image load_image(const std::string& path) {
    std::vector<unsigned> dims;
    auto data = load_tensor(path, dims);
    if (dims.size() != 2) throw std::runtime_error("load_image: expected a 2-D tensor in " + path);
    return Image(static_cast<int>(dims[0]), static_cast<int>(dims[1]), std::move(data));
}

void save_pgm16(const std::string& path, const Image& img, double lo, double hi) {
    if (hi <= lo) throw std::invalid_argument("save_pgm16: empty range");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_pgm16: cannot open " + path);
    f << "P5\n" << img.width << " " << img.height << "\n65535\n";
    for (double v : img.data) {
        double t = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
        uint16_t q = static_cast<uint16_t>(t * 65535.0 + 0.5);
        unsigned char b[2] = {static_cast<unsigned char>(q >> 8), static_cast<unsigned char>(q & 0xff)};
        write_bytes(f, b, 2);
    }
}

void save_checkpoint(const std::string& path, const NetworkParams& p, int levels,
                     const std::vector<int>& dirs, bool merge) {
    nlohmann::json header;
    header["arch"] = {{"in_bands", p.arch.in_bands},
                      {"channels", p.arch.channels},
                      {"module_count", p.arch.module_count},
                      {"convs_per_module", p.arch.convs_per_module},
                      {"kernel", p.arch.kernel},
                      {"patch_h", p.arch.patch_h},
                      {"patch_w", p.arch.patch_w}};
    header["transform"] = {{"levels", levels}, {"directions", dirs}, {"merge_lowpass", merge}};
    header["bn_momentum"] = p.bn_momentum;
    header["bn_eps"] = p.bn_eps;
    header["value_count"] = p.values.size();
    header["running_count"] = p.running_mean.size();
    std::string hs = header.dump();

    std::string body;
    body.append(kCheckpointMagic, 8);
    uint32_t hl = static_cast<uint32_t>(hs.size());
    body.append(reinterpret_cast<const char*>(&hl), 4);
    body.append(hs);
    auto append_f32 = [&body](const std::vector<double>& v) {
        for (double d : v) {
            float f32 = static_cast<float>(d);
            body.append(reinterpret_cast<const char*>(&f32), 4);
        }
    };
    append_f32(p.values);
    append_f32(p.running_mean);
    append_f32(p.running_var);
    uint64_t checksum = fnv1a(body);
    body.append(reinterpret_cast<const char*>(&checksum), 8);

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
    write_bytes(f, body.data(), body.size());
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
    std::string body((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (body.size() < 20) throw std::runtime_error("load_checkpoint: truncated file");
    if (std::memcmp(body.data(), kCheckpointMagic, 8) != 0)
        throw std::runtime_error("load_checkpoint: bad magic");
    uint64_t stored;
    std::memcpy(&stored, body.data() + body.size() - 8, 8);
    if (fnv1a(body.substr(0, body.size() - 8)) != stored)
        throw std::runtime_error("load_checkpoint: checksum mismatch");

    uint32_t hl;
    std::memcpy(&hl, body.data() + 8, 4);
    auto header = nlohmann::json::parse(body.substr(12, hl));

    ArchConfig arch;
    arch.in_bands = header["arch"]["in_bands"];
    arch.channels = header["arch"]["channels"];
    arch.module_count = header["arch"]["module_count"];
    arch.convs_per_module = header["arch"]["convs_per_module"];
    arch.kernel = header["arch"]["kernel"];
    arch.patch_h = header["arch"]["patch_h"];
    arch.patch_w = header["arch"]["patch_w"];

    Checkpoint ck;
    ck.params = NetworkParams::init(arch, 0);
    ck.params.bn_momentum = header["bn_momentum"];
    ck.params.bn_eps = header["bn_eps"];
    ck.transform_levels = header["transform"]["levels"];
    ck.transform_dirs = header["transform"]["directions"].get<std::vector<int>>();
    ck.transform_merge = header["transform"]["merge_lowpass"];

    size_t vc = header["value_count"], rc = header["running_count"];
    if (vc != ck.params.values.size() || rc != ck.params.running_mean.size())
        throw std::runtime_error("load_checkpoint: tensor sizes do not match architecture");
    size_t off = 12 + hl;
    auto read_f32 = [&body, &off](std::vector<double>& v) {
        for (auto& d : v) {
            float f32;
            std::memcpy(&f32, body.data() + off, 4);
            off += 4;
            d = f32;
        }
    };
    read_f32(ck.params.values);
    read_f32(ck.params.running_mean);
    read_f32(ck.params.running_var);
    return ck;
}

}  // namespace fdn
