#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include "doctest.h"
#include "fdn/io.hpp"

using namespace fdn;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/fdn_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("tensor container round-trips data and dims") {
    TempFile f("tensor.bin");
    std::vector<double> data = {1.5, -2.25, 3.0, 0.0, 1e-12, 7.5};
    save_tensor(f.path, data, {2, 3});
    std::vector<unsigned> dims;
    auto back = load_tensor(f.path, dims);
    REQUIRE(dims == std::vector<unsigned>{2, 3});
    REQUIRE(back.size() == data.size());
    for (size_t i = 0; i < data.size(); ++i) CHECK(back[i] == data[i]);
}

TEST_CASE("tensor loader rejects bad magic") {
    TempFile f("badmagic.bin");
    std::ofstream out(f.path, std::ios::binary);
    out << "NOTMAGIC" << std::string(64, '\0');
    out.close();
    std::vector<unsigned> dims;
    CHECK_THROWS(load_tensor(f.path, dims));
    CHECK_THROWS(load_tensor("/tmp/fdn_does_not_exist.bin", dims));
}

TEST_CASE("image save/load preserves shape and values") {
    TempFile f("image.bin");
    std::mt19937_64 rng(71);
    Image img(7, 9);
    for (auto& v : img.data) v = std::normal_distribution<double>(0.0, 1.0)(rng);
    save_image(f.path, img);
    Image back = load_image(f.path);
    REQUIRE(back.height == 7);
    REQUIRE(back.width == 9);
    for (size_t i = 0; i < img.data.size(); ++i) CHECK(back.data[i] == img.data[i]);
}

TEST_CASE("load_image rejects non-2d tensors") {
    TempFile f("tensor3d.bin");
    save_tensor(f.path, std::vector<double>(8, 1.0), {2, 2, 2});
    CHECK_THROWS(load_image(f.path));
}

TEST_CASE("pgm16 writes a valid header and clamps the range") {
    TempFile f("img.pgm");
    Image img(2, 3);
    img.data = {-1.0, 0.0, 0.5, 1.0, 2.0, 0.25};
    save_pgm16(f.path, img, 0.0, 1.0);
    std::ifstream in(f.path, std::ios::binary);
    std::string magic;
    int w, h, maxval;
    in >> magic >> w >> h >> maxval;
    CHECK(magic == "P5");
    CHECK(w == 3);
    CHECK(h == 2);
    CHECK(maxval == 65535);
    in.get();  // single whitespace after header
    unsigned char raw[12];
    in.read(reinterpret_cast<char*>(raw), 12);
    REQUIRE(in.gcount() == 12);
    auto px = [&](int i) { return (raw[2 * i] << 8) | raw[2 * i + 1]; };
    CHECK(px(0) == 0);       // clamped below
    CHECK(px(3) == 65535);   // top of range
    CHECK(px(4) == 65535);   // clamped above
}

TEST_CASE("checkpoint round-trips parameters, stats and transform config") {
    TempFile f("ckpt.bin");
    ArchConfig a;
    a.in_bands = 6;
    a.channels = 5;
    a.module_count = 2;
    a.patch_h = 17;
    a.patch_w = 17;
    NetworkParams p = NetworkParams::init(a, 81, 0.02);
    // make running stats non-trivial
    for (size_t i = 0; i < p.running_mean.size(); ++i) {
        p.running_mean[i] = 0.01 * static_cast<double>(i);
        p.running_var[i] = 1.0 + 0.001 * static_cast<double>(i);
    }
    save_checkpoint(f.path, p, 2, {4, 1}, false);
    Checkpoint c = load_checkpoint(f.path);
    CHECK(c.transform_levels == 2);
    CHECK(c.transform_dirs == std::vector<int>{4, 1});
    CHECK_FALSE(c.transform_merge);
    CHECK(c.params.arch.in_bands == 6);
    CHECK(c.params.arch.channels == 5);
    CHECK(c.params.arch.module_count == 2);
    REQUIRE(c.params.values.size() == p.values.size());
    // values stored as 32-bit reals: compare at that precision
    for (size_t i = 0; i < p.values.size(); ++i)
        CHECK(c.params.values[i] == doctest::Approx(p.values[i]).epsilon(1e-6));
    REQUIRE(c.params.running_mean.size() == p.running_mean.size());
    for (size_t i = 0; i < p.running_mean.size(); ++i)
        CHECK(c.params.running_mean[i] == doctest::Approx(p.running_mean[i]).epsilon(1e-6));
    DirectionalTransform t = c.make_transform();
    CHECK(t.band_count() == 6);
}

TEST_CASE("checkpoint corruption is detected by the checksum") {
    TempFile f("ckpt2.bin");
    ArchConfig a;
    a.in_bands = 3;
    a.channels = 4;
    a.module_count = 1;
    a.patch_h = 9;
    a.patch_w = 9;
    NetworkParams p = NetworkParams::init(a, 82);
    save_checkpoint(f.path, p, 1, {1}, false);

    std::fstream io(f.path, std::ios::in | std::ios::out | std::ios::binary);
    io.seekg(0, std::ios::end);
    long size = static_cast<long>(io.tellg());
    io.seekp(size / 2);
    char byte;
    io.seekg(size / 2);
    io.get(byte);
    io.seekp(size / 2);
    byte = static_cast<char>(byte ^ 0x5a);
    io.put(byte);
    io.close();
    CHECK_THROWS(load_checkpoint(f.path));
}
