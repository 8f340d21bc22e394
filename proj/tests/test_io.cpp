#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "fsplat/gaussian_field.hpp"
#include "fsplat/io/checkpoint.hpp"
#include "fsplat/io/config.hpp"
#include "fsplat/io/image_io.hpp"
#include "oracles.hpp"

using namespace fsplat;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "fsplat_io_tests";
    fs::create_directories(dir);
    return dir;
}

std::vector<char> slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("a crafted 2x2 P6 PPM loads to the exact /255 values") {
    const fs::path path = temp_dir() / "tiny.ppm";
    std::string bytes = "P6\n2 2\n255\n";
    const unsigned char pixels[12] = {0, 128, 255, 10, 20, 30, 200, 100, 50, 255, 0, 7};
    bytes.append(reinterpret_cast<const char*>(pixels), 12);
    spit(path, bytes);

    const Image img = io::load_image(path.string());
    REQUIRE(img.height() == 2);
    REQUIRE(img.width() == 2);
    REQUIRE(img.channels() == 3);
    CHECK(img(0, 0, 0) == 0.0);
    CHECK(img(0, 0, 1) == doctest::Approx(128.0 / 255.0).epsilon(1e-15));
    CHECK(img(0, 0, 2) == 1.0);
    CHECK(img(1, 1, 2) == doctest::Approx(7.0 / 255.0).epsilon(1e-15));
}

TEST_CASE("ppm save/load roundtrip stays within the quantization half-step") {
    const fs::path path = temp_dir() / "round.ppm";
    const Image img = oracle::random_image(13, 9, 3, 77);
    io::save_image(img, path.string());
    const Image back = io::load_image(path.string());
    for (int c = 0; c < 3; ++c)
        CHECK((img.planes[c] - back.planes[c]).abs().maxCoeff() <= 1.0 / 510.0 + 1e-12);
}

TEST_CASE("png save/load roundtrip stays within the quantization half-step") {
    const fs::path rgb = temp_dir() / "round.png";
    const Image img = oracle::random_image(11, 17, 3, 78);
    io::save_image(img, rgb.string());
    const Image back = io::load_image(rgb.string());
    REQUIRE(back.channels() == 3);
    for (int c = 0; c < 3; ++c)
        CHECK((img.planes[c] - back.planes[c]).abs().maxCoeff() <= 1.0 / 510.0 + 1e-12);

    const fs::path gray = temp_dir() / "gray.png";
    const Image mono = oracle::random_image(8, 8, 1, 79);
    io::save_image(mono, gray.string());
    const Image mono_back = io::load_image(gray.string());
    REQUIRE(mono_back.channels() == 1);
    CHECK((mono.planes[0] - mono_back.planes[0]).abs().maxCoeff() <= 1.0 / 510.0 + 1e-12);
}

TEST_CASE("corrupt and truncated image files are rejected") {
    const fs::path bad_header = temp_dir() / "bad.ppm";
    spit(bad_header, "P6\n-3 zz\n255\n");
    CHECK_THROWS_AS(io::load_image(bad_header.string()), std::runtime_error);

    const fs::path truncated = temp_dir() / "short.ppm";
    spit(truncated, "P6\n4 4\n255\nab");
    CHECK_THROWS_AS(io::load_image(truncated.string()), std::runtime_error);

    const fs::path garbage = temp_dir() / "noise.bin";
    spit(garbage, "this is not an image");
    CHECK_THROWS_AS(io::load_image(garbage.string()), std::runtime_error);

    CHECK_THROWS_AS(io::load_image((temp_dir() / "missing.png").string()),
                    std::runtime_error);
}

TEST_CASE("spectrum export: constant image lights only the centered DC bin") {
    const fs::path path = temp_dir() / "dc.png";
    io::export_spectrum(Image(16, 16, 1, 0.5), path.string());
    const Image heat = io::load_image(path.string());
    REQUIRE(heat.channels() == 1);
    CHECK(heat(8, 8, 0) == 1.0);
    double rest = 0.0;
    for (Eigen::Index i = 0; i < 16; ++i)
        for (Eigen::Index j = 0; j < 16; ++j)
            if (i != 8 || j != 8) rest = std::max(rest, heat(i, j, 0));
    CHECK(rest == 0.0);
}

TEST_CASE("spectrum export: horizontal sinusoid lights a symmetric pair") {
    const int k = 3;
    Image img(16, 16, 1);
    for (Eigen::Index i = 0; i < 16; ++i)
        for (Eigen::Index j = 0; j < 16; ++j)
            img(i, j, 0) = 0.5 + 0.4 * std::sin(2.0 * M_PI * k * j / 16.0);
    const fs::path path = temp_dir() / "sine.png";
    io::export_spectrum(img, path.string());
    const Image heat = io::load_image(path.string());
    // DC plus the +-k bins along the row through the center.
    CHECK(heat(8, 8 + k, 0) > 0.5);
    CHECK(heat(8, 8 - k, 0) > 0.5);
    double elsewhere = 0.0;
    for (Eigen::Index i = 0; i < 16; ++i)
        for (Eigen::Index j = 0; j < 16; ++j)
            if (i != 8 || (j != 8 && j != 8 + k && j != 8 - k))
                elsewhere = std::max(elsewhere, heat(i, j, 0));
    CHECK(elsewhere < 0.5);
}

TEST_CASE("spectrum export is byte-deterministic") {
    const Image img = oracle::random_image(24, 24, 3, 80);
    const fs::path a = temp_dir() / "spec_a.png";
    const fs::path b = temp_dir() / "spec_b.png";
    io::export_spectrum(img, a.string());
    io::export_spectrum(img, b.string());
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("checkpoint roundtrip is bitwise exact") {
    for (const int channels : {1, 3}) {
        SplatField field;
        field.canvas = {48, 64, channels};
        Rng rng(81);
        for (int i = 0; i < 20; ++i) {
            GaussianSplat s;
            s.pos = {rng.uniform(0.0, 64.0), rng.uniform(0.0, 48.0)};
            s.log_scale = {rng.uniform(-1.0, 2.0), rng.uniform(-1.0, 2.0)};
            s.rotation = rng.uniform(-3.0, 3.0);
            s.opacity_logit = rng.uniform(-4.0, 4.0);
            s.color = {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
            if (channels == 1) {
                s.color[1] = 0.0;
                s.color[2] = 0.0;
            }
            s.depth = rng.uniform(-1.0, 1.0);
            field.splats.push_back(s);
        }
        const fs::path path = temp_dir() / ("field_" + std::to_string(channels) + ".ckpt");
        io::save_checkpoint(path.string(), {field, "key = value\n", 1234});
        const io::Checkpoint back = io::load_checkpoint(path.string());
        CHECK(back.iteration == 1234);
        CHECK(back.config_text == "key = value\n");
        CHECK(back.field.canvas.height == field.canvas.height);
        CHECK(back.field.canvas.channels == channels);
        REQUIRE(back.field.splats.size() == field.splats.size());
        for (size_t i = 0; i < field.splats.size(); ++i) {
            CHECK(back.field.splats[i].pos == field.splats[i].pos);
            CHECK(back.field.splats[i].log_scale == field.splats[i].log_scale);
            CHECK(back.field.splats[i].rotation == field.splats[i].rotation);
            CHECK(back.field.splats[i].opacity_logit == field.splats[i].opacity_logit);
            CHECK(back.field.splats[i].color == field.splats[i].color);
            CHECK(back.field.splats[i].depth == field.splats[i].depth);
        }
    }
}

TEST_CASE("checkpoint version and magic are enforced") {
    SplatField field;
    field.canvas = {8, 8, 1};
    field.splats.push_back({});
    const fs::path path = temp_dir() / "version.ckpt";
    io::save_checkpoint(path.string(), {field, "", 1});

    auto bytes = slurp(path);
    bytes[4] = 99;  // version word
    const fs::path bad_version = temp_dir() / "bad_version.ckpt";
    spit(bad_version, std::string(bytes.begin(), bytes.end()));
    CHECK_THROWS_AS(io::load_checkpoint(bad_version.string()), std::runtime_error);

    bytes = slurp(path);
    bytes[0] = 'X';
    const fs::path bad_magic = temp_dir() / "bad_magic.ckpt";
    spit(bad_magic, std::string(bytes.begin(), bytes.end()));
    CHECK_THROWS_AS(io::load_checkpoint(bad_magic.string()), std::runtime_error);

    bytes = slurp(path);
    bytes.resize(bytes.size() / 2);
    const fs::path shortened = temp_dir() / "short.ckpt";
    spit(shortened, std::string(bytes.begin(), bytes.end()));
    CHECK_THROWS_AS(io::load_checkpoint(shortened.string()), std::runtime_error);
}

TEST_CASE("config: parse -> serialize is a fixed point") {
    const std::string text =
        "# sample config\n"
        "fixture = textured-patch\n"
        "fixture_size = 128\n"
        "total_iters = 500   # inline comment\n"
        "densify_end = 250\n"
        "warmup_iters = 50\n"
        "seed = 11\n"
        "freq_mode = naive\n"
        "lr_pos = 0.00016\n";
    const io::RunConfig parsed = io::parse_config(text);
    CHECK(parsed.fixture == "textured-patch");
    CHECK(parsed.train.total_iters == 500);
    CHECK(parsed.train.freq_mode == RegularizerMode::Naive);

    const std::string canonical = io::serialize_config(parsed);
    const io::RunConfig reparsed = io::parse_config(canonical);
    CHECK(io::serialize_config(reparsed) == canonical);
    CHECK(io::config_hash(reparsed) == io::config_hash(parsed));
}

TEST_CASE("config rejects unknown and duplicate keys and bad values") {
    CHECK_THROWS_WITH_AS(io::parse_config("no_such_key = 3\n"),
                         doctest::Contains("unknown key"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(io::parse_config("seed = 1\nseed = 2\n"),
                         doctest::Contains("duplicate"), std::invalid_argument);
    CHECK_THROWS_AS(io::parse_config("total_iters = banana\n"), std::invalid_argument);
    CHECK_THROWS_AS(io::parse_config("just a line\n"), std::invalid_argument);
}

TEST_CASE("config hash distinguishes different configurations") {
    io::RunConfig a;
    a.fixture = "checker-grass";
    io::RunConfig b = a;
    b.train.seed = a.train.seed + 1;
    CHECK(io::config_hash(a) != io::config_hash(b));
    CHECK(io::config_hash(a).size() == 16);
}

TEST_CASE("config validation wants exactly one source") {
    io::RunConfig both;
    both.input = "x.png";
    both.fixture = "checker-grass";
    CHECK_THROWS_AS(both.validate(), std::invalid_argument);
    io::RunConfig neither;
    CHECK_THROWS_AS(neither.validate(), std::invalid_argument);
    io::RunConfig fixture_only;
    fixture_only.fixture = "bogus";
    CHECK_THROWS_AS(fixture_only.validate(), std::invalid_argument);
}
