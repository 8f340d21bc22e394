#include <doctest.h>

#include "fsplat/fixtures.hpp"

using namespace fsplat;

namespace {

double gray_variance(const Image& img, const Mask& mask) {
    double sum = 0.0, sum_sq = 0.0;
    int64_t count = 0;
    for (Eigen::Index i = 0; i < img.height(); ++i) {
        for (Eigen::Index j = 0; j < img.width(); ++j) {
            if (!mask(i, j)) continue;
            double gray = 0.0;
            for (int c = 0; c < img.channels(); ++c) gray += img(i, j, c);
            gray /= img.channels();
            sum += gray;
            sum_sq += gray * gray;
            ++count;
        }
    }
    const double mean = sum / count;
    return sum_sq / count - mean * mean;
}

}  // namespace

TEST_CASE("fixtures: masks are disjoint and nonempty, values in range") {
    for (const std::string& name : fixture_names()) {
        const Fixture fix = make_fixture(name, 128, 5);
        CHECK(fix.high_variance.cast<int>().sum() > 0);
        CHECK(fix.smooth.cast<int>().sum() > 0);
        CHECK(((fix.high_variance + fix.smooth) <= 1).all());
        for (const auto& plane : fix.target.planes) {
            CHECK(plane.minCoeff() >= 0.0);
            CHECK(plane.maxCoeff() <= 1.0);
        }
    }
}

TEST_CASE("fixtures: the textured region has > 4x the variance of the smooth one") {
    for (const std::string& name : fixture_names()) {
        for (const uint64_t seed : {1ull, 2ull, 3ull}) {
            const Fixture fix = make_fixture(name, 256, seed);
            const double high = gray_variance(fix.target, fix.high_variance);
            const double low = gray_variance(fix.target, fix.smooth);
            INFO(name, " seed ", seed, ": high=", high, " low=", low);
            CHECK(high > 4.0 * low);
        }
    }
}

TEST_CASE("fixtures are deterministic in (name, dims, seed)") {
    const Fixture a = make_fixture("checker-grass", 96, 11);
    const Fixture b = make_fixture("checker-grass", 96, 11);
    for (int c = 0; c < 3; ++c) CHECK((a.target.planes[c] == b.target.planes[c]).all());
    CHECK((a.high_variance == b.high_variance).all());

    const Fixture other_seed = make_fixture("checker-grass", 96, 12);
    bool differs = false;
    for (int c = 0; c < 3; ++c)
        differs |= !(a.target.planes[c] == other_seed.target.planes[c]).all();
    CHECK(differs);
}

TEST_CASE("unknown fixture names are rejected") {
    CHECK_THROWS_AS(make_fixture("no-such-fixture", 64, 1), std::invalid_argument);
}

TEST_CASE("non-square fixtures keep masks inside the canvas") {
    const Fixture fix = make_fixture_rect("stripes-multiscale", 96, 160, 2);
    CHECK(fix.target.height() == 96);
    CHECK(fix.target.width() == 160);
    CHECK(fix.high_variance.rows() == 96);
    CHECK(fix.high_variance.cols() == 160);
    CHECK(fix.high_variance.cast<int>().sum() > 0);
}

TEST_CASE("gray fixtures collapse the color pattern to its mean plane") {
    const Fixture rgb = make_fixture("textured-patch", 96, 4, 3);
    const Fixture gray = make_fixture("textured-patch", 96, 4, 1);
    REQUIRE(gray.target.channels() == 1);
    const Eigen::ArrayXXd mean =
        (rgb.target.planes[0] + rgb.target.planes[1] + rgb.target.planes[2]) / 3.0;
    CHECK((gray.target.planes[0] == mean).all());
    CHECK((gray.high_variance == rgb.high_variance).all());
    CHECK_THROWS_AS(make_fixture("textured-patch", 96, 4, 2), std::invalid_argument);
}
