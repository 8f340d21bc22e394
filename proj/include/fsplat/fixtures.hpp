#ifndef FSPLAT_FIXTURES_HPP
#define FSPLAT_FIXTURES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fsplat/image.hpp"

namespace fsplat {

/// Synthetic training target: a smooth background with one embedded
/// high-variance texture region, plus ground-truth masks for both. The
/// high-variance region is the over-reconstruction-prone one.
struct Fixture {
    std::string name;
    Image target;
    Mask high_variance;
    Mask smooth;

    std::vector<Mask> masks() const { return {high_variance, smooth}; }
};

const std::vector<std::string>& fixture_names();

/// name in {checker-grass, stripes-multiscale, textured-patch}; square canvas
/// of the given side. Deterministic bytes for identical (name, size, seed,
/// channels). channels = 1 collapses the generated RGB to its mean plane, so
/// the pattern (and the RNG stream) is identical to the color variant.
Fixture make_fixture(const std::string& name, Eigen::Index size, uint64_t seed,
                     int channels = 3);

Fixture make_fixture_rect(const std::string& name, Eigen::Index height,
                          Eigen::Index width, uint64_t seed, int channels = 3);

}  // namespace fsplat

#endif
