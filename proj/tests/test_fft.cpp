#include <doctest.h>

#include <complex>
#include <vector>

#include "fsplat/fft.hpp"
#include "fsplat/random.hpp"

using fsplat::Rng;

namespace {

std::vector<std::complex<double>> direct_dft(const std::vector<std::complex<double>>& x,
                                             bool inverse) {
    const size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (size_t k = 0; k < n; ++k) {
        std::complex<double> sum(0.0, 0.0);
        for (size_t m = 0; m < n; ++m) {
            const double angle = (inverse ? 2.0 : -2.0) * M_PI * static_cast<double>(k * m) /
                                 static_cast<double>(n);
            sum += x[m] * std::complex<double>(std::cos(angle), std::sin(angle));
        }
        out[k] = sum;
    }
    return out;
}

std::vector<std::complex<double>> random_signal(size_t n, uint64_t seed) {
    Rng rng(seed);
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    return x;
}

}  // namespace

TEST_CASE("fft matches the direct sum for all small lengths") {
    for (size_t n = 1; n <= 40; ++n) {
        auto x = random_signal(n, 100 + n);
        const auto expected = direct_dft(x, false);
        fsplat::fft(x);
        for (size_t k = 0; k < n; ++k) CHECK(std::abs(x[k] - expected[k]) < 1e-10);
    }
}

TEST_CASE("unnormalized inverse is the adjoint: ifft(fft(x)) == n*x") {
    for (const size_t n : {4u, 7u, 12u, 16u, 27u}) {
        const auto original = random_signal(n, 7 * n);
        auto x = original;
        fsplat::fft(x);
        fsplat::ifft_unnormalized(x);
        for (size_t k = 0; k < n; ++k)
            CHECK(std::abs(x[k] - static_cast<double>(n) * original[k]) < 1e-9);
    }
}

TEST_CASE("fft of a delta is flat") {
    std::vector<std::complex<double>> x(9, {0.0, 0.0});
    x[0] = {1.0, 0.0};
    fsplat::fft(x);
    for (const auto& v : x) CHECK(std::abs(v - std::complex<double>(1.0, 0.0)) < 1e-12);
}

TEST_CASE("fft rejects empty input") {
    std::vector<std::complex<double>> x;
    CHECK_THROWS_AS(fsplat::fft(x), std::invalid_argument);
}
