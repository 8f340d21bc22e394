#include "fsplat/fft.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace fsplat {

namespace {

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

size_t next_pow2(size_t n) {
    size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Iterative radix-2 Cooley-Tukey; n must be a power of two.
void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
    const size_t n = a.size();
    if (n <= 1) return;

    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (size_t len = 2; len <= n; len <<= 1) {
        const double angle = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(angle), std::sin(angle));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Chirp phase exp(-i*pi*k^2/n) with the k^2 taken mod 2n as an exact integer,
// which keeps the angle in [0, 2*pi) regardless of k.
std::complex<double> chirp(int64_t k, int64_t n, bool inverse) {
    const int64_t k2 = (k * k) % (2 * n);
    const double angle = (inverse ? 1.0 : -1.0) * M_PI * static_cast<double>(k2) /
                         static_cast<double>(n);
    return {std::cos(angle), std::sin(angle)};
}

void fft_bluestein(std::vector<std::complex<double>>& a, bool inverse) {
    const int64_t n = static_cast<int64_t>(a.size());
    const size_t m = next_pow2(static_cast<size_t>(2 * n - 1));

    std::vector<std::complex<double>> u(m, {0.0, 0.0});
    std::vector<std::complex<double>> v(m, {0.0, 0.0});
    for (int64_t k = 0; k < n; ++k) {
        const std::complex<double> c = chirp(k, n, inverse);
        u[static_cast<size_t>(k)] = a[static_cast<size_t>(k)] * c;
        const std::complex<double> cc = std::conj(c);
        v[static_cast<size_t>(k)] = cc;
        if (k != 0) v[m - static_cast<size_t>(k)] = cc;
    }

    fft_pow2(u, false);
    fft_pow2(v, false);
    for (size_t i = 0; i < m; ++i) u[i] *= v[i];
    fft_pow2(u, true);
    const double scale = 1.0 / static_cast<double>(m);

    for (int64_t k = 0; k < n; ++k)
        a[static_cast<size_t>(k)] = u[static_cast<size_t>(k)] * scale * chirp(k, n, inverse);
}

void transform(std::vector<std::complex<double>>& data, bool inverse) {
    if (data.empty()) throw std::invalid_argument("fft: empty input");
    if (is_pow2(data.size()))
        fft_pow2(data, inverse);
    else
        fft_bluestein(data, inverse);
}

}  // namespace

void fft(std::vector<std::complex<double>>& data) { transform(data, false); }

void ifft_unnormalized(std::vector<std::complex<double>>& data) { transform(data, true); }

}  // namespace fsplat
