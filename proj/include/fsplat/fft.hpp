#ifndef FSPLAT_FFT_HPP
#define FSPLAT_FFT_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace fsplat {

/// In-place unnormalized complex DFT of arbitrary length:
///   X[k] = sum_n x[n] exp(-2*pi*i*k*n/N).
/// Power-of-two lengths run the iterative radix-2 path, everything else goes
/// through Bluestein's chirp-z transform. Stateless and reentrant.
void fft(std::vector<std::complex<double>>& data);

/// In-place unnormalized inverse transform (exp(+...), no 1/N factor), the
/// exact adjoint of fft().
void ifft_unnormalized(std::vector<std::complex<double>>& data);

}  // namespace fsplat

#endif
