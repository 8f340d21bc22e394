#ifndef FSPLAT_IO_IMAGE_IO_HPP
#define FSPLAT_IO_IMAGE_IO_HPP

#include <string>

#include "fsplat/image.hpp"

namespace fsplat::io {

/// Reads an 8-bit PNG or binary PPM (P6); the format is sniffed from the
/// file's magic bytes. Values map to [0,1] via /255. Gray PNGs load as one
/// channel, everything else as three (alpha is dropped).
Image load_image(const std::string& path);

/// Writes PNG or PPM depending on the extension (.png / .ppm). Values are
/// clamped to [0,1] and quantized to 8 bits. One-channel images become gray
/// PNGs; PPM output is always RGB.
void save_image(const Image& image, const std::string& path);

/// Centered log-amplitude heatmap of the image spectrum, channel-averaged,
/// min-max normalized per image, written as 8-bit grayscale.
void export_spectrum(const Image& image, const std::string& path);

/// Same rendering for the absolute amplitude difference of two spectra.
void export_spectrum_diff(const Image& a, const Image& b, const std::string& path);

}  // namespace fsplat::io

#endif
