#ifndef FSPLAT_IMAGE_HPP
#define FSPLAT_IMAGE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsplat {

/// Planar H x W x C image of real intensities, one Eigen array per channel.
/// Training and losses keep values in [0,1]; quantization happens only at
/// 8-bit export.
template <typename ScalarT>
struct ImageT {
    using Scalar = ScalarT;
    using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    std::vector<Plane> planes;

    ImageT() = default;
    ImageT(Eigen::Index height, Eigen::Index width, int channels, Scalar fill = Scalar(0)) {
        if (height < 1 || width < 1 || (channels != 1 && channels != 3))
            throw std::invalid_argument("image: dims must be positive with 1 or 3 channels");
        planes.assign(static_cast<size_t>(channels), Plane::Constant(height, width, fill));
    }

    Eigen::Index height() const { return planes.empty() ? 0 : planes[0].rows(); }
    Eigen::Index width() const { return planes.empty() ? 0 : planes[0].cols(); }
    int channels() const { return static_cast<int>(planes.size()); }
    Eigen::Index pixels() const { return height() * width(); }

    Scalar& operator()(Eigen::Index row, Eigen::Index col, int channel) {
        return planes[static_cast<size_t>(channel)](row, col);
    }
    Scalar operator()(Eigen::Index row, Eigen::Index col, int channel) const {
        return planes[static_cast<size_t>(channel)](row, col);
    }

    bool same_shape(const ImageT& other) const {
        return height() == other.height() && width() == other.width() &&
               channels() == other.channels();
    }
};

using Image = ImageT<double>;

/// Binary region mask (1 = inside). Same row/col layout as image planes.
using Mask = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

inline void require_same_shape(const Image& a, const Image& b, const char* what) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": image shapes differ (" +
                                    std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                                    "x" + std::to_string(a.channels()) + " vs " +
                                    std::to_string(b.height()) + "x" + std::to_string(b.width()) +
                                    "x" + std::to_string(b.channels()) + ")");
}

/// Box-average downsample by an integer factor. Partial border blocks are
/// averaged over the pixels they actually cover, so any input size works.
Image downsample(const Image& src, int factor);

}  // namespace fsplat

#endif
