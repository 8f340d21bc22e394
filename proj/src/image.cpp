#include "fsplat/image.hpp"

namespace fsplat {

Image downsample(const Image& src, int factor) {
    if (factor < 1) throw std::invalid_argument("downsample: factor must be >= 1");
    if (factor == 1) return src;
    const Eigen::Index h = (src.height() + factor - 1) / factor;
    const Eigen::Index w = (src.width() + factor - 1) / factor;
    Image out(h, w, src.channels());
    for (int c = 0; c < src.channels(); ++c) {
        for (Eigen::Index i = 0; i < h; ++i) {
            const Eigen::Index r0 = i * factor;
            const Eigen::Index r1 = std::min<Eigen::Index>(r0 + factor, src.height());
            for (Eigen::Index j = 0; j < w; ++j) {
                const Eigen::Index c0 = j * factor;
                const Eigen::Index c1 = std::min<Eigen::Index>(c0 + factor, src.width());
                out(i, j, c) =
                    src.planes[static_cast<size_t>(c)].block(r0, c0, r1 - r0, c1 - c0).mean();
            }
        }
    }
    return out;
}

}  // namespace fsplat
