#include "fsplat/gaussian_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fsplat/random.hpp"

namespace fsplat {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) {
    if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("logit: need p in (0,1)");
    return std::log(p / (1.0 - p));
}

ActivatedSplat activate(const GaussianSplat& splat, std::ptrdiff_t index) {
    if (!splat.all_finite())
        throw std::invalid_argument("activate: non-finite parameter in splat " +
                                    std::to_string(index));
    ActivatedSplat out;
    out.pos = splat.pos;
    out.depth = splat.depth;
    out.color = splat.color;
    out.opacity = logistic(splat.opacity_logit);

    const double c = std::cos(splat.rotation);
    const double s = std::sin(splat.rotation);
    out.cos_rot = c;
    out.sin_rot = s;
    out.inv_a = std::exp(-2.0 * splat.log_scale[0]);
    out.inv_b = std::exp(-2.0 * splat.log_scale[1]);

    // cov_inverse = R diag(inv_a, inv_b) R^T
    out.cov_inverse(0, 0) = out.inv_a * c * c + out.inv_b * s * s;
    out.cov_inverse(0, 1) = (out.inv_a - out.inv_b) * c * s;
    out.cov_inverse(1, 0) = out.cov_inverse(0, 1);
    out.cov_inverse(1, 1) = out.inv_a * s * s + out.inv_b * c * c;

    const double var1 = std::exp(2.0 * splat.log_scale[0]);
    const double var2 = std::exp(2.0 * splat.log_scale[1]);
    const double cov_xx = var1 * c * c + var2 * s * s;
    const double cov_yy = var1 * s * s + var2 * c * c;
    out.bbox_rx = 3.0 * std::sqrt(cov_xx);
    out.bbox_ry = 3.0 * std::sqrt(cov_yy);
    out.q_cut = 2.0 * std::log(out.opacity * 255.0);
    return out;
}

Eigen::Matrix2d covariance(const GaussianSplat& splat) {
    const double c = std::cos(splat.rotation);
    const double s = std::sin(splat.rotation);
    const double var1 = std::exp(2.0 * splat.log_scale[0]);
    const double var2 = std::exp(2.0 * splat.log_scale[1]);
    Eigen::Matrix2d cov;
    cov(0, 0) = var1 * c * c + var2 * s * s;
    cov(0, 1) = (var1 - var2) * c * s;
    cov(1, 0) = cov(0, 1);
    cov(1, 1) = var1 * s * s + var2 * c * c;
    return cov;
}

SplatField init_field(const Image& target, int count, uint64_t seed) {
    if (count < 1) throw std::invalid_argument("init_field: count must be >= 1");
    const Eigen::Index h = target.height();
    const Eigen::Index w = target.width();

    SplatField field;
    field.canvas = {h, w, target.channels()};
    field.splats.reserve(static_cast<size_t>(count));

    // Stratified grid with roughly canvas-proportional cell counts.
    const double aspect = static_cast<double>(w) / static_cast<double>(h);
    int grid_cols = std::max(1, static_cast<int>(std::ceil(std::sqrt(count * aspect))));
    int grid_rows = std::max(1, static_cast<int>(std::ceil(static_cast<double>(count) / grid_cols)));

    const double cell_w = static_cast<double>(w) / grid_cols;
    const double cell_h = static_cast<double>(h) / grid_rows;
    const double sigma = std::sqrt(static_cast<double>(h * w) / count / M_PI);
    const double opacity0 = logit(0.1);

    Rng rng(fork_seed(seed, 0x1417));
    for (int k = 0; k < count; ++k) {
        const int gi = k / grid_cols;
        const int gj = k % grid_cols;
        GaussianSplat splat;
        const double x = (gj + rng.uniform()) * cell_w;
        const double y = (gi + rng.uniform()) * cell_h;
        splat.pos = {x, y};
        splat.log_scale.setConstant(std::log(sigma));
        splat.rotation = 0.0;
        splat.opacity_logit = opacity0;
        splat.depth = 0.0;

        const Eigen::Index row =
            std::clamp<Eigen::Index>(static_cast<Eigen::Index>(y), 0, h - 1);
        const Eigen::Index col =
            std::clamp<Eigen::Index>(static_cast<Eigen::Index>(x), 0, w - 1);
        splat.color.setZero();
        for (int c = 0; c < target.channels(); ++c) {
            // Keep sampled colors strictly inside (0,1): the render-time clamp
            // has zero gradient outside, which would freeze exact 0/1 colors.
            splat.color[c] = std::clamp(target(row, col, c), 1.0 / 255.0, 254.0 / 255.0);
        }
        field.splats.push_back(splat);
    }
    return field;
}

std::vector<int> depth_order(const SplatField& field) {
    std::vector<int> order(field.splats.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double da = field.splats[static_cast<size_t>(a)].depth;
        const double db = field.splats[static_cast<size_t>(b)].depth;
        if (da != db) return da < db;
        return a < b;
    });
    return order;
}

}  // namespace fsplat
