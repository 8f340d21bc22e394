#ifndef FSPLAT_GAUSSIAN_FIELD_HPP
#define FSPLAT_GAUSSIAN_FIELD_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "fsplat/image.hpp"

namespace fsplat {

constexpr int kMaxChannels = 3;

/// One anisotropic 2D Gaussian in raw (pre-activation) parameters.
/// Activations: scale = exp(log_scale) (always positive), opacity =
/// logistic(opacity_logit) in (0,1). Color is stored unclamped and only
/// clamped to [0,1] when compositing. Depth is a free sort key.
struct GaussianSplat {
    Eigen::Vector2d pos = Eigen::Vector2d::Zero();        // (x, y) in pixels
    Eigen::Vector2d log_scale = Eigen::Vector2d::Zero();  // log of sigma per axis
    double rotation = 0.0;                                // radians
    double opacity_logit = 0.0;
    Eigen::Vector3d color = Eigen::Vector3d::Zero();      // first C entries used
    double depth = 0.0;

    bool all_finite() const {
        return pos.allFinite() && log_scale.allFinite() && std::isfinite(rotation) &&
               std::isfinite(opacity_logit) && color.allFinite() && std::isfinite(depth);
    }
};

struct CanvasSpec {
    Eigen::Index height = 0;
    Eigen::Index width = 0;
    int channels = 0;

    double diagonal() const {
        return std::hypot(static_cast<double>(height), static_cast<double>(width));
    }
};

/// Ordered set of splats over a canvas. Blend order is ascending depth with
/// ties broken by index, so iteration is deterministic.
struct SplatField {
    std::vector<GaussianSplat> splats;
    CanvasSpec canvas;

    size_t size() const { return splats.size(); }
};

/// Splat with activations applied, ready for rasterization.
struct ActivatedSplat {
    Eigen::Vector2d pos;
    Eigen::Matrix2d cov_inverse;  // symmetric positive definite
    double opacity;               // in (0, 1)
    Eigen::Vector3d color;        // still raw; clamped per-channel at blend time
    double depth;
    // Derived quantities used by the rasterizer.
    double bbox_rx;  // 3*sqrt(cov_xx)
    double bbox_ry;  // 3*sqrt(cov_yy)
    double inv_a;    // exp(-2*log_scale_1), first eigen direction of cov_inverse
    double inv_b;    // exp(-2*log_scale_2)
    double cos_rot;
    double sin_rot;
    double q_cut;    // alpha >= 1/255 iff q <= q_cut; saves the exp otherwise
};

double logistic(double x);
double logit(double p);

/// Applies the activations and builds the inverse covariance
/// R(rot) * diag(exp(-2*s1), exp(-2*s2)) * R(rot)^T. `index` is only used to
/// name the splat in error messages.
ActivatedSplat activate(const GaussianSplat& splat, std::ptrdiff_t index = -1);

/// Covariance R * diag(exp(2*s1), exp(2*s2)) * R^T (forward, not inverted).
Eigen::Matrix2d covariance(const GaussianSplat& splat);

/// Seeds `count` splats on a stratified-jittered grid covering the target
/// canvas. Color is sampled from the target under each position (nudged away
/// from exact 0/1 so the clamp never pins it); isotropic sigma follows the
/// footprint rule sigma = sqrt((H*W/count)/pi); opacity starts at 0.1.
SplatField init_field(const Image& target, int count, uint64_t seed);

/// Blend order: indices sorted by (depth, index).
std::vector<int> depth_order(const SplatField& field);

}  // namespace fsplat

#endif
