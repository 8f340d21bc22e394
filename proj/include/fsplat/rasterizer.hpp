#ifndef FSPLAT_RASTERIZER_HPP
#define FSPLAT_RASTERIZER_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "fsplat/gaussian_field.hpp"
#include "fsplat/image.hpp"

namespace fsplat {

/// A contribution skipped by the blend predicate adds nothing and leaves
/// transmittance untouched. The predicate is part of the render contract:
/// skip when the pixel center lies outside the splat's 3-sigma bounding box
/// or when alpha = opacity * exp(-q/2) falls below 1/255.
constexpr double kAlphaCullThreshold = 1.0 / 255.0;

struct PixelContribution {
    int splat;      // original field index
    double weight;  // alpha_i * transmittance at entry
};

struct RenderOutput {
    Image image;
    /// Filled only when requested: per pixel (row-major), the surviving
    /// contributions in blend order.
    std::vector<std::vector<PixelContribution>> per_pixel_contributors;
    bool contributors_recorded = false;
};

/// Front-to-back alpha blend over splats sorted by (depth, index), black
/// background, colors clamped to [0,1] when compositing. Pixel centers sit at
/// (col + 0.5, row + 0.5). Tiles run in parallel; pixels are owned by exactly
/// one tile, so output is bit-identical for any thread count.
RenderOutput render(const SplatField& field, Eigen::Index height, Eigen::Index width,
                    int threads = 1, bool record_contributors = false);

struct SplatGrads {
    Eigen::Matrix2Xd d_pos;
    Eigen::Matrix2Xd d_log_scale;
    Eigen::VectorXd d_rotation;
    Eigen::VectorXd d_opacity_logit;
    Eigen::Matrix3Xd d_color;       // rows beyond the channel count stay zero
    Eigen::VectorXd pos_grad_norm;  // ||dL/dpos|| per splat, for densify stats
    std::vector<uint8_t> touched;   // splat survived the predicate somewhere

    void resize(Eigen::Index n);
};

/// Exact gradients of the composite under the same blend predicate as the
/// forward pass. Per-tile partial gradients are reduced in tile index order,
/// so results do not depend on the worker count.
SplatGrads render_backward(const SplatField& field, Eigen::Index height,
                           Eigen::Index width, const Image& d_image, int threads = 1);

/// Forward pass that additionally captures the per-pixel blend state so a
/// following backward pass can skip re-rendering. The state is tied to the
/// exact (field, viewport) pair it was built from; gradients are identical to
/// render_backward's.
class BlendState {
public:
    BlendState();
    BlendState(const BlendState&) = delete;
    BlendState& operator=(const BlendState&) = delete;
    BlendState(BlendState&&) noexcept;
    BlendState& operator=(BlendState&&) noexcept;
    ~BlendState();

    bool valid() const { return impl_ != nullptr; }

    struct Impl;  // defined in rasterizer.cpp

private:
    friend Image render_with_state(const SplatField&, Eigen::Index, Eigen::Index, int,
                                   BlendState&);
    friend SplatGrads backward_from_state(const BlendState&, const Image&, int);
    std::unique_ptr<Impl> impl_;
};

Image render_with_state(const SplatField& field, Eigen::Index height, Eigen::Index width,
                        int threads, BlendState& state);

SplatGrads backward_from_state(const BlendState& state, const Image& d_image,
                               int threads = 1);

}  // namespace fsplat

#endif
