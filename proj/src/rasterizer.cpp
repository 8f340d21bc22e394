#include "fsplat/rasterizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "fsplat/parallel.hpp"

namespace fsplat {

namespace {

constexpr Eigen::Index kTileSize = 16;

struct RasterPlan {
    Eigen::Index height = 0, width = 0;
    int channels = 0;
    Eigen::Index tiles_x = 0, tiles_y = 0;
    std::vector<ActivatedSplat> activated;      // original index order
    std::vector<int> blend_order;               // indices sorted by (depth, index)
    std::vector<std::vector<int>> tile_splats;  // per tile, original indices in blend order
};

// Pixel column j covers center x = j + 0.5; the inclusive index range whose
// centers fall inside [lo, hi].
std::pair<Eigen::Index, Eigen::Index> center_range(double lo, double hi, Eigen::Index n) {
    const Eigen::Index first =
        std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::ceil(lo - 0.5)));
    const Eigen::Index last =
        std::min<Eigen::Index>(n - 1, static_cast<Eigen::Index>(std::floor(hi - 0.5)));
    return {first, last};
}

// Fills the plan in place so a caller-held plan keeps its buffer capacity
// across iterations.
void build_plan_into(RasterPlan& plan, const SplatField& field, Eigen::Index height,
                     Eigen::Index width) {
    if (height < 1 || width < 1)
        throw std::invalid_argument("render: viewport must be positive");
    if (field.splats.empty()) throw std::invalid_argument("render: empty splat field");
    if (field.canvas.channels != 1 && field.canvas.channels != 3)
        throw std::invalid_argument("render: field channels must be 1 or 3");

    plan.height = height;
    plan.width = width;
    plan.channels = field.canvas.channels;
    plan.tiles_x = (width + kTileSize - 1) / kTileSize;
    plan.tiles_y = (height + kTileSize - 1) / kTileSize;
    plan.tile_splats.resize(static_cast<size_t>(plan.tiles_x * plan.tiles_y));
    for (auto& list : plan.tile_splats) list.clear();

    plan.activated.clear();
    plan.activated.reserve(field.splats.size());
    for (size_t i = 0; i < field.splats.size(); ++i)
        plan.activated.push_back(activate(field.splats[i], static_cast<std::ptrdiff_t>(i)));

    plan.blend_order = depth_order(field);

    for (const int idx : plan.blend_order) {
        const ActivatedSplat& act = plan.activated[static_cast<size_t>(idx)];
        const auto [x0, x1] =
            center_range(act.pos.x() - act.bbox_rx, act.pos.x() + act.bbox_rx, width);
        const auto [y0, y1] =
            center_range(act.pos.y() - act.bbox_ry, act.pos.y() + act.bbox_ry, height);
        if (x0 > x1 || y0 > y1) continue;
        const Eigen::Index tx0 = x0 / kTileSize, tx1 = x1 / kTileSize;
        const Eigen::Index ty0 = y0 / kTileSize, ty1 = y1 / kTileSize;
        for (Eigen::Index ty = ty0; ty <= ty1; ++ty)
            for (Eigen::Index tx = tx0; tx <= tx1; ++tx)
                plan.tile_splats[static_cast<size_t>(ty * plan.tiles_x + tx)].push_back(idx);
    }
}

RasterPlan build_plan(const SplatField& field, Eigen::Index height, Eigen::Index width) {
    RasterPlan plan;
    build_plan_into(plan, field, height, width);
    return plan;
}

struct BlendSample {
    double alpha;
    double u1, u2;  // offset in the splat's eigenframe
    bool inside;
};

inline BlendSample evaluate_splat(const ActivatedSplat& act, double px, double py) {
    BlendSample s{0.0, 0.0, 0.0, false};
    const double dx = px - act.pos.x();
    const double dy = py - act.pos.y();
    if (std::abs(dx) > act.bbox_rx || std::abs(dy) > act.bbox_ry) return s;
    s.u1 = act.cos_rot * dx + act.sin_rot * dy;
    s.u2 = -act.sin_rot * dx + act.cos_rot * dy;
    const double q = act.inv_a * s.u1 * s.u1 + act.inv_b * s.u2 * s.u2;
    if (q > act.q_cut) return s;  // alpha would fall below the cull threshold
    s.alpha = act.opacity * std::exp(-0.5 * q);
    s.inside = s.alpha >= kAlphaCullThreshold;
    return s;
}

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

struct Entry {
    int slot;  // index into the tile's splat list
    double alpha;
    double transmittance;  // at entry
    double u1, u2;
};

struct TileState {
    std::vector<Entry> entries;       // all surviving contributions, pixel-major
    std::vector<int> entry_begin;     // per local pixel, offset into entries
};

}  // namespace

struct BlendState::Impl {
    RasterPlan plan;
    std::vector<TileState> tiles;
};

BlendState::BlendState() = default;
BlendState::BlendState(BlendState&&) noexcept = default;
BlendState& BlendState::operator=(BlendState&&) noexcept = default;
BlendState::~BlendState() = default;

namespace {

// Shared forward sweep over one tile. When `state` is set, contributions are
// recorded for a later backward pass.
void forward_tile(const RasterPlan& plan, int64_t tile, Image& image,
                  TileState* state, RenderOutput* contributors) {
    const Eigen::Index ty = tile / plan.tiles_x;
    const Eigen::Index tx = tile % plan.tiles_x;
    const auto& splats = plan.tile_splats[static_cast<size_t>(tile)];
    const Eigen::Index row0 = ty * kTileSize, row_end = std::min(plan.height, row0 + kTileSize);
    const Eigen::Index col0 = tx * kTileSize, col_end = std::min(plan.width, col0 + kTileSize);

    if (state) {
        const size_t pixel_count =
            static_cast<size_t>((row_end - row0) * (col_end - col0));
        state->entry_begin.assign(pixel_count + 1, 0);
        state->entries.clear();
    }

    size_t local_pixel = 0;
    for (Eigen::Index row = row0; row < row_end; ++row) {
        const double py = row + 0.5;
        for (Eigen::Index col = col0; col < col_end; ++col, ++local_pixel) {
            const double px = col + 0.5;
            double transmittance = 1.0;
            std::array<double, kMaxChannels> acc{0.0, 0.0, 0.0};
            for (size_t slot = 0; slot < splats.size(); ++slot) {
                const ActivatedSplat& act =
                    plan.activated[static_cast<size_t>(splats[slot])];
                const BlendSample s = evaluate_splat(act, px, py);
                if (!s.inside) continue;
                const double weight = s.alpha * transmittance;
                for (int c = 0; c < plan.channels; ++c)
                    acc[static_cast<size_t>(c)] += clamp01(act.color[c]) * weight;
                if (state)
                    state->entries.push_back(
                        {static_cast<int>(slot), s.alpha, transmittance, s.u1, s.u2});
                if (contributors)
                    contributors
                        ->per_pixel_contributors[static_cast<size_t>(row * plan.width + col)]
                        .push_back({splats[slot], weight});
                transmittance *= 1.0 - s.alpha;
            }
            for (int c = 0; c < plan.channels; ++c)
                image(row, col, c) = acc[static_cast<size_t>(c)];
            if (state) state->entry_begin[local_pixel + 1] =
                static_cast<int>(state->entries.size());
        }
    }
}

Image forward_pass(const RasterPlan& plan, int threads, BlendState::Impl* state,
                   RenderOutput* contributors) {
    Image image(plan.height, plan.width, plan.channels);
    const int64_t tile_count = plan.tiles_x * plan.tiles_y;
    if (state) state->tiles.resize(static_cast<size_t>(tile_count));
    parallel_for(0, tile_count, threads, [&](int64_t tile) {
        forward_tile(plan, tile, image,
                     state ? &state->tiles[static_cast<size_t>(tile)] : nullptr,
                     contributors);
    });
    return image;
}

}  // namespace

void SplatGrads::resize(Eigen::Index n) {
    d_pos = Eigen::Matrix2Xd::Zero(2, n);
    d_log_scale = Eigen::Matrix2Xd::Zero(2, n);
    d_rotation = Eigen::VectorXd::Zero(n);
    d_opacity_logit = Eigen::VectorXd::Zero(n);
    d_color = Eigen::Matrix3Xd::Zero(3, n);
    pos_grad_norm = Eigen::VectorXd::Zero(n);
    touched.assign(static_cast<size_t>(n), 0);
}

RenderOutput render(const SplatField& field, Eigen::Index height, Eigen::Index width,
                    int threads, bool record_contributors) {
    const RasterPlan plan = build_plan(field, height, width);
    RenderOutput out;
    out.contributors_recorded = record_contributors;
    if (record_contributors)
        out.per_pixel_contributors.assign(static_cast<size_t>(height * width), {});
    out.image = forward_pass(plan, threads, nullptr, record_contributors ? &out : nullptr);
    return out;
}

Image render_with_state(const SplatField& field, Eigen::Index height, Eigen::Index width,
                        int threads, BlendState& state) {
    if (!state.impl_) state.impl_ = std::make_unique<BlendState::Impl>();
    build_plan_into(state.impl_->plan, field, height, width);
    return forward_pass(state.impl_->plan, threads, state.impl_.get(), nullptr);
}

SplatGrads backward_from_state(const BlendState& state, const Image& d_image, int threads) {
    if (!state.valid())
        throw std::invalid_argument("backward_from_state: state not initialized");
    const RasterPlan& plan = state.impl_->plan;
    if (d_image.height() != plan.height || d_image.width() != plan.width ||
        d_image.channels() != plan.channels)
        throw std::invalid_argument("render_backward: d_image does not match viewport");

    const Eigen::Index n = static_cast<Eigen::Index>(plan.activated.size());
    const int64_t tile_count = plan.tiles_x * plan.tiles_y;

    // 9 gradient slots per splat: pos(2), log_scale(2), rotation, opacity
    // logit, color(3). Partials accumulate per tile and are folded in tile
    // index order afterwards so the result is thread-count invariant.
    struct TilePartial {
        std::vector<std::array<double, 9>> grads;
        std::vector<uint8_t> touched;
    };
    std::vector<TilePartial> partials(static_cast<size_t>(tile_count));

    parallel_for(0, tile_count, threads, [&](int64_t tile) {
        const auto& splats = plan.tile_splats[static_cast<size_t>(tile)];
        const TileState& tile_state = state.impl_->tiles[static_cast<size_t>(tile)];
        TilePartial& part = partials[static_cast<size_t>(tile)];
        if (splats.empty() || tile_state.entries.empty()) return;
        part.grads.assign(splats.size(), {});
        part.touched.assign(splats.size(), 0);

        const Eigen::Index ty = tile / plan.tiles_x;
        const Eigen::Index tx = tile % plan.tiles_x;
        const Eigen::Index row0 = ty * kTileSize;
        const Eigen::Index row_end = std::min(plan.height, row0 + kTileSize);
        const Eigen::Index col0 = tx * kTileSize;
        const Eigen::Index col_end = std::min(plan.width, col0 + kTileSize);

        size_t local_pixel = 0;
        for (Eigen::Index row = row0; row < row_end; ++row) {
            for (Eigen::Index col = col0; col < col_end; ++col, ++local_pixel) {
                const int begin = tile_state.entry_begin[local_pixel];
                const int end = tile_state.entry_begin[local_pixel + 1];
                if (begin == end) continue;

                std::array<double, kMaxChannels> pixel_grad{0.0, 0.0, 0.0};
                for (int c = 0; c < plan.channels; ++c)
                    pixel_grad[static_cast<size_t>(c)] = d_image(row, col, c);

                // Reverse sweep; suffix holds the composite behind the current
                // splat under unit transmittance.
                std::array<double, kMaxChannels> suffix{0.0, 0.0, 0.0};
                for (int e = end; e-- > begin;) {
                    const Entry& entry = tile_state.entries[static_cast<size_t>(e)];
                    const int idx = splats[static_cast<size_t>(entry.slot)];
                    const ActivatedSplat& act = plan.activated[static_cast<size_t>(idx)];

                    double d_alpha = 0.0;
                    auto& slot_grad = part.grads[static_cast<size_t>(entry.slot)];
                    for (int c = 0; c < plan.channels; ++c) {
                        const double g = pixel_grad[static_cast<size_t>(c)];
                        const double col_c = clamp01(act.color[c]);
                        d_alpha += g * entry.transmittance *
                                   (col_c - suffix[static_cast<size_t>(c)]);
                        if (act.color[c] > 0.0 && act.color[c] < 1.0)
                            slot_grad[6 + static_cast<size_t>(c)] +=
                                g * entry.alpha * entry.transmittance;
                        suffix[static_cast<size_t>(c)] =
                            col_c * entry.alpha +
                            (1.0 - entry.alpha) * suffix[static_cast<size_t>(c)];
                    }

                    // alpha = opacity * exp(-q/2), q = inv_a*u1^2 + inv_b*u2^2.
                    const double wa = d_alpha * entry.alpha;
                    slot_grad[5] += d_alpha * entry.alpha * (1.0 - act.opacity);
                    slot_grad[2] += wa * act.inv_a * entry.u1 * entry.u1;
                    slot_grad[3] += wa * act.inv_b * entry.u2 * entry.u2;
                    slot_grad[4] += -wa * (act.inv_a - act.inv_b) * entry.u1 * entry.u2;
                    const double m1 = act.inv_a * entry.u1;
                    const double m2 = act.inv_b * entry.u2;
                    slot_grad[0] += wa * (act.cos_rot * m1 - act.sin_rot * m2);
                    slot_grad[1] += wa * (act.sin_rot * m1 + act.cos_rot * m2);
                    part.touched[static_cast<size_t>(entry.slot)] = 1;
                }
            }
        }
    });

    SplatGrads grads;
    grads.resize(n);
    for (int64_t tile = 0; tile < tile_count; ++tile) {
        const auto& splats = plan.tile_splats[static_cast<size_t>(tile)];
        const TilePartial& part = partials[static_cast<size_t>(tile)];
        if (part.grads.empty()) continue;
        for (size_t slot = 0; slot < splats.size(); ++slot) {
            const Eigen::Index idx = splats[slot];
            const auto& sg = part.grads[slot];
            grads.d_pos(0, idx) += sg[0];
            grads.d_pos(1, idx) += sg[1];
            grads.d_log_scale(0, idx) += sg[2];
            grads.d_log_scale(1, idx) += sg[3];
            grads.d_rotation(idx) += sg[4];
            grads.d_opacity_logit(idx) += sg[5];
            grads.d_color(0, idx) += sg[6];
            grads.d_color(1, idx) += sg[7];
            grads.d_color(2, idx) += sg[8];
            if (part.touched[slot]) grads.touched[static_cast<size_t>(idx)] = 1;
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) grads.pos_grad_norm(i) = grads.d_pos.col(i).norm();
    return grads;
}

SplatGrads render_backward(const SplatField& field, Eigen::Index height,
                           Eigen::Index width, const Image& d_image, int threads) {
    BlendState state;
    render_with_state(field, height, width, threads, state);
    return backward_from_state(state, d_image, threads);
}

}  // namespace fsplat
