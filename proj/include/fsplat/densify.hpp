#ifndef FSPLAT_DENSIFY_HPP
#define FSPLAT_DENSIFY_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "fsplat/gaussian_field.hpp"

namespace fsplat {

/// Per-splat densification statistics. Alongside the norm accumulator the
/// gradient vector itself is accumulated — clone offsets need its direction.
struct DensifyStats {
    Eigen::VectorXd grad_norm_accum;
    Eigen::Matrix2Xd grad_vec_accum;
    Eigen::VectorXi obs_count;

    void resize(Eigen::Index n);
    Eigen::Index size() const { return grad_norm_accum.size(); }

    double average_norm(Eigen::Index i) const {
        return obs_count(i) > 0 ? grad_norm_accum(i) / obs_count(i) : 0.0;
    }
};

/// Adds one iteration of positional gradients. `touched[i]` marks splats that
/// contributed to at least one pixel; only those advance obs_count.
void accumulate(DensifyStats& stats, const Eigen::Matrix2Xd& pos_grads,
                const std::vector<uint8_t>& touched);

struct DensifyParams {
    double tau_pos = 2e-4;              // avg positional-gradient threshold
    double tau_multiplier = 1.0;        // raised for frequency-regularized runs
    double sigma_split_frac = 0.01;     // of canvas diagonal
    double split_factor = 1.6;          // children scale = parent / 1.6
    double clone_offset_sigma = 0.5;    // clone offset = 0.5 * sigma
    double epsilon_opacity = 0.005;     // prune threshold

    double effective_tau() const { return tau_pos * tau_multiplier; }
};

struct DensifyReport {
    int clones = 0;
    int splits = 0;
    int prunes = 0;
    /// Slots whose splat was replaced in place by a split child (the sibling
    /// is appended at the end). Lets the optimizer reset per-slot state.
    std::vector<int> split_slots;
};

/// One densification pass. Splats whose average positional gradient reaches
/// the threshold are cloned when small (max activated sigma below the split
/// threshold) or split in two when large. Clone copies shift by
/// 0.5*sigma along the accumulated gradient direction; split children sample
/// their positions from the parent density with scales parent/1.6. Stats for
/// affected splats reset to zero; new splats start at zero. Deterministic for
/// a given seed.
DensifyReport densify_step(SplatField& field, DensifyStats& stats,
                           const DensifyParams& params, uint64_t seed);

/// Removes splats whose activated opacity falls below epsilon. Never empties
/// the field: if everything qualifies, the max-opacity splat survives.
/// `kept` (optional) receives the surviving original indices in order.
int prune(SplatField& field, double epsilon_opacity, std::vector<int>* kept = nullptr);

}  // namespace fsplat

#endif
