#ifndef FSPLAT_TRAINER_HPP
#define FSPLAT_TRAINER_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "fsplat/densify.hpp"
#include "fsplat/gaussian_field.hpp"
#include "fsplat/image.hpp"
#include "fsplat/spectral.hpp"

namespace fsplat {

enum class RegularizerMode { Off, Naive, Annealed };

struct LearningRates {
    double pos = 1.6e-4;  // scaled by the canvas diagonal
    double pos_decay_target = 0.01;  // pos lr decays exponentially to this fraction
    double log_scale = 5e-3;
    double rotation = 1e-3;
    double opacity = 5e-2;
    double color = 2.5e-3;
    double depth = 1e-3;
};

struct TrainConfig {
    int64_t total_iters = 2000;
    int64_t densify_end = 0;    // 0 -> total_iters / 2
    int64_t warmup_iters = 500; // fit the 4x-downsampled target first
    int warmup_scale = 4;

    RegularizerMode freq_mode = RegularizerMode::Annealed;
    double freq_w_low = 1e-3;
    double freq_w_high = 1e-3;
    int64_t freq_t0 = 0;        // 0 -> densify_end / 5
    int64_t freq_t_end = 0;     // 0 -> densify_end
    double freq_d0_ratio = 0.2; // D0 as a fraction of the max spectral radius

    double lambda_dssim = 0.2;
    LearningRates lr;

    DensifyParams densify;
    double tau_multiplier = 0.0;  // 0 -> auto: 1.25 with regularizer, 1 without
    int64_t densify_interval = 100;
    int64_t densify_start = 0;  // 0 -> warmup_iters

    int init_count = 512;
    uint64_t seed = 1;
    int threads = 1;
    int64_t metrics_interval = 1;

    /// Fills the derived defaults above; call before validate/train.
    TrainConfig resolved() const;
    void validate(Eigen::Index target_h, Eigen::Index target_w) const;

    /// Schedule for the given render resolution (radii depend on dims).
    AnnealSchedule schedule_for(Eigen::Index h, Eigen::Index w) const;
};

struct IterationRecord {
    int64_t iteration = 0;
    double l1 = 0.0;
    double dssim = 0.0;
    FreqLossParts freq;
    double psnr = 0.0;
    double ssim = 0.0;
    int64_t splats = 0;
    int clones = 0;
    int splits = 0;
    int prunes = 0;
    std::vector<double> region_grad;  // optional Fig-style diagnostics
};

struct TotalLoss {
    double value = 0.0;
    double l1 = 0.0;
    double dssim = 0.0;
    FreqLossParts freq;
    Image pixel_grad;
};

/// (1 - lambda) * L1 + lambda * D-SSIM plus the frequency term while
/// 0 < t <= densify_end; the frequency term vanishes afterwards.
TotalLoss total_loss(const Image& rendered, const Image& truth, int64_t t,
                     const TrainConfig& config);

struct TrainResult {
    SplatField field;
    std::vector<IterationRecord> records;
};

/// Called after each recorded iteration with the current state.
using IterationHook =
    std::function<void(const IterationRecord&, const SplatField&, const Image& rendered)>;

/// Full optimization run: warmup on the downsampled target, upsample
/// transition, per-group Adam updates, densification cadence until
/// densify_end, frequency regularization over the same window. Bit-identical
/// results for identical config+seed regardless of thread count.
TrainResult train(const Image& target, const TrainConfig& config,
                  const std::vector<Mask>* region_masks = nullptr,
                  const IterationHook& hook = nullptr);

/// Mean absolute pixel gradient of the configured loss inside each mask.
std::vector<double> region_gradient_diagnostic(const SplatField& field, const Image& target,
                                               const std::vector<Mask>& masks, int64_t t,
                                               const TrainConfig& config);

}  // namespace fsplat

#endif
