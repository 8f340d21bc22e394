#ifndef FSPLAT_ABLATION_HPP
#define FSPLAT_ABLATION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fsplat/image.hpp"
#include "fsplat/trainer.hpp"

namespace fsplat {

/// Three-arm ablation over one target: the spatial-loss baseline, naive
/// frequency regularization, and the annealed (progressive) variant. The
/// regularized arms raise the densification threshold until their final splat
/// counts match the baseline within the tolerance, mirroring the matched-count
/// comparison protocol.
struct AblationOptions {
    std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
    int match_attempts = 4;
    double match_tolerance = 0.05;
    /// Seeds are independent, so they can run concurrently (each run then
    /// uses one thread). Results are identical for any worker count.
    int workers = 1;
};

struct AblationRun {
    std::string arm;
    uint64_t seed = 0;
    double psnr = 0.0;
    double ssim = 0.0;
    double l1 = 0.0;
    int64_t splats = 0;
    double tau_multiplier = 1.0;
    bool count_matched = true;
};

struct AblationRow {
    std::string arm;
    double psnr = 0.0;   // medians over seeds
    double ssim = 0.0;
    double l1 = 0.0;
    double splats = 0.0;
};

struct AblationResult {
    std::vector<AblationRow> rows;  // base, base+fr, base+fr+fa
    std::vector<AblationRun> runs;
};

/// `base_config` supplies everything except the regularizer mode and the tau
/// multiplier, which the runner controls per arm.
AblationResult run_ablation(const Image& target, const TrainConfig& base_config,
                            const AblationOptions& options);

std::string ablation_csv(const AblationResult& result);

}  // namespace fsplat

#endif
