#include "fsplat/ablation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "fsplat/metrics.hpp"
#include "fsplat/parallel.hpp"
#include "fsplat/rasterizer.hpp"

namespace fsplat {

namespace {

struct RunOutcome {
    double psnr, ssim, l1;
    int64_t splats;
};

RunOutcome run_arm(const Image& target, TrainConfig cfg) {
    const TrainResult result = train(target, cfg);
    const RenderOutput rendered =
        render(result.field, target.height(), target.width(), cfg.threads);
    const MetricReport report = evaluate_metrics(rendered.image, target);
    return {report.psnr, report.ssim, report.l1,
            static_cast<int64_t>(result.field.splats.size())};
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

AblationRow summarize(const std::string& arm, const std::vector<AblationRun>& runs) {
    AblationRow row;
    row.arm = arm;
    std::vector<double> psnr, ssim, l1, splats;
    for (const auto& r : runs) {
        if (r.arm != arm) continue;
        psnr.push_back(r.psnr);
        ssim.push_back(r.ssim);
        l1.push_back(r.l1);
        splats.push_back(static_cast<double>(r.splats));
    }
    row.psnr = median(psnr);
    row.ssim = median(ssim);
    row.l1 = median(l1);
    row.splats = median(splats);
    return row;
}

}  // namespace

AblationResult run_ablation(const Image& target, const TrainConfig& base_config,
                            const AblationOptions& options) {
    if (options.seeds.empty())
        throw std::invalid_argument("ablation: need at least one seed");

    const size_t seed_count = options.seeds.size();
    std::vector<AblationRun> base_runs(seed_count);
    std::vector<AblationRun> fa_runs(seed_count);
    std::vector<AblationRun> fr_runs(seed_count);

    // Per-seed pipelines are independent; when several run concurrently each
    // pipeline gets a single thread so the outcome never depends on workers.
    const int workers = std::max(1, options.workers);
    TrainConfig seed_base = base_config;
    if (workers > 1) seed_base.threads = 1;

    // Matched-count search: the final count falls (noisily but monotonically)
    // as the threshold multiplier rises. Multiplicative steps from the count
    // ratio until the target is bracketed, then geometric bisection; the
    // count response has cliffs, so plain secant stepping oscillates. The
    // annealed arm calibrates first; the naive arm starts from the annealed
    // arm's multiplier (the regularized arms share thresholds when the
    // tolerance allows it).
    auto run_matched = [&](RegularizerMode mode, const std::string& arm, uint64_t seed,
                           int64_t target_count, double start_multiplier) {
        double multiplier = start_multiplier;
        double lo = 0.0, hi = 0.0;  // lo: count too high; hi: count too low
        double best_err = -1.0;
        AblationRun best;
        for (int attempt = 0; attempt < options.match_attempts; ++attempt) {
            TrainConfig cfg = seed_base;
            cfg.seed = seed;
            cfg.freq_mode = mode;
            cfg.tau_multiplier = multiplier;
            const RunOutcome out = run_arm(target, cfg);
            const double err = std::abs(static_cast<double>(out.splats) - target_count) /
                               static_cast<double>(target_count);
            if (best_err < 0.0 || err < best_err) {
                best_err = err;
                best = {arm,    seed,       out.psnr,   out.ssim,
                        out.l1, out.splats, multiplier, err <= options.match_tolerance};
            }
            if (err <= options.match_tolerance) break;
            const double ratio = static_cast<double>(out.splats) / target_count;
            if (ratio > 1.0)
                lo = std::max(lo, multiplier);
            else
                hi = hi == 0.0 ? multiplier : std::min(hi, multiplier);
            if (lo > 0.0 && hi > 0.0) {
                multiplier = std::sqrt(lo * hi);
            } else {
                multiplier = std::clamp(multiplier * std::pow(ratio, 0.8), 0.25, 64.0);
            }
        }
        return best;
    };

    parallel_for(0, static_cast<int64_t>(seed_count), workers, [&](int64_t i) {
        const uint64_t seed = options.seeds[static_cast<size_t>(i)];

        TrainConfig cfg = seed_base;
        cfg.seed = seed;
        cfg.freq_mode = RegularizerMode::Off;
        cfg.tau_multiplier = 1.0;
        const RunOutcome base = run_arm(target, cfg);
        base_runs[static_cast<size_t>(i)] =
            {"base", seed, base.psnr, base.ssim, base.l1, base.splats, 1.0, true};

        const double start =
            base_config.tau_multiplier > 0.0 ? base_config.tau_multiplier : 1.25;
        fa_runs[static_cast<size_t>(i)] = run_matched(RegularizerMode::Annealed,
                                                      "base+fr+fa", seed, base.splats,
                                                      start);
        fr_runs[static_cast<size_t>(i)] =
            run_matched(RegularizerMode::Naive, "base+fr", seed, base.splats,
                        fa_runs[static_cast<size_t>(i)].tau_multiplier);
    });

    AblationResult result;
    result.runs.reserve(3 * seed_count);
    for (const auto& r : base_runs) result.runs.push_back(r);
    for (const auto& r : fa_runs) result.runs.push_back(r);
    for (const auto& r : fr_runs) result.runs.push_back(r);

    result.rows.push_back(summarize("base", result.runs));
    result.rows.push_back(summarize("base+fr", result.runs));
    result.rows.push_back(summarize("base+fr+fa", result.runs));
    return result;
}

std::string ablation_csv(const AblationResult& result) {
    std::ostringstream out;
    out << "arm,psnr,ssim,l1,splats\n";
    char buf[160];
    for (const AblationRow& row : result.rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%.17g\n", row.arm.c_str(),
                      row.psnr, row.ssim, row.l1, row.splats);
        out << buf;
    }
    return out.str();
}

}  // namespace fsplat
