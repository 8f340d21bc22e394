// Acceptance suite: one numbered criterion per invocation (or all when run
// without arguments). Prints exactly one PASS/FAIL line per criterion and
// exits nonzero if any checked criterion fails.

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fsplat/ablation.hpp"
#include "fsplat/fixtures.hpp"
#include "fsplat/io/checkpoint.hpp"
#include "fsplat/io/config.hpp"
#include "fsplat/metrics.hpp"
#include "fsplat/rasterizer.hpp"
#include "fsplat/trainer.hpp"
#include "oracles.hpp"

#ifndef FSPLAT_CLI_PATH
#define FSPLAT_CLI_PATH "fsplat"
#endif
#ifndef FSPLAT_SOURCE_DIR
#define FSPLAT_SOURCE_DIR "."
#endif

namespace fs = std::filesystem;
using namespace fsplat;

namespace {

struct Criterion {
    int number;
    const char* name;
    std::function<bool(std::string&)> run;
};

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

#define REQUIRE_MSG(cond, msg)                         \
    do {                                               \
        if (!(cond)) {                                 \
            detail = msg;                              \
            return false;                              \
        }                                              \
    } while (0)

// ---------------------------------------------------------------- 1
bool spectral_oracle_equivalence(std::string& detail) {
    const double t0 = now_seconds();
    int images = 0;
    double max_err = 0.0;
    for (Eigen::Index h = 2; h <= 16; ++h) {
        for (Eigen::Index w = 2; w <= 16; ++w) {
            const Image img = oracle::random_image(h, w, 1, 7000 + h * 37 + w);
            const Spectrum fast = dft2(img);
            const Spectrum slow = oracle::brute_dft2(img);
            max_err = std::max(max_err,
                               (fast.planes[0] - slow.planes[0]).abs().maxCoeff());
            ++images;
        }
    }
    const double elapsed = now_seconds() - t0;
    std::ostringstream info;
    info << images << " images (sizes 2..16 both parities), max |err| = " << max_err
         << ", " << elapsed << " s";
    detail = info.str();
    return images >= 200 && max_err < 1e-9 && elapsed < 5.0;
}

// ---------------------------------------------------------------- 2
bool spectrum_invariants(std::string& detail) {
    double worst_sym = 0.0, worst_parseval = 0.0;
    for (uint64_t seed = 0; seed < 1000; ++seed) {
        const Image img = oracle::random_image(32, 32, 1, 90000 + seed);
        const Spectrum spec = dft2(img);
        const auto& plane = spec.planes[0];
        for (Eigen::Index i = 0; i < 32; ++i) {
            for (Eigen::Index j = 0; j < 32; ++j) {
                const Eigen::Index iu = (32 - i) % 32;
                const Eigen::Index jv = (32 - j) % 32;
                worst_sym =
                    std::max(worst_sym, std::abs(plane(i, j) - std::conj(plane(iu, jv))));
            }
        }
        const double lhs = plane.abs2().sum();
        const double rhs = 32.0 * 32.0 * img.planes[0].square().sum();
        worst_parseval = std::max(worst_parseval, std::abs(lhs - rhs) / std::abs(rhs));
    }
    std::ostringstream info;
    info << "1000 images: conj-symmetry " << worst_sym << " (<1e-10), Parseval "
         << worst_parseval << " rel (<1e-9)";
    detail = info.str();
    return worst_sym < 1e-10 && worst_parseval < 1e-9;
}

// ---------------------------------------------------------------- 3
bool gradient_suite(std::string& detail) {
    const double t0 = now_seconds();
    double worst_l1 = 0.0, worst_dssim = 0.0, worst_freq = 0.0, worst_raster = 0.0;

    {  // L1, off-kink by construction.
        const Image a = oracle::random_image(12, 12, 3, 1, 0.6, 0.95);
        const Image b = oracle::random_image(12, 12, 3, 2, 0.05, 0.4);
        const ValueWithGrad g = l1(a, b);
        for (int probe = 0; probe < 40; ++probe) {
            Rng rng(300 + probe);
            const Eigen::Index i = rng.uniform_int(12);
            const Eigen::Index j = rng.uniform_int(12);
            const int c = static_cast<int>(rng.uniform_int(3));
            const double fd = oracle::central_diff(
                [&](double v) {
                    Image p = a;
                    p(i, j, c) = v;
                    return l1_value(p, b);
                },
                a(i, j, c), 1e-5);
            worst_l1 = std::max(worst_l1, oracle::rel_error(g.grad(i, j, c), fd, 1e-8));
        }
    }

    {  // D-SSIM.
        const Image a = oracle::random_image(16, 16, 1, 3);
        const Image b = oracle::random_image(16, 16, 1, 4);
        const ValueWithGrad g = d_ssim(a, b);
        for (int probe = 0; probe < 40; ++probe) {
            Rng rng(400 + probe);
            const Eigen::Index i = rng.uniform_int(16);
            const Eigen::Index j = rng.uniform_int(16);
            // Wide step: corner pixels carry ~1e-8-scale gradients, so the
            // subtractive noise floor (~eps*f/h) needs h this large before
            // the quotient resolves them; truncation stays below 1e-5 here.
            const double fd = oracle::central_diff(
                [&](double v) {
                    Image p = a;
                    p(i, j, 0) = v;
                    return d_ssim(p, b).value;
                },
                a(i, j, 0), 1e-4);
            worst_dssim =
                std::max(worst_dssim, oracle::rel_error(g.grad(i, j, 0), fd, 1e-8));
        }
    }

    {  // Frequency loss, kink-excluded.
        AnnealSchedule sched;
        sched.t0 = 100;
        sched.t_end = 500;
        sched.d = max_spectral_radius(6, 6);
        sched.d0 = 0.25 * sched.d;
        sched.w_low = 1.0;
        sched.w_high = 0.8;
        int images = 0;
        for (uint64_t seed = 0; seed < 60 && images < 3; ++seed) {
            const Image truth = oracle::random_image(6, 6, 1, 9000 + seed);
            const Image rendered = oracle::random_image(6, 6, 1, 9100 + seed);
            if (!oracle::freq_fd_margins_ok(rendered, truth, sched, 300, 1e-3)) continue;
            ++images;
            const FreqLossGrad g = freq_loss_backward(rendered, truth, 300, sched);
            for (Eigen::Index i = 0; i < 6; ++i) {
                for (Eigen::Index j = 0; j < 6; ++j) {
                    const double fd = oracle::central_diff(
                        [&](double v) {
                            Image p = rendered;
                            p(i, j, 0) = v;
                            return freq_loss(p, truth, 300, sched).loss;
                        },
                        rendered(i, j, 0), 1e-5);
                    worst_freq = std::max(
                        worst_freq, oracle::rel_error(g.pixel_grad(i, j, 0), fd, 1e-7));
                }
            }
        }
        if (images < 3) {
            detail = "freq margin screen starved";
            return false;
        }
    }

    {  // Rasterizer parameters on margin-screened random scenes.
        constexpr Eigen::Index size = 14;
        int scenes = 0;
        for (uint64_t seed = 40; seed < 400 && scenes < 2; ++seed) {
            const SplatField field = oracle::random_field(size, 8, seed);
            if (!oracle::raster_fd_margins_ok(field, size)) continue;
            ++scenes;
            const Image weights =
                oracle::random_image(size, size, 3, seed + 5000, -1.0, 1.0);
            auto probe = [&](const SplatField& f) {
                const RenderOutput out = render(f, size, size);
                double total = 0.0;
                for (int c = 0; c < 3; ++c)
                    total += (out.image.planes[c] * weights.planes[c]).sum();
                return total;
            };
            const SplatGrads grads = render_backward(field, size, size, weights);
            const double h = 1e-4;
            auto fd_for = [&](size_t i, auto&& mutate) {
                SplatField plus = field, minus = field;
                mutate(plus.splats[i], +h);
                mutate(minus.splats[i], -h);
                return (probe(plus) - probe(minus)) / (2.0 * h);
            };
            for (size_t i = 0; i < field.splats.size(); ++i) {
                const Eigen::Index col = static_cast<Eigen::Index>(i);
                worst_raster = std::max(
                    worst_raster,
                    oracle::rel_error(grads.d_pos(0, col),
                                      fd_for(i, [](GaussianSplat& s, double d) {
                                          s.pos.x() += d;
                                      }), 1e-7));
                worst_raster = std::max(
                    worst_raster,
                    oracle::rel_error(grads.d_pos(1, col),
                                      fd_for(i, [](GaussianSplat& s, double d) {
                                          s.pos.y() += d;
                                      }), 1e-7));
                worst_raster = std::max(
                    worst_raster,
                    oracle::rel_error(grads.d_log_scale(0, col),
                                      fd_for(i, [](GaussianSplat& s, double d) {
                                          s.log_scale[0] += d;
                                      }), 1e-7));
                worst_raster = std::max(
                    worst_raster,
                    oracle::rel_error(grads.d_log_scale(1, col),
                                      fd_for(i, [](GaussianSplat& s, double d) {
                                          s.log_scale[1] += d;
                                      }), 1e-7));
                worst_raster = std::max(
                    worst_raster,
                    oracle::rel_error(grads.d_rotation(col),
                                      fd_for(i, [](GaussianSplat& s, double d) {
                                          s.rotation += d;
                                      }), 1e-7));
                worst_raster = std::max(
                    worst_raster,
                    oracle::rel_error(grads.d_opacity_logit(col),
                                      fd_for(i, [](GaussianSplat& s, double d) {
                                          s.opacity_logit += d;
                                      }), 1e-7));
                for (int c = 0; c < 3; ++c)
                    worst_raster = std::max(
                        worst_raster,
                        oracle::rel_error(grads.d_color(c, col),
                                          fd_for(i, [c](GaussianSplat& s, double d) {
                                              s.color[c] += d;
                                          }), 1e-7));
            }
        }
        if (scenes < 2) {
            detail = "rasterizer margin screen starved";
            return false;
        }
    }

    const double elapsed = now_seconds() - t0;
    std::ostringstream info;
    info << "worst rel err: l1 " << worst_l1 << ", dssim " << worst_dssim << ", freq "
         << worst_freq << " (<1e-4); raster " << worst_raster << " (<1e-3); " << elapsed
         << " s";
    detail = info.str();
    return worst_l1 < 1e-4 && worst_dssim < 1e-4 && worst_freq < 1e-4 &&
           worst_raster < 1e-3 && elapsed < 60.0;
}

// ---------------------------------------------------------------- 4
bool annealing_properties(std::string& detail) {
    AnnealSchedule sched;
    sched.t0 = 137;
    sched.t_end = 977;
    sched.d = max_spectral_radius(48, 36);
    sched.d0 = 0.2 * sched.d;
    sched.w_low = sched.w_high = 1.0;

    double prev = -1.0;
    for (int64_t t = 0; t <= 1200; ++t) {
        const double dt = band_radius(t, sched);
        REQUIRE_MSG(dt >= prev, "band_radius not monotone");
        prev = dt;
        if (t <= sched.t0) REQUIRE_MSG(dt == sched.d0, "band_radius != D0 before T0");
    }
    REQUIRE_MSG(band_radius(sched.t_end, sched) == sched.d, "band_radius(T) != D exactly");

    for (const auto& [h, w] : std::vector<std::pair<int, int>>{
             {8, 8}, {16, 16}, {32, 32}, {12, 8}, {9, 13}, {17, 32}}) {
        const double d = max_spectral_radius(h, w);
        const double d0 = 0.2 * d;
        const Eigen::ArrayXXd cover =
            make_lowpass(d0, h, w).mask + make_highpass(d, d0, h, w).mask;
        REQUIRE_MSG((cover == 1.0).all(),
                    "low + annealed-high at t=T does not partition the disc");
    }
    detail = "monotone ramp, exact endpoints, exact disc partition on 6 dim pairs";
    return true;
}

// ---------------------------------------------------------------- 5
bool case_split(std::string& detail) {
    const Image truth = oracle::random_image(8, 8, 3, 41);
    const Image rendered = oracle::random_image(8, 8, 3, 43);
    AnnealSchedule sched;
    sched.t0 = 100;
    sched.t_end = 500;
    sched.d = max_spectral_radius(8, 8);
    sched.d0 = 0.25 * sched.d;
    sched.w_low = 0.7;
    sched.w_high = 1.3;

    // t <= T0: invariant to w_high, high parts inactive.
    AnnealSchedule loud = sched;
    loud.w_high = 1e6;
    const FreqLossResult quiet_r = freq_loss(rendered, truth, sched.t0, sched);
    const FreqLossResult loud_r = freq_loss(rendered, truth, sched.t0, loud);
    REQUIRE_MSG(quiet_r.loss == loud_r.loss, "L_f depends on w_high before T0");
    REQUIRE_MSG(loud_r.parts.high_amp == 0.0 && loud_r.parts.high_phase == 0.0 &&
                    !loud_r.parts.high_active,
                "high parts active before T0");

    // t > T0: both bands contribute; equals the module-composition oracle.
    const int64_t t = 300;
    const FreqLossResult r = freq_loss(rendered, truth, t, sched);
    REQUIRE_MSG(r.parts.high_active, "high band inactive after T0");
    const double dt = band_radius(t, sched);
    const Eigen::ArrayXXd low = make_lowpass(sched.d0, 8, 8).mask;
    const Eigen::ArrayXXd high = make_highpass(dt, sched.d0, 8, 8).mask;
    const auto brute_low = oracle::brute_discrepancy(oracle::brute_dft2(truth),
                                                     oracle::brute_dft2(rendered), &low);
    const auto brute_high = oracle::brute_discrepancy(oracle::brute_dft2(truth),
                                                      oracle::brute_dft2(rendered), &high);
    const double expected =
        sched.w_low * (brute_low.amp + brute_low.phase) +
        sched.w_high * (brute_high.amp + brute_high.phase);
    std::ostringstream info;
    info << "case split exact; |L_f - oracle| = " << std::abs(r.loss - expected);
    detail = info.str();
    REQUIRE_MSG(std::abs(r.parts.low_amp - brute_low.amp) < 1e-9 &&
                    std::abs(r.parts.low_phase - brute_low.phase) < 1e-9 &&
                    std::abs(r.parts.high_amp - brute_high.amp) < 1e-9 &&
                    std::abs(r.parts.high_phase - brute_high.phase) < 1e-9,
                "masked parts disagree with the brute-force oracle");
    return std::abs(r.loss - expected) < 1e-9;
}

// ---------------------------------------------------------------- 6
bool gradient_response_direction(std::string& detail) {
    const double t0 = now_seconds();
    // Deliberately under-split fields: few large splats, densification
    // disabled, trained briefly with and without the frequency term. The
    // diagnostic compares each arm's own loss gradient inside the
    // high-variance mask at the matched iteration.
    const int64_t train_iters = 120;
    const int64_t probe_iter = 100;
    int wins = 0;
    std::ostringstream ratios;
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        const Fixture fix = make_fixture("textured-patch", 256, seed);

        TrainConfig base;
        base.total_iters = train_iters;
        base.warmup_iters = 0;
        base.densify_end = probe_iter + 10;
        base.densify_interval = 1 << 20;  // keep the field under-split
        base.init_count = 60;
        base.lambda_dssim = 0.0;
        base.freq_mode = RegularizerMode::Off;
        base.seed = seed;
        base.threads = 2;
        base.metrics_interval = train_iters;

        TrainConfig freq = base;
        freq.freq_mode = RegularizerMode::Annealed;

        const TrainResult run_base = train(fix.target, base);
        const TrainResult run_freq = train(fix.target, freq);

        const std::vector<Mask> masks = {fix.high_variance};
        const double g_base = region_gradient_diagnostic(run_base.field, fix.target,
                                                         masks, probe_iter, base)[0];
        const double g_freq = region_gradient_diagnostic(run_freq.field, fix.target,
                                                         masks, probe_iter, freq)[0];
        const double ratio = g_freq / g_base;
        ratios << (seed > 1 ? ", " : "") << ratio;
        if (ratio > 1.0) ++wins;
    }
    const double elapsed = now_seconds() - t0;
    std::ostringstream info;
    info << "ratios [" << ratios.str() << "], " << wins << "/5 above 1.0, " << elapsed
         << " s";
    detail = info.str();
    return wins >= 4 && elapsed < 600.0;
}

// ---------------------------------------------------------------- 7
bool ablation_direction(std::string& detail) {
    const double t0 = now_seconds();
    std::ostringstream info;
    bool ok = true;
    for (const std::string& name : fixture_names()) {
        const fs::path config_path =
            fs::path(FSPLAT_SOURCE_DIR) / "configs" / ("ablate-" + name + ".txt");
        const io::RunConfig config = io::load_config(config_path.string());
        const Fixture fix = make_fixture(
            config.fixture, config.fixture_size,
            config.fixture_seed != 0 ? config.fixture_seed : config.train.seed,
            config.fixture_channels);

        AblationOptions options;
        options.seeds = {1, 2, 3, 4, 5};
        options.match_attempts = config.match_attempts;
        options.match_tolerance = config.match_tolerance;
        options.workers = 2;
        TrainConfig train_cfg = config.train;
        train_cfg.threads = 2;
        const AblationResult result = run_ablation(fix.target, train_cfg, options);

        const double base = result.rows[0].psnr;
        const double fr = result.rows[1].psnr;
        const double fa = result.rows[2].psnr;
        bool matched = true;
        for (const AblationRun& run : result.runs) matched &= run.count_matched;
        const bool fixture_ok =
            fa >= fr && fr >= base && (fa - base) >= 0.3 && matched;
        info << name << ": base " << base << " dB, fr " << fr << " dB, fa " << fa
             << " dB, margin " << (fa - base) << (matched ? "" : " [count mismatch]")
             << (fixture_ok ? "; " : " FAILED; ");
        ok &= fixture_ok;
    }
    const double elapsed = now_seconds() - t0;
    info << elapsed << " s";
    detail = info.str();
    return ok && elapsed < 2700.0;
}

// ---------------------------------------------------------------- 8
bool analytic_loss_examples(std::string& detail) {
    {  // d_a of constant images = sqrt(HW) * |dc|; zero for identical.
        const Image a(4, 4, 1, 1.0);
        const Image b(4, 4, 1, 0.0);
        const double d = amp_discrepancy(dft2(a), dft2(b));
        REQUIRE_MSG(std::abs(d - 4.0) < 1e-9, "d_a of 4x4 constant pair != 4");
        const Image c(8, 6, 3, 0.75);
        const Image e(8, 6, 3, 0.25);
        const double d2 = amp_discrepancy(dft2(c), dft2(e));
        REQUIRE_MSG(std::abs(d2 - std::sqrt(48.0) * 0.5) < 1e-9,
                    "d_a of 8x6 constant pair != sqrt(HW)*|dc|");
        const Image f = oracle::random_image(8, 8, 3, 5);
        REQUIRE_MSG(amp_discrepancy(dft2(f), dft2(f)) == 0.0, "d_a(identical) != 0");
        REQUIRE_MSG(phase_discrepancy(dft2(f), dft2(f)) == 0.0, "d_p(identical) != 0");
    }
    {  // Alpha-blend closed forms.
        SplatField field;
        field.canvas = {9, 9, 1};
        GaussianSplat s;
        s.pos = {4.5, 4.5};
        s.opacity_logit = 0.0;
        s.color = {0.8, 0.0, 0.0};
        field.splats.push_back(s);
        const RenderOutput one = render(field, 9, 9);
        REQUIRE_MSG(std::abs(one.image(4, 4, 0) - 0.4) < 1e-12,
                    "single-splat closed form != 0.4");

        field.splats[0].color = {1.0, 1.0, 1.0};
        GaussianSplat second = field.splats[0];
        second.depth = 1.0;
        field.splats.push_back(second);
        const RenderOutput two = render(field, 9, 9);
        REQUIRE_MSG(std::abs(two.image(4, 4, 0) - 0.75) < 1e-12,
                    "two-splat closed form != 0.75");
    }
    detail = "constant-image d_a, identical-image zeros, 0.4/0.75 blends";
    return true;
}

// ---------------------------------------------------------------- 9
bool cli_determinism(std::string& detail) {
    const fs::path work = fs::temp_directory_path() / "fsplat_acceptance_9";
    fs::remove_all(work);
    fs::create_directories(work);

    const std::string config_text =
        "fixture = checker-grass\n"
        "fixture_size = 64\n"
        "out_dir = " + (work / "runs").string() + "\n"
        "total_iters = 40\n"
        "warmup_iters = 8\n"
        "warmup_scale = 4\n"
        "densify_end = 20\n"
        "densify_interval = 10\n"
        "init_count = 48\n"
        "seed = 12\n"
        "freq_mode = annealed\n"
        "tau_pos = 0.002\n";
    const fs::path config_path = work / "run.txt";
    std::ofstream(config_path) << config_text;

    auto run_cli = [&](const std::string& args, const fs::path& log) {
        const std::string cmd = std::string(FSPLAT_CLI_PATH) + " " + args + " > " +
                                log.string() + " 2>&1";
        return std::system(cmd.c_str());
    };
    auto run_dir_from = [&](const fs::path& log) {
        std::ifstream in(log);
        std::string line;
        while (std::getline(in, line))
            if (line.rfind("run dir:", 0) == 0)
                return fs::path(line.substr(line.find('/')));
        return fs::path();
    };
    auto file_bytes = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
    };

    REQUIRE_MSG(run_cli("--threads 1 fit --config " + config_path.string(),
                        work / "log1.txt") == 0,
                "first fit failed");
    REQUIRE_MSG(run_cli("--threads 3 fit --config " + config_path.string(),
                        work / "log2.txt") == 0,
                "second fit failed");
    const fs::path dir1 = run_dir_from(work / "log1.txt");
    const fs::path dir2 = run_dir_from(work / "log2.txt");
    REQUIRE_MSG(!dir1.empty() && !dir2.empty() && dir1 != dir2,
                "run directories missing or collided");

    const std::string csv1 = file_bytes(dir1 / "metrics.csv");
    const std::string csv2 = file_bytes(dir2 / "metrics.csv");
    REQUIRE_MSG(!csv1.empty() && csv1 == csv2,
                "metrics.csv differs across thread counts");
    const std::string ckpt1 = file_bytes(dir1 / "final.ckpt");
    const std::string ckpt2 = file_bytes(dir2 / "final.ckpt");
    REQUIRE_MSG(!ckpt1.empty() && ckpt1 == ckpt2,
                "final.ckpt differs across thread counts");

    REQUIRE_MSG(run_cli("render --checkpoint " + (dir1 / "final.ckpt").string() +
                            " --out " + (work / "re.png").string(),
                        work / "log3.txt") == 0,
                "render from checkpoint failed");
    REQUIRE_MSG(file_bytes(work / "re.png") == file_bytes(dir1 / "render.png"),
                "render from checkpoint does not reproduce the snapshot bitwise");

    detail = "fit x2 (threads 1 vs 3) bit-identical CSV+checkpoint; render reproduces";
    return true;
}

// ---------------------------------------------------------------- 10
bool densify_mechanics(std::string& detail) {
    {  // Split: children at parent/1.6, count +1.
        SplatField field;
        field.canvas = {256, 256, 3};
        GaussianSplat s;
        s.pos = {128.0, 128.0};
        s.log_scale = {std::log(8.0), std::log(8.0)};
        s.color = {0.5, 0.5, 0.5};
        field.splats.push_back(s);
        DensifyStats stats;
        stats.resize(1);
        Eigen::Matrix2Xd g(2, 1);
        g.col(0) = Eigen::Vector2d(1.0, 0.0);
        accumulate(stats, g, {1});
        DensifyParams params;
        const DensifyReport report = densify_step(field, stats, params, 3);
        REQUIRE_MSG(report.splits == 1 && field.splats.size() == 2, "split count wrong");
        for (const GaussianSplat& child : field.splats)
            REQUIRE_MSG(std::abs(std::exp(child.log_scale[0]) - 5.0) < 1e-12,
                        "split child scale != parent/1.6");
    }
    {  // Clone: count +1, copy keeps color/opacity.
        SplatField field;
        field.canvas = {256, 256, 3};
        GaussianSplat s;
        s.pos = {50.0, 60.0};
        s.log_scale = {std::log(1.5), std::log(1.5)};
        s.color = {0.3, 0.6, 0.9};
        field.splats.push_back(s);
        DensifyStats stats;
        stats.resize(1);
        Eigen::Matrix2Xd g(2, 1);
        g.col(0) = Eigen::Vector2d(0.0, 1.0);
        accumulate(stats, g, {1});
        DensifyParams params;
        const DensifyReport report = densify_step(field, stats, params, 3);
        REQUIRE_MSG(report.clones == 1 && field.splats.size() == 2, "clone count wrong");
        REQUIRE_MSG(field.splats[1].color == field.splats[0].color &&
                        field.splats[1].opacity_logit == field.splats[0].opacity_logit,
                    "clone copy does not share color/opacity");
    }
    {  // Prune removes only sub-epsilon splats.
        SplatField field;
        field.canvas = {64, 64, 3};
        for (const double opacity : {0.9, 0.004, 0.3, 0.001}) {
            GaussianSplat s;
            s.opacity_logit = logit(opacity);
            field.splats.push_back(s);
        }
        const int removed = prune(field, 0.005);
        REQUIRE_MSG(removed == 2 && field.splats.size() == 2, "prune removed wrong set");
        for (const GaussianSplat& s : field.splats)
            REQUIRE_MSG(logistic(s.opacity_logit) >= 0.005, "sub-epsilon splat survived");
    }
    {  // Full fit: count frozen after densify_end.
        const Fixture fix = make_fixture("checker-grass", 64, 9);
        TrainConfig cfg;
        cfg.total_iters = 60;
        cfg.warmup_iters = 8;
        cfg.densify_end = 30;
        cfg.densify_interval = 5;
        cfg.init_count = 40;
        cfg.densify.tau_pos = 0.002;
        cfg.seed = 9;
        cfg.threads = 2;
        const TrainResult result = train(fix.target, cfg);
        int64_t frozen = -1;
        bool grew = false;
        for (const IterationRecord& rec : result.records) {
            if (rec.iteration == cfg.densify_end) frozen = rec.splats;
            if (rec.iteration > cfg.densify_end && rec.splats != frozen) grew = true;
        }
        REQUIRE_MSG(frozen > 0 && !grew, "splat count changed after densify_end");
    }
    detail = "split/clone/prune closed forms; count frozen after densify_end in a full fit";
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "spectral oracle equivalence", spectral_oracle_equivalence},
        {2, "spectrum invariants", spectrum_invariants},
        {3, "gradient suite", gradient_suite},
        {4, "annealing properties", annealing_properties},
        {5, "Eq-14 case split", case_split},
        {6, "gradient response direction", gradient_response_direction},
        {7, "ablation direction", ablation_direction},
        {8, "analytic loss examples", analytic_loss_examples},
        {9, "determinism", cli_determinism},
        {10, "densification mechanics", densify_mechanics},
    };

    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);

    bool all_ok = true;
    for (const Criterion& criterion : criteria) {
        if (only != 0 && criterion.number != only) continue;
        std::string detail;
        bool ok = false;
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", criterion.number,
                    criterion.name, detail.c_str());
        std::fflush(stdout);
        all_ok &= ok;
    }
    return all_ok ? 0 : 1;
}
