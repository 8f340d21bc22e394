// Command-line front end: fit splat fields to images, re-render checkpoints,
// export spectra, and run the three-arm ablation.

#include <CLI11.hpp>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "fsplat/ablation.hpp"
#include "fsplat/fixtures.hpp"
#include "fsplat/io/checkpoint.hpp"
#include "fsplat/io/config.hpp"
#include "fsplat/io/image_io.hpp"
#include "fsplat/metrics.hpp"
#include "fsplat/parallel.hpp"
#include "fsplat/rasterizer.hpp"
#include "fsplat/trainer.hpp"

namespace fs = std::filesystem;
using namespace fsplat;

namespace {

struct TargetData {
    Image image;
    std::vector<Mask> masks;  // nonempty only for fixtures
};

TargetData resolve_target(const io::RunConfig& config) {
    TargetData out;
    if (!config.input.empty()) {
        out.image = io::load_image(config.input);
        return out;
    }
    const uint64_t seed =
        config.fixture_seed != 0 ? config.fixture_seed : config.train.seed;
    Fixture fix =
        make_fixture(config.fixture, config.fixture_size, seed, config.fixture_channels);
    out.image = std::move(fix.target);
    out.masks = {fix.high_variance, fix.smooth};
    return out;
}

/// Creates out_dir/run-<hash>; existing directories get a numeric suffix so a
/// rerun never overwrites earlier results.
fs::path make_run_dir(const io::RunConfig& config) {
    const fs::path base = fs::path(config.out_dir) / ("run-" + io::config_hash(config));
    fs::path dir = base;
    for (int k = 1; fs::exists(dir); ++k)
        dir = base.string() + "-" + std::to_string(k);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << text;
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::string csv_header(size_t region_count) {
    std::string h =
        "iteration,l1,dssim,lf_low_amp,lf_low_phase,lf_high_amp,lf_high_phase,psnr,ssim,"
        "splats,clones,splits,prunes";
    for (size_t i = 0; i < region_count; ++i) h += ",region_" + std::to_string(i);
    return h + "\n";
}

std::string csv_row(const IterationRecord& rec) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%" PRId64 ",%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%" PRId64
                  ",%d,%d,%d",
                  rec.iteration, rec.l1, rec.dssim, rec.freq.low_amp, rec.freq.low_phase,
                  rec.freq.high_amp, rec.freq.high_phase, rec.psnr, rec.ssim, rec.splats,
                  rec.clones, rec.splits, rec.prunes);
    std::string row = buf;
    for (const double g : rec.region_grad) {
        std::snprintf(buf, sizeof(buf), ",%.17g", g);
        row += buf;
    }
    return row + "\n";
}

std::vector<uint64_t> parse_seed_list(const std::string& text) {
    std::vector<uint64_t> seeds;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (item.empty()) continue;
        seeds.push_back(std::stoull(item));
    }
    if (seeds.empty()) throw std::runtime_error("empty seed list");
    return seeds;
}

int cmd_fit(const std::string& config_path, std::optional<uint64_t> seed_override,
            int threads) {
    io::RunConfig config = io::load_config(config_path);
    if (seed_override) config.train.seed = *seed_override;
    config.validate();
    config.train.threads = clamp_threads(threads);

    const TargetData target = resolve_target(config);
    config.train.resolved().validate(target.image.height(), target.image.width());

    const fs::path run_dir = make_run_dir(config);
    const std::string canonical = io::serialize_config(config);
    write_text(run_dir / "config.txt", canonical);
    if (!config.fixture.empty())
        io::save_image(target.image, (run_dir / "target.png").string());

    std::ostringstream csv;
    const size_t region_count =
        config.region_diagnostics && !target.masks.empty() ? target.masks.size() : 0;
    csv << csv_header(region_count);

    const std::vector<Mask>* masks =
        region_count > 0 ? &target.masks : nullptr;

    const IterationHook hook = [&](const IterationRecord& rec, const SplatField& field,
                                   const Image&) {
        csv << csv_row(rec);
        const bool snap = config.snapshot_interval > 0 &&
                          rec.iteration % config.snapshot_interval == 0 &&
                          rec.iteration < config.train.total_iters;
        if (!snap) return;
        char name[64];
        std::snprintf(name, sizeof(name), "snap_%06" PRId64, rec.iteration);
        const RenderOutput view =
            render(field, field.canvas.height, field.canvas.width, config.train.threads);
        io::save_image(view.image, (run_dir / (std::string(name) + ".png")).string());
        io::save_checkpoint((run_dir / (std::string(name) + ".ckpt")).string(),
                            {field, canonical, static_cast<uint64_t>(rec.iteration)});
    };

    const TrainResult result = train(target.image, config.train, masks, hook);
    write_text(run_dir / "metrics.csv", csv.str());

    io::save_checkpoint((run_dir / "final.ckpt").string(),
                        {result.field, canonical,
                         static_cast<uint64_t>(config.train.total_iters)});
    const RenderOutput final_render = render(result.field, target.image.height(),
                                             target.image.width(), config.train.threads);
    io::save_image(final_render.image, (run_dir / "render.png").string());

    if (config.export_spectra) {
        io::export_spectrum(final_render.image, (run_dir / "spectrum_rendered.png").string());
        io::export_spectrum(target.image, (run_dir / "spectrum_target.png").string());
        io::export_spectrum_diff(final_render.image, target.image,
                                 (run_dir / "spectrum_diff.png").string());
    }

    const MetricReport report = evaluate_metrics(final_render.image, target.image);
    std::printf("run dir:  %s\n", run_dir.string().c_str());
    std::printf("splats:   %zu\n", result.field.splats.size());
    std::printf("psnr:     %.4f dB\nssim:     %.6f\nl1:       %.8f\n", report.psnr,
                report.ssim, report.l1);
    return 0;
}

int cmd_render(const std::string& checkpoint_path, const std::string& out_path,
               int threads) {
    const io::Checkpoint checkpoint = io::load_checkpoint(checkpoint_path);
    const RenderOutput out =
        render(checkpoint.field, checkpoint.field.canvas.height,
               checkpoint.field.canvas.width, clamp_threads(threads));
    io::save_image(out.image, out_path);
    std::printf("rendered %ldx%ld from %s (iteration %" PRIu64 ")\n",
                static_cast<long>(checkpoint.field.canvas.width),
                static_cast<long>(checkpoint.field.canvas.height),
                checkpoint_path.c_str(), checkpoint.iteration);
    return 0;
}

int cmd_spectra(const std::string& image_path, const std::string& out_path,
                const std::string& diff_path) {
    const Image image = io::load_image(image_path);
    if (diff_path.empty()) {
        io::export_spectrum(image, out_path);
    } else {
        const Image other = io::load_image(diff_path);
        io::export_spectrum_diff(image, other, out_path);
    }
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

int cmd_ablate(const std::string& config_path, const std::string& seeds_override,
               int threads) {
    io::RunConfig config = io::load_config(config_path);
    config.validate();
    config.train.threads = clamp_threads(threads);

    AblationOptions options;
    options.seeds = parse_seed_list(
        seeds_override.empty() ? config.ablate_seeds : seeds_override);
    options.match_attempts = config.match_attempts;
    options.match_tolerance = config.match_tolerance;
    options.workers = config.train.threads;

    const TargetData target = resolve_target(config);
    const fs::path run_dir = make_run_dir(config);
    write_text(run_dir / "config.txt", io::serialize_config(config));

    const AblationResult result = run_ablation(target.image, config.train, options);
    write_text(run_dir / "ablation.csv", ablation_csv(result));

    std::ostringstream detail;
    detail << "arm,seed,psnr,ssim,l1,splats,tau_multiplier,count_matched\n";
    for (const AblationRun& run : result.runs) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%s,%" PRIu64 ",%.17g,%.17g,%.17g,%" PRId64 ",%.17g,%d\n",
                      run.arm.c_str(), run.seed, run.psnr, run.ssim, run.l1, run.splats,
                      run.tau_multiplier, run.count_matched ? 1 : 0);
        detail << buf;
    }
    write_text(run_dir / "ablation_runs.csv", detail.str());

    std::printf("run dir: %s\n%-12s %10s %10s %12s %10s\n", run_dir.string().c_str(), "arm",
                "psnr", "ssim", "l1", "splats");
    for (const AblationRow& row : result.rows)
        std::printf("%-12s %10.4f %10.6f %12.8f %10.0f\n", row.arm.c_str(), row.psnr,
                    row.ssim, row.l1, row.splats);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"2D Gaussian-splat image fitting with progressive frequency regularization"};
    app.require_subcommand(1);

    int threads = 2;
    std::optional<uint64_t> seed;
    app.add_option("--threads", threads, "worker threads (never changes results)");
    app.add_option("--seed", seed, "override the config seed");

    std::string fit_config;
    auto* fit = app.add_subcommand("fit", "train a splat field from a config file");
    fit->add_option("--config", fit_config, "run config path")->required();

    std::string render_checkpoint, render_out;
    auto* rend = app.add_subcommand("render", "render a checkpoint to an image");
    rend->add_option("--checkpoint", render_checkpoint, "checkpoint path")->required();
    rend->add_option("--out", render_out, "output image (.png/.ppm)")->required();

    std::string spectra_image, spectra_out, spectra_diff;
    auto* spec = app.add_subcommand("spectra", "export a centered log-amplitude spectrum");
    spec->add_option("--image", spectra_image, "input image")->required();
    spec->add_option("--out", spectra_out, "output heatmap (.png/.ppm)")->required();
    spec->add_option("--diff", spectra_diff, "second image: export |amplitude difference|");

    std::string ablate_config, ablate_seeds;
    auto* abl = app.add_subcommand("ablate", "run base / base+fr / base+fr+fa comparison");
    abl->add_option("--config", ablate_config, "run config path")->required();
    abl->add_option("--seeds", ablate_seeds, "comma-separated seed list override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (fit->parsed()) return cmd_fit(fit_config, seed, threads);
        if (rend->parsed()) return cmd_render(render_checkpoint, render_out, threads);
        if (spec->parsed()) return cmd_spectra(spectra_image, spectra_out, spectra_diff);
        if (abl->parsed()) return cmd_ablate(ablate_config, ablate_seeds, threads);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
