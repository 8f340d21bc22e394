#include "fsplat/trainer.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "fsplat/metrics.hpp"
#include "fsplat/random.hpp"
#include "fsplat/rasterizer.hpp"

namespace fsplat {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-15;
constexpr int kParamSlots = 10;  // px py s1 s2 rot logit c0 c1 c2 depth

struct AdamState {
    Eigen::ArrayXXd m;  // kParamSlots x N
    Eigen::ArrayXXd v;

    void resize(Eigen::Index n) {
        m = Eigen::ArrayXXd::Zero(kParamSlots, n);
        v = Eigen::ArrayXXd::Zero(kParamSlots, n);
    }
    void append_zeros(Eigen::Index extra) {
        const Eigen::Index n = m.cols();
        m.conservativeResize(kParamSlots, n + extra);
        v.conservativeResize(kParamSlots, n + extra);
        m.rightCols(extra).setZero();
        v.rightCols(extra).setZero();
    }
    void reset_slot(Eigen::Index i) {
        m.col(i).setZero();
        v.col(i).setZero();
    }
    void filter(const std::vector<int>& kept) {
        Eigen::ArrayXXd nm(kParamSlots, static_cast<Eigen::Index>(kept.size()));
        Eigen::ArrayXXd nv(kParamSlots, static_cast<Eigen::Index>(kept.size()));
        for (size_t j = 0; j < kept.size(); ++j) {
            nm.col(static_cast<Eigen::Index>(j)) = m.col(kept[j]);
            nv.col(static_cast<Eigen::Index>(j)) = v.col(kept[j]);
        }
        m = std::move(nm);
        v = std::move(nv);
    }
};

void filter_stats(DensifyStats& stats, const std::vector<int>& kept) {
    Eigen::VectorXd norm(static_cast<Eigen::Index>(kept.size()));
    Eigen::Matrix2Xd vec(2, static_cast<Eigen::Index>(kept.size()));
    Eigen::VectorXi obs(static_cast<Eigen::Index>(kept.size()));
    for (size_t j = 0; j < kept.size(); ++j) {
        norm(static_cast<Eigen::Index>(j)) = stats.grad_norm_accum(kept[j]);
        vec.col(static_cast<Eigen::Index>(j)) = stats.grad_vec_accum.col(kept[j]);
        obs(static_cast<Eigen::Index>(j)) = stats.obs_count(kept[j]);
    }
    stats.grad_norm_accum = std::move(norm);
    stats.grad_vec_accum = std::move(vec);
    stats.obs_count = std::move(obs);
}

Eigen::ArrayXXd pack_grads(const SplatGrads& grads, int channels) {
    const Eigen::Index n = grads.d_rotation.size();
    Eigen::ArrayXXd g = Eigen::ArrayXXd::Zero(kParamSlots, n);
    g.row(0) = grads.d_pos.row(0).array();
    g.row(1) = grads.d_pos.row(1).array();
    g.row(2) = grads.d_log_scale.row(0).array();
    g.row(3) = grads.d_log_scale.row(1).array();
    g.row(4) = grads.d_rotation.transpose().array();
    g.row(5) = grads.d_opacity_logit.transpose().array();
    for (int c = 0; c < channels; ++c) g.row(6 + c) = grads.d_color.row(c).array();
    // row 9 (depth) stays zero: the composite is piecewise constant in the
    // sort key, so its gradient vanishes almost everywhere.
    return g;
}

void adam_step(SplatField& field, AdamState& state, const Eigen::ArrayXXd& grads,
               int64_t step, const TrainConfig& cfg, double canvas_diagonal) {
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));

    const double pos_decay =
        std::pow(cfg.lr.pos_decay_target,
                 static_cast<double>(step) / static_cast<double>(cfg.total_iters));
    const double lr_pos = cfg.lr.pos * canvas_diagonal * pos_decay;
    const double lrs[kParamSlots] = {lr_pos,        lr_pos,        cfg.lr.log_scale,
                                     cfg.lr.log_scale, cfg.lr.rotation, cfg.lr.opacity,
                                     cfg.lr.color,  cfg.lr.color,  cfg.lr.color,
                                     cfg.lr.depth};

    state.m = kAdamBeta1 * state.m + (1.0 - kAdamBeta1) * grads;
    state.v = kAdamBeta2 * state.v + (1.0 - kAdamBeta2) * grads.square();

    const Eigen::Index n = grads.cols();
    for (Eigen::Index i = 0; i < n; ++i) {
        GaussianSplat& splat = field.splats[static_cast<size_t>(i)];
        double step_val[kParamSlots];
        for (int p = 0; p < kParamSlots; ++p) {
            const double mhat = state.m(p, i) / bc1;
            const double vhat = state.v(p, i) / bc2;
            step_val[p] = lrs[p] * mhat / (std::sqrt(vhat) + kAdamEps);
        }
        splat.pos.x() -= step_val[0];
        splat.pos.y() -= step_val[1];
        splat.log_scale[0] -= step_val[2];
        splat.log_scale[1] -= step_val[3];
        splat.rotation -= step_val[4];
        splat.opacity_logit -= step_val[5];
        splat.color[0] -= step_val[6];
        splat.color[1] -= step_val[7];
        splat.color[2] -= step_val[8];
        splat.depth -= step_val[9];
    }
}

std::vector<double> mask_means(const Image& grad, const std::vector<Mask>& masks) {
    std::vector<double> out;
    out.reserve(masks.size());
    const double inv_c = 1.0 / grad.channels();
    for (const Mask& mask : masks) {
        if (mask.rows() != grad.height() || mask.cols() != grad.width())
            throw std::invalid_argument("region diagnostic: mask dims mismatch");
        double sum = 0.0;
        int64_t count = 0;
        for (Eigen::Index j = 0; j < mask.cols(); ++j) {
            for (Eigen::Index i = 0; i < mask.rows(); ++i) {
                if (!mask(i, j)) continue;
                ++count;
                double mag = 0.0;
                for (int c = 0; c < grad.channels(); ++c)
                    mag += std::abs(grad(i, j, c));
                sum += mag * inv_c;
            }
        }
        if (count == 0)
            throw std::invalid_argument("region diagnostic: empty mask");
        out.push_back(sum / static_cast<double>(count));
    }
    return out;
}

}  // namespace

TrainConfig TrainConfig::resolved() const {
    TrainConfig out = *this;
    if (out.densify_end <= 0) out.densify_end = out.total_iters / 2;
    if (out.freq_t0 <= 0) out.freq_t0 = std::max<int64_t>(1, out.densify_end / 5);
    if (out.freq_t_end <= 0) out.freq_t_end = out.densify_end;
    if (out.densify_start <= 0) out.densify_start = out.warmup_iters;
    if (out.tau_multiplier <= 0.0)
        out.tau_multiplier = out.freq_mode == RegularizerMode::Off ? 1.0 : 1.25;
    out.densify.tau_multiplier = out.tau_multiplier;
    return out;
}

void TrainConfig::validate(Eigen::Index target_h, Eigen::Index target_w) const {
    if (total_iters < 0) throw std::invalid_argument("train config: total_iters < 0");
    if (total_iters == 0) return;  // degenerate run returns the initial field
    if (init_count < 1) throw std::invalid_argument("train config: init_count < 1");
    if (warmup_iters < 0) throw std::invalid_argument("train config: warmup_iters < 0");
    if (!(warmup_iters < densify_end && densify_end < total_iters))
        throw std::invalid_argument(
            "train config: need warmup_iters < densify_end < total_iters");
    if (warmup_iters > 0 && warmup_scale < 2)
        throw std::invalid_argument("train config: warmup_scale must be >= 2");
    if (freq_mode == RegularizerMode::Annealed) {
        if (!(freq_t0 > 0 && freq_t0 < freq_t_end))
            throw std::invalid_argument("train config: need 0 < T0 < T");
        if (freq_t_end > densify_end)
            throw std::invalid_argument("train config: schedule T must be <= densify_end");
        if (!(freq_d0_ratio > 0.0 && freq_d0_ratio < 1.0))
            throw std::invalid_argument("train config: freq_d0_ratio must be in (0,1)");
    }
    if (lambda_dssim < 0.0 || lambda_dssim > 1.0)
        throw std::invalid_argument("train config: lambda_dssim must be in [0,1]");
    const Eigen::Index min_dim = std::min(target_h, target_w);
    if (min_dim < 2) throw std::invalid_argument("train config: target too small");
    if (lambda_dssim > 0.0) {
        Eigen::Index wh = target_h, ww = target_w;
        if (warmup_iters > 0) {
            wh = (target_h + warmup_scale - 1) / warmup_scale;
            ww = (target_w + warmup_scale - 1) / warmup_scale;
        }
        if (std::min(wh, ww) < 11)
            throw std::invalid_argument(
                "train config: D-SSIM needs at least 11x11 at every training resolution");
    }
}

AnnealSchedule TrainConfig::schedule_for(Eigen::Index h, Eigen::Index w) const {
    AnnealSchedule s;
    s.t0 = freq_t0;
    s.t_end = freq_t_end;
    s.d = max_spectral_radius(h, w);
    s.d0 = freq_d0_ratio * s.d;
    s.w_low = freq_w_low;
    s.w_high = freq_w_high;
    return s;
}

TotalLoss total_loss(const Image& rendered, const Image& truth, int64_t t,
                     const TrainConfig& config) {
    require_same_shape(rendered, truth, "total_loss");
    const TrainConfig cfg = config.resolved();
    const double lambda = cfg.lambda_dssim;

    TotalLoss out;
    out.pixel_grad = Image(rendered.height(), rendered.width(), rendered.channels(), 0.0);

    const ValueWithGrad l = l1(rendered, truth);
    out.l1 = l.value;
    out.value = (1.0 - lambda) * l.value;
    for (int c = 0; c < rendered.channels(); ++c)
        out.pixel_grad.planes[static_cast<size_t>(c)] =
            (1.0 - lambda) * l.grad.planes[static_cast<size_t>(c)];

    if (lambda > 0.0) {
        const ValueWithGrad ds = d_ssim(rendered, truth);
        out.dssim = ds.value;
        out.value += lambda * ds.value;
        for (int c = 0; c < rendered.channels(); ++c)
            out.pixel_grad.planes[static_cast<size_t>(c)] +=
                lambda * ds.grad.planes[static_cast<size_t>(c)];
    }

    if (cfg.freq_mode != RegularizerMode::Off && t > 0 && t <= cfg.densify_end) {
        const FreqLossContext ctx(truth, cfg.schedule_for(truth.height(), truth.width()),
                                  cfg.freq_mode == RegularizerMode::Naive
                                      ? FreqMode::FullBand
                                      : FreqMode::Annealed,
                                  cfg.threads);
        const FreqLossGrad f = ctx.evaluate(rendered, t, true, cfg.threads);
        out.freq = f.parts;
        out.value += f.loss;
        for (int c = 0; c < rendered.channels(); ++c)
            out.pixel_grad.planes[static_cast<size_t>(c)] +=
                f.pixel_grad.planes[static_cast<size_t>(c)];
    }
    return out;
}

TrainResult train(const Image& target, const TrainConfig& config,
                  const std::vector<Mask>* region_masks, const IterationHook& hook) {
    const TrainConfig cfg = config.resolved();
    cfg.validate(target.height(), target.width());

    TrainResult result;
    if (cfg.total_iters == 0) {
        result.field = init_field(target, cfg.init_count, cfg.seed);
        return result;
    }

    const bool warmup = cfg.warmup_iters > 0;
    const Image small = warmup ? downsample(target, cfg.warmup_scale) : Image();
    const Image* truth = warmup ? &small : &target;

    result.field = init_field(*truth, cfg.init_count, cfg.seed);
    SplatField& field = result.field;

    AdamState adam;
    adam.resize(static_cast<Eigen::Index>(field.splats.size()));
    DensifyStats stats;
    stats.resize(static_cast<Eigen::Index>(field.splats.size()));

    const bool freq_on = cfg.freq_mode != RegularizerMode::Off;
    const FreqMode fmode =
        cfg.freq_mode == RegularizerMode::Naive ? FreqMode::FullBand : FreqMode::Annealed;
    std::unique_ptr<FreqLossContext> freq_ctx;
    if (freq_on)
        freq_ctx = std::make_unique<FreqLossContext>(
            *truth, cfg.schedule_for(truth->height(), truth->width()), fmode, cfg.threads);
    std::unique_ptr<DssimReference> dssim_ref;
    if (cfg.lambda_dssim > 0.0) dssim_ref = std::make_unique<DssimReference>(*truth);

    const double lambda = cfg.lambda_dssim;
    result.records.reserve(static_cast<size_t>(cfg.total_iters / cfg.metrics_interval + 2));
    BlendState blend_state;  // reused across iterations to keep buffer capacity

    for (int64_t t = 1; t <= cfg.total_iters; ++t) {
        if (warmup && t == cfg.warmup_iters + 1) {
            // Upsample transition: splats are resolution covariant in pixel
            // units, so positions and scales multiply by the resolution ratio.
            const double sx = static_cast<double>(target.width()) / truth->width();
            const double sy = static_cast<double>(target.height()) / truth->height();
            const double scale_log = 0.5 * (std::log(sx) + std::log(sy));
            for (GaussianSplat& splat : field.splats) {
                splat.pos.x() *= sx;
                splat.pos.y() *= sy;
                splat.log_scale.array() += scale_log;
            }
            field.canvas = {target.height(), target.width(), target.channels()};
            truth = &target;
            if (freq_on)
                freq_ctx = std::make_unique<FreqLossContext>(
                    target, cfg.schedule_for(target.height(), target.width()), fmode,
                    cfg.threads);
            if (dssim_ref) dssim_ref = std::make_unique<DssimReference>(target);
            adam.resize(static_cast<Eigen::Index>(field.splats.size()));
        }

        const Eigen::Index h = truth->height();
        const Eigen::Index w = truth->width();
        RenderOutput rendered;
        rendered.image = render_with_state(field, h, w, cfg.threads, blend_state);

        const ValueWithGrad l = l1(rendered.image, *truth);
        double loss_value = (1.0 - lambda) * l.value;
        Image pixel_grad(h, w, truth->channels(), 0.0);
        for (int c = 0; c < truth->channels(); ++c)
            pixel_grad.planes[static_cast<size_t>(c)] =
                (1.0 - lambda) * l.grad.planes[static_cast<size_t>(c)];

        double dssim_value = 0.0;
        double ssim_value = -2.0;  // sentinel: computed lazily when lambda == 0
        if (lambda > 0.0) {
            const ValueWithGrad ds = dssim_ref->evaluate(rendered.image);
            dssim_value = ds.value;
            ssim_value = 1.0 - 2.0 * ds.value;
            loss_value += lambda * ds.value;
            for (int c = 0; c < truth->channels(); ++c)
                pixel_grad.planes[static_cast<size_t>(c)] +=
                    lambda * ds.grad.planes[static_cast<size_t>(c)];
        }

        FreqLossParts freq_parts;
        if (freq_on && t <= cfg.densify_end) {
            const FreqLossGrad f = freq_ctx->evaluate(rendered.image, t, true, cfg.threads);
            freq_parts = f.parts;
            loss_value += f.loss;
            for (int c = 0; c < truth->channels(); ++c)
                pixel_grad.planes[static_cast<size_t>(c)] +=
                    f.pixel_grad.planes[static_cast<size_t>(c)];
        }

        if (!std::isfinite(loss_value)) {
            if (hook) {
                IterationRecord bad;
                bad.iteration = t;
                bad.l1 = l.value;
                bad.splats = static_cast<int64_t>(field.splats.size());
                hook(bad, field, rendered.image);
            }
            throw std::runtime_error("train: non-finite loss at iteration " +
                                     std::to_string(t));
        }

        const SplatGrads grads = backward_from_state(blend_state, pixel_grad, cfg.threads);
        if (t <= cfg.densify_end) {
            // Densification statistics use viewport-normalized (NDC-style)
            // positional gradients, the units the tau threshold is calibrated
            // in; pixel-unit norms shrink with resolution and would leave the
            // threshold unreachable.
            Eigen::Matrix2Xd ndc_grads = grads.d_pos;
            ndc_grads.row(0) *= static_cast<double>(w) / 2.0;
            ndc_grads.row(1) *= static_cast<double>(h) / 2.0;
            accumulate(stats, ndc_grads, grads.touched);
        }

        adam_step(field, adam, pack_grads(grads, truth->channels()), t, cfg,
                  field.canvas.diagonal());

        DensifyReport densify_report;
        int pruned = 0;
        if (t > cfg.densify_start && t <= cfg.densify_end &&
            t % cfg.densify_interval == 0) {
            const Eigen::Index before = static_cast<Eigen::Index>(field.splats.size());
            densify_report =
                densify_step(field, stats, cfg.densify, fork_seed(cfg.seed, 0xd000 + t));
            for (const int slot : densify_report.split_slots) adam.reset_slot(slot);
            adam.append_zeros(static_cast<Eigen::Index>(field.splats.size()) - before);

            std::vector<int> kept;
            pruned = prune(field, cfg.densify.epsilon_opacity, &kept);
            if (pruned > 0) {
                adam.filter(kept);
                filter_stats(stats, kept);
            }
        }

        if (t % cfg.metrics_interval == 0 || t == cfg.total_iters) {
            IterationRecord rec;
            rec.iteration = t;
            rec.l1 = l.value;
            rec.dssim = dssim_value;
            rec.freq = freq_parts;
            rec.psnr = psnr(rendered.image, *truth);
            if (ssim_value > -2.0)
                rec.ssim = ssim_value;
            else if (std::min(h, w) >= 11)
                rec.ssim = ssim(rendered.image, *truth);
            else
                rec.ssim = 0.0;  // frame smaller than the SSIM window
            rec.splats = static_cast<int64_t>(field.splats.size());
            rec.clones = densify_report.clones;
            rec.splits = densify_report.splits;
            rec.prunes = pruned;
            if (region_masks && !region_masks->empty() && truth == &target)
                rec.region_grad = mask_means(pixel_grad, *region_masks);
            if (hook) hook(rec, field, rendered.image);
            result.records.push_back(std::move(rec));
        }
    }
    return result;
}

std::vector<double> region_gradient_diagnostic(const SplatField& field, const Image& target,
                                               const std::vector<Mask>& masks, int64_t t,
                                               const TrainConfig& config) {
    if (masks.empty())
        throw std::invalid_argument("region diagnostic: no masks supplied");
    const RenderOutput rendered =
        render(field, target.height(), target.width(), config.threads);
    const TotalLoss loss = total_loss(rendered.image, target, t, config);
    return mask_means(loss.pixel_grad, masks);
}

}  // namespace fsplat
