#include "fsplat/spectral.hpp"

#include <cmath>
#include <stdexcept>

#include "fsplat/fft.hpp"
#include "fsplat/parallel.hpp"

namespace fsplat {

namespace {

// Centered layout: centered(c) = raw((c - center + n) mod n), so DC lands on
// the integer center bin n/2.
void shift_to_centered(Spectrum::Plane& plane) {
    const Eigen::Index h = plane.rows(), w = plane.cols();
    const Eigen::Index ch = h / 2, cw = w / 2;
    Spectrum::Plane out(h, w);
    for (Eigen::Index j = 0; j < w; ++j) {
        const Eigen::Index src_j = (j - cw + w) % w;
        for (Eigen::Index i = 0; i < h; ++i) out(i, j) = plane((i - ch + h) % h, src_j);
    }
    plane.swap(out);
}

void shift_to_raw(Spectrum::Plane& plane) {
    const Eigen::Index h = plane.rows(), w = plane.cols();
    const Eigen::Index ch = h / 2, cw = w / 2;
    Spectrum::Plane out(h, w);
    for (Eigen::Index j = 0; j < w; ++j) {
        const Eigen::Index src_j = (j + cw) % w;
        for (Eigen::Index i = 0; i < h; ++i) out(i, j) = plane((i + ch) % h, src_j);
    }
    plane.swap(out);
}

// 2D transform along rows then columns; forward uses exp(-i...), the adjoint
// path uses the unnormalized inverse.
void transform2d(Spectrum::Plane& plane, bool inverse, int threads) {
    const Eigen::Index h = plane.rows(), w = plane.cols();
    parallel_for(0, h, threads, [&](int64_t i) {
        std::vector<std::complex<double>> row(static_cast<size_t>(w));
        for (Eigen::Index j = 0; j < w; ++j) row[static_cast<size_t>(j)] = plane(i, j);
        if (inverse)
            ifft_unnormalized(row);
        else
            fft(row);
        for (Eigen::Index j = 0; j < w; ++j) plane(i, j) = row[static_cast<size_t>(j)];
    });
    parallel_for(0, w, threads, [&](int64_t j) {
        std::vector<std::complex<double>> col(static_cast<size_t>(h));
        for (Eigen::Index i = 0; i < h; ++i) col[static_cast<size_t>(i)] = plane(i, j);
        if (inverse)
            ifft_unnormalized(col);
        else
            fft(col);
        for (Eigen::Index i = 0; i < h; ++i) plane(i, j) = col[static_cast<size_t>(i)];
    });
}

// Radii from the integer DC bin, computed as sqrt(di^2 + dj^2) over exact
// integer squares. max_spectral_radius uses the same expression, so the
// farthest bin compares equal to D bitwise and boundary bins never fall out
// of the disc.
Eigen::ArrayXXd radius_grid(Eigen::Index h, Eigen::Index w) {
    const Eigen::Index ch = h / 2, cw = w / 2;
    Eigen::ArrayXXd r(h, w);
    for (Eigen::Index j = 0; j < w; ++j) {
        const double dj = static_cast<double>(j - cw);
        for (Eigen::Index i = 0; i < h; ++i) {
            const double di = static_cast<double>(i - ch);
            r(i, j) = std::sqrt(di * di + dj * dj);
        }
    }
    return r;
}

// |.| kinks and the phase-wrap boundary use subgradient 0; the tie zone has
// the same width as the amplitude floor.
constexpr double kKinkTieTol = 1e-12;

double tie_sign(double x) {
    if (x > kKinkTieTol) return 1.0;
    if (x < -kKinkTieTol) return -1.0;
    return 0.0;
}

}  // namespace

Spectrum dft2(const Image& image, int threads) {
    if (image.height() < 2 || image.width() < 2)
        throw std::invalid_argument("dft2: image dims must be >= 2");
    Spectrum out;
    out.planes.reserve(static_cast<size_t>(image.channels()));
    for (int c = 0; c < image.channels(); ++c) {
        Spectrum::Plane plane = image.planes[static_cast<size_t>(c)]
                                    .template cast<std::complex<double>>();
        transform2d(plane, false, threads);
        shift_to_centered(plane);
        out.planes.push_back(std::move(plane));
    }
    return out;
}

Eigen::ArrayXXd amplitude(const Spectrum::Plane& plane) { return plane.abs(); }

Eigen::ArrayXXd phase(const Spectrum::Plane& plane) {
    Eigen::ArrayXXd out(plane.rows(), plane.cols());
    for (Eigen::Index j = 0; j < plane.cols(); ++j) {
        for (Eigen::Index i = 0; i < plane.rows(); ++i) {
            const std::complex<double> z = plane(i, j);
            if (z.real() == 0.0 && z.imag() == 0.0) {
                out(i, j) = 0.0;
                continue;
            }
            double a = std::atan2(z.imag(), z.real());
            if (a <= -M_PI) a = M_PI;
            out(i, j) = a;
        }
    }
    return out;
}

double wrap_angle(double delta) {
    double w = std::remainder(delta, 2.0 * M_PI);
    if (w <= -M_PI) w = M_PI;
    return w;
}

namespace {

void require_same_spec_shape(const Spectrum& a, const Spectrum& b, const char* what) {
    if (a.height() != b.height() || a.width() != b.width() || a.channels() != b.channels())
        throw std::invalid_argument(std::string(what) + ": spectrum shapes differ");
}

}  // namespace

double amp_discrepancy(const Spectrum& truth, const Spectrum& rendered) {
    require_same_spec_shape(truth, rendered, "amp_discrepancy");
    const double norm = std::sqrt(static_cast<double>(truth.height() * truth.width()));
    double total = 0.0;
    for (int c = 0; c < truth.channels(); ++c) {
        const auto& f = truth.planes[static_cast<size_t>(c)];
        const auto& g = rendered.planes[static_cast<size_t>(c)];
        total += (f.abs() - g.abs()).abs().sum() / norm;
    }
    return total / truth.channels();
}

double phase_discrepancy(const Spectrum& truth, const Spectrum& rendered) {
    require_same_spec_shape(truth, rendered, "phase_discrepancy");
    const double norm = std::sqrt(static_cast<double>(truth.height() * truth.width()));
    double total = 0.0;
    for (int c = 0; c < truth.channels(); ++c) {
        const auto& f = truth.planes[static_cast<size_t>(c)];
        const auto& g = rendered.planes[static_cast<size_t>(c)];
        double sum = 0.0;
        for (Eigen::Index j = 0; j < f.cols(); ++j) {
            for (Eigen::Index i = 0; i < f.rows(); ++i) {
                const double fa = std::abs(f(i, j));
                const double ga = std::abs(g(i, j));
                if (fa <= kPhaseAmplitudeFloor || ga <= kPhaseAmplitudeFloor) continue;
                const double pf = std::atan2(f(i, j).imag(), f(i, j).real());
                const double pg = std::atan2(g(i, j).imag(), g(i, j).real());
                sum += std::abs(wrap_angle(pf - pg));
            }
        }
        total += sum / norm;
    }
    return total / truth.channels();
}

double max_spectral_radius(Eigen::Index height, Eigen::Index width) {
    const double ch = static_cast<double>(height / 2);
    const double cw = static_cast<double>(width / 2);
    return std::sqrt(ch * ch + cw * cw);
}

FilterMask make_lowpass(double d0, Eigen::Index height, Eigen::Index width) {
    const double d = max_spectral_radius(height, width);
    if (!(d0 > 0.0) || d0 > d)
        throw std::invalid_argument("make_lowpass: need 0 < D0 <= max radius");
    FilterMask out;
    out.kind = FilterMask::Kind::LowPass;
    out.inner_radius = 0.0;
    out.outer_radius = d0;
    const Eigen::ArrayXXd r = radius_grid(height, width);
    out.mask = (r <= d0).cast<double>();
    return out;
}

FilterMask make_highpass(double d_t, double d0, Eigen::Index height, Eigen::Index width) {
    const double d = max_spectral_radius(height, width);
    if (!(d0 > 0.0) || d0 > d_t || d_t > d)
        throw std::invalid_argument("make_highpass: need 0 < D0 <= D_t <= max radius");
    FilterMask out;
    out.kind = FilterMask::Kind::HighPass;
    out.inner_radius = d0;
    out.outer_radius = d_t;
    const Eigen::ArrayXXd r = radius_grid(height, width);
    out.mask = (r > d0 && r <= d_t).cast<double>();
    return out;
}

void AnnealSchedule::validate() const {
    if (!(t0 > 0) || !(t0 < t_end))
        throw std::invalid_argument("anneal schedule: need 0 < T0 < T");
    if (!(d0 > 0.0) || !(d0 < d))
        throw std::invalid_argument("anneal schedule: need 0 < D0 < D");
    if (w_low < 0.0 || w_high < 0.0)
        throw std::invalid_argument("anneal schedule: weights must be >= 0");
}

double band_radius(int64_t t, const AnnealSchedule& schedule) {
    if (t <= schedule.t0) return schedule.d0;
    if (t >= schedule.t_end) return schedule.d;  // exact at the ramp end
    const double ramp = static_cast<double>(t - schedule.t0) /
                        static_cast<double>(schedule.t_end - schedule.t0);
    const double dt = schedule.d0 + ramp * (schedule.d - schedule.d0);
    return std::min(std::max(dt, schedule.d0), schedule.d);
}

FreqLossContext::FreqLossContext(const Image& truth, const AnnealSchedule& schedule,
                                 FreqMode mode, int threads)
    : schedule_(schedule),
      mode_(mode),
      height_(truth.height()),
      width_(truth.width()),
      channels_(truth.channels()) {
    if (mode_ == FreqMode::Annealed) {
        schedule_.validate();
    } else if (schedule_.w_low < 0.0) {
        throw std::invalid_argument("freq loss: weights must be >= 0");
    }
    radius_ = radius_grid(height_, width_);
    const Spectrum spec = dft2(truth, threads);
    truth_amp_.reserve(static_cast<size_t>(channels_));
    truth_phase_.reserve(static_cast<size_t>(channels_));
    for (int c = 0; c < channels_; ++c) {
        truth_amp_.push_back(amplitude(spec.planes[static_cast<size_t>(c)]));
        truth_phase_.push_back(phase(spec.planes[static_cast<size_t>(c)]));
    }
}

FreqLossGrad FreqLossContext::evaluate(const Image& rendered, int64_t t, bool with_grad,
                                       int threads) const {
    if (rendered.height() != height_ || rendered.width() != width_ ||
        rendered.channels() != channels_)
        throw std::invalid_argument("freq_loss: rendered/truth dims mismatch");

    FreqLossGrad out;
    if (t <= 0) {
        if (with_grad) out.pixel_grad = Image(height_, width_, channels_, 0.0);
        return out;
    }

    const bool full_band = mode_ == FreqMode::FullBand;
    const bool past_t0 = !full_band && t > schedule_.t0;
    const double d0 = full_band ? 0.0 : schedule_.d0;
    const double dt = past_t0 ? band_radius(t, schedule_) : 0.0;
    out.parts.high_active = past_t0;

    const Spectrum spec = dft2(rendered, threads);
    const double norm = std::sqrt(static_cast<double>(height_ * width_));
    const double channel_scale = 1.0 / channels_;

    std::vector<Spectrum::Plane> gbar;
    if (with_grad)
        gbar.assign(static_cast<size_t>(channels_),
                    Spectrum::Plane::Zero(height_, width_));

    double low_amp = 0.0, low_phase = 0.0, high_amp = 0.0, high_phase = 0.0;
    for (int c = 0; c < channels_; ++c) {
        const auto& plane = spec.planes[static_cast<size_t>(c)];
        const auto& ta = truth_amp_[static_cast<size_t>(c)];
        const auto& tp = truth_phase_[static_cast<size_t>(c)];
        for (Eigen::Index j = 0; j < width_; ++j) {
            for (Eigen::Index i = 0; i < height_; ++i) {
                const double r = radius_(i, j);
                const bool in_low = full_band || r <= d0;
                const bool in_high = !in_low && past_t0 && r <= dt;
                if (!in_low && !in_high) continue;

                const std::complex<double> z = plane(i, j);
                const double ra = std::abs(z);
                const double amp_diff = ra - ta(i, j);
                const double amp_term = std::abs(amp_diff);

                const bool phase_defined =
                    ra > kPhaseAmplitudeFloor && ta(i, j) > kPhaseAmplitudeFloor;
                double phase_term = 0.0;
                double delta = 0.0;
                if (phase_defined) {
                    const double rp = std::atan2(z.imag(), z.real());
                    delta = wrap_angle(tp(i, j) - rp);
                    phase_term = std::abs(delta);
                }

                if (in_low) {
                    low_amp += amp_term;
                    low_phase += phase_term;
                } else {
                    high_amp += amp_term;
                    high_phase += phase_term;
                }

                if (!with_grad) continue;
                const double w = in_low ? schedule_.w_low : schedule_.w_high;
                if (w == 0.0) continue;
                const double scale = w * channel_scale / norm;
                if (ra > kPhaseAmplitudeFloor) {
                    const double d_amp = scale * tie_sign(amp_diff);
                    double d_phase = 0.0;
                    if (phase_defined && std::abs(delta) > kKinkTieTol &&
                        M_PI - std::abs(delta) > kKinkTieTol)
                        d_phase = scale * (delta > 0.0 ? -1.0 : 1.0);
                    const double re = z.real(), im = z.imag();
                    const double ra2 = ra * ra;
                    gbar[static_cast<size_t>(c)](i, j) =
                        std::complex<double>(d_amp * re / ra - d_phase * im / ra2,
                                             d_amp * im / ra + d_phase * re / ra2);
                }
            }
        }
    }

    out.parts.low_amp = low_amp * channel_scale / norm;
    out.parts.low_phase = low_phase * channel_scale / norm;
    out.parts.high_amp = high_amp * channel_scale / norm;
    out.parts.high_phase = high_phase * channel_scale / norm;
    out.loss = schedule_.w_low * (out.parts.low_amp + out.parts.low_phase);
    if (past_t0)
        out.loss += schedule_.w_high * (out.parts.high_amp + out.parts.high_phase);

    if (with_grad) {
        out.pixel_grad = Image(height_, width_, channels_, 0.0);
        for (int c = 0; c < channels_; ++c) {
            Spectrum::Plane g = std::move(gbar[static_cast<size_t>(c)]);
            shift_to_raw(g);
            transform2d(g, true, threads);
            out.pixel_grad.planes[static_cast<size_t>(c)] = g.real();
        }
    }
    return out;
}

FreqLossResult freq_loss(const Image& rendered, const Image& truth, int64_t t,
                         const AnnealSchedule& schedule, int threads) {
    require_same_shape(rendered, truth, "freq_loss");
    const FreqLossContext ctx(truth, schedule, FreqMode::Annealed, threads);
    const FreqLossGrad full = ctx.evaluate(rendered, t, false, threads);
    return {full.loss, full.parts};
}

FreqLossGrad freq_loss_backward(const Image& rendered, const Image& truth, int64_t t,
                                const AnnealSchedule& schedule, int threads) {
    require_same_shape(rendered, truth, "freq_loss");
    const FreqLossContext ctx(truth, schedule, FreqMode::Annealed, threads);
    return ctx.evaluate(rendered, t, true, threads);
}

}  // namespace fsplat
