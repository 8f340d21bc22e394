#ifndef FSPLAT_SPECTRAL_HPP
#define FSPLAT_SPECTRAL_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "fsplat/image.hpp"

namespace fsplat {

/// Per-channel complex frequency grid in the centered convention: the DC bin
/// sits at (H/2, W/2) with integer division.
struct Spectrum {
    using Plane = Eigen::Array<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic>;
    std::vector<Plane> planes;

    Eigen::Index height() const { return planes.empty() ? 0 : planes[0].rows(); }
    Eigen::Index width() const { return planes.empty() ? 0 : planes[0].cols(); }
    int channels() const { return static_cast<int>(planes.size()); }
};

/// Unnormalized forward 2D DFT of every channel, centered afterwards.
/// Contractually equal to the direct double sum
///   F(u,v) = sum_{x,y} I(x,y) exp(-2 pi i (u x / H + v y / W)).
Spectrum dft2(const Image& image, int threads = 1);

Eigen::ArrayXXd amplitude(const Spectrum::Plane& plane);

/// Four-quadrant angle in (-pi, pi]; exactly 0 wherever the amplitude is 0.
Eigen::ArrayXXd phase(const Spectrum::Plane& plane);

/// Smallest representative of an angle difference, wrapped into (-pi, pi].
double wrap_angle(double delta);

/// Mean-over-channels amplitude discrepancy: (1/sqrt(HW)) sum | |F| - |F^| |.
double amp_discrepancy(const Spectrum& truth, const Spectrum& rendered);

/// Mean-over-channels phase discrepancy with wrapped differences. Bins where
/// either amplitude is <= 1e-12 contribute nothing (phase is undefined there).
double phase_discrepancy(const Spectrum& truth, const Spectrum& rendered);

constexpr double kPhaseAmplitudeFloor = 1e-12;

/// Hard radial 0/1 mask on the centered grid. Membership is decided on the
/// squared radius (integer offsets from the center bin), which is exact.
struct FilterMask {
    enum class Kind { LowPass, HighPass };
    Kind kind;
    double inner_radius;  // 0 for low-pass; D0 for high-pass
    double outer_radius;  // D0 for low-pass; D_t for high-pass
    Eigen::ArrayXXd mask; // values in {0, 1}
};

/// Maximum spectral radius of the centered grid: hypot(H/2, W/2) from the
/// integer DC bin; no bin lies beyond it.
double max_spectral_radius(Eigen::Index height, Eigen::Index width);

/// Low-pass: 1 where radius <= d0.
FilterMask make_lowpass(double d0, Eigen::Index height, Eigen::Index width);

/// High-pass annulus: 1 where d0 < radius <= d_t. Requires 0 < d0 <= d_t <= D.
FilterMask make_highpass(double d_t, double d0, Eigen::Index height, Eigen::Index width);

/// Annealing schedule: the high band (D0, D_t] widens linearly from D0 at
/// iteration T0 to the full radius D at iteration T.
struct AnnealSchedule {
    int64_t t0 = 0;
    int64_t t_end = 0;
    double d0 = 0.0;
    double d = 0.0;
    double w_low = 0.0;
    double w_high = 0.0;

    void validate() const;
};

/// Upper envelope of the annealed band: D_t = D0 + (t-T0)(D-D0)/(T-T0),
/// clamped to [D0, D]; equals D0 for t <= T0. Non-decreasing in t.
double band_radius(int64_t t, const AnnealSchedule& schedule);

struct FreqLossParts {
    double low_amp = 0.0;
    double low_phase = 0.0;
    double high_amp = 0.0;
    double high_phase = 0.0;
    bool high_active = false;
};

struct FreqLossResult {
    double loss = 0.0;
    FreqLossParts parts;
};

/// Progressive frequency loss:
///   t <= T0 : w_low  * (d_la + d_lp)
///   t >  T0 : w_low  * (d_la + d_lp) + w_high * (d_ha + d_hp)
/// with the low band masked to radius <= D0 and the high band to the annulus
/// (D0, D_t]. Returns 0 with inactive parts for t <= 0.
FreqLossResult freq_loss(const Image& rendered, const Image& truth, int64_t t,
                         const AnnealSchedule& schedule, int threads = 1);

struct FreqLossGrad {
    double loss = 0.0;
    FreqLossParts parts;
    Image pixel_grad;  // dL_f / d rendered
};

/// Loss plus its exact gradient with respect to the rendered pixels. At bins
/// whose amplitude is below the floor the amplitude/phase subgradient is 0.
/// Nondifferentiable kinks (|.| ties, the phase-wrap boundary) use
/// subgradient 0 within a 1e-12 tie zone, which keeps bins that are pinned to
/// a kink (DC/Nyquist phases of real images) consistent with differencing.
FreqLossGrad freq_loss_backward(const Image& rendered, const Image& truth, int64_t t,
                                const AnnealSchedule& schedule, int threads = 1);

/// Band selection for the regularizer. Annealed is the progressive loss;
/// FullBand is the naive variant that compares whole unfiltered spectra
/// (reported through the low-band parts, high band permanently inactive).
enum class FreqMode { Annealed, FullBand };

/// Precomputed per-resolution state for the training loop: the truth spectrum
/// amplitude/phase and the squared-radius grid. Purely an evaluation cache;
/// results are identical to the stateless entry points.
class FreqLossContext {
public:
    FreqLossContext(const Image& truth, const AnnealSchedule& schedule,
                    FreqMode mode = FreqMode::Annealed, int threads = 1);

    FreqLossGrad evaluate(const Image& rendered, int64_t t, bool with_grad,
                          int threads = 1) const;

    const AnnealSchedule& schedule() const { return schedule_; }

private:
    AnnealSchedule schedule_;
    FreqMode mode_ = FreqMode::Annealed;
    Eigen::Index height_ = 0, width_ = 0;
    int channels_ = 0;
    Eigen::ArrayXXd radius_;
    std::vector<Eigen::ArrayXXd> truth_amp_;
    std::vector<Eigen::ArrayXXd> truth_phase_;
};

}  // namespace fsplat

#endif
