#ifndef FSPLAT_METRICS_HPP
#define FSPLAT_METRICS_HPP

#include "fsplat/image.hpp"

namespace fsplat {

struct MetricReport {
    double psnr = 0.0;
    double ssim = 0.0;
    double l1 = 0.0;
};

struct ValueWithGrad {
    double value = 0.0;
    Image grad;  // with respect to the first argument
};

/// Mean absolute error; subgradient 0 where the images agree exactly.
ValueWithGrad l1(const Image& a, const Image& b);
double l1_value(const Image& a, const Image& b);

/// 10*log10(1/MSE) for values in [0,1], capped at 100 dB (exact match).
double psnr(const Image& a, const Image& b);

/// Classic single-scale SSIM: 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2,
/// C2 = 0.03^2, valid windows only, averaged over positions and channels.
/// Needs H, W >= 11.
double ssim(const Image& a, const Image& b);

/// D-SSIM = (1 - SSIM)/2 with the analytic gradient with respect to `a`.
ValueWithGrad d_ssim(const Image& a, const Image& b);

/// Reference-side window statistics cached for repeated D-SSIM evaluations
/// against one fixed target (the training loop's case). Results are identical
/// to d_ssim(a, truth).
class DssimReference {
public:
    explicit DssimReference(const Image& truth);
    ValueWithGrad evaluate(const Image& a) const;

private:
    Image truth_;
    std::vector<Eigen::ArrayXXd> mu_;
    std::vector<Eigen::ArrayXXd> e_sq_;
};

MetricReport evaluate_metrics(const Image& a, const Image& b);

}  // namespace fsplat

#endif
