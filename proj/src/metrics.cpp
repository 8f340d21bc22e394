#include "fsplat/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace fsplat {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

Eigen::Array<double, kWindow, 1> gaussian_kernel() {
    Eigen::Array<double, kWindow, 1> k;
    const double center = (kWindow - 1) / 2.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - center;
        k[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    }
    k /= k.sum();
    return k;
}

// Valid 1D correlations along each axis; the window is separable.
Eigen::ArrayXXd filter_rows(const Eigen::ArrayXXd& in,
                            const Eigen::Array<double, kWindow, 1>& k) {
    Eigen::ArrayXXd out = Eigen::ArrayXXd::Zero(in.rows() - kWindow + 1, in.cols());
    for (int t = 0; t < kWindow; ++t)
        out += k[t] * in.block(t, 0, out.rows(), out.cols());
    return out;
}

Eigen::ArrayXXd filter_cols(const Eigen::ArrayXXd& in,
                            const Eigen::Array<double, kWindow, 1>& k) {
    Eigen::ArrayXXd out = Eigen::ArrayXXd::Zero(in.rows(), in.cols() - kWindow + 1);
    for (int t = 0; t < kWindow; ++t)
        out += k[t] * in.block(0, t, out.rows(), out.cols());
    return out;
}

Eigen::ArrayXXd filter_valid(const Eigen::ArrayXXd& in,
                             const Eigen::Array<double, kWindow, 1>& k) {
    return filter_cols(filter_rows(in, k), k);
}

// Adjoint of filter_valid: scatter window-position values back to pixels.
Eigen::ArrayXXd filter_valid_adjoint(const Eigen::ArrayXXd& g, Eigen::Index rows,
                                     Eigen::Index cols,
                                     const Eigen::Array<double, kWindow, 1>& k) {
    Eigen::ArrayXXd mid = Eigen::ArrayXXd::Zero(g.rows(), cols);
    for (int t = 0; t < kWindow; ++t) mid.block(0, t, g.rows(), g.cols()) += k[t] * g;
    Eigen::ArrayXXd out = Eigen::ArrayXXd::Zero(rows, cols);
    for (int t = 0; t < kWindow; ++t) out.block(t, 0, mid.rows(), mid.cols()) += k[t] * mid;
    return out;
}

struct SsimResult {
    double mean = 0.0;
    Image grad;
};

// Reference-side stats may come precomputed (training evaluates against one
// fixed target thousands of times).
SsimResult ssim_impl(const Image& a, const Image& b, bool with_grad,
                     const std::vector<Eigen::ArrayXXd>* mu_y_cache = nullptr,
                     const std::vector<Eigen::ArrayXXd>* e_yy_cache = nullptr) {
    require_same_shape(a, b, "ssim");
    if (a.height() < kWindow || a.width() < kWindow)
        throw std::invalid_argument("ssim: images must be at least 11x11");

    const auto k = gaussian_kernel();
    SsimResult res;
    if (with_grad) res.grad = Image(a.height(), a.width(), a.channels(), 0.0);

    const Eigen::Index ph = a.height() - kWindow + 1;
    const Eigen::Index pw = a.width() - kWindow + 1;
    const double inv_count = 1.0 / (static_cast<double>(ph * pw) * a.channels());

    double total = 0.0;
    for (int c = 0; c < a.channels(); ++c) {
        const auto& x = a.planes[static_cast<size_t>(c)];
        const auto& y = b.planes[static_cast<size_t>(c)];

        const Eigen::ArrayXXd mu_x = filter_valid(x, k);
        const Eigen::ArrayXXd mu_y =
            mu_y_cache ? (*mu_y_cache)[static_cast<size_t>(c)] : filter_valid(y, k);
        const Eigen::ArrayXXd e_xx = filter_valid(x.square(), k);
        const Eigen::ArrayXXd e_yy =
            e_yy_cache ? (*e_yy_cache)[static_cast<size_t>(c)] : filter_valid(y.square(), k);
        const Eigen::ArrayXXd e_xy = filter_valid(x * y, k);

        const Eigen::ArrayXXd var_x = e_xx - mu_x.square();
        const Eigen::ArrayXXd var_y = e_yy - mu_y.square();
        const Eigen::ArrayXXd cov_xy = e_xy - mu_x * mu_y;

        const Eigen::ArrayXXd n1 = 2.0 * mu_x * mu_y + kC1;
        const Eigen::ArrayXXd n2 = 2.0 * cov_xy + kC2;
        const Eigen::ArrayXXd d1 = mu_x.square() + mu_y.square() + kC1;
        const Eigen::ArrayXXd d2 = var_x + var_y + kC2;

        const Eigen::ArrayXXd s = (n1 * n2) / (d1 * d2);
        total += s.sum();

        if (!with_grad) continue;
        const Eigen::ArrayXXd inv_dd = 1.0 / (d1 * d2);
        const Eigen::ArrayXXd ds_dn1 = n2 * inv_dd;
        const Eigen::ArrayXXd ds_dn2 = n1 * inv_dd;
        const Eigen::ArrayXXd ds_dd1 = -s / d1;
        const Eigen::ArrayXXd ds_dd2 = -s / d2;

        const Eigen::ArrayXXd ds_dmux =
            2.0 * mu_y * ds_dn1 + 2.0 * mu_x * ds_dd1 - 2.0 * mu_y * ds_dn2 -
            2.0 * mu_x * ds_dd2;
        const Eigen::ArrayXXd ds_dexx = ds_dd2;
        const Eigen::ArrayXXd ds_dexy = 2.0 * ds_dn2;

        Eigen::ArrayXXd grad =
            filter_valid_adjoint(ds_dmux, a.height(), a.width(), k) +
            2.0 * x * filter_valid_adjoint(ds_dexx, a.height(), a.width(), k) +
            y * filter_valid_adjoint(ds_dexy, a.height(), a.width(), k);
        res.grad.planes[static_cast<size_t>(c)] = grad * inv_count;
    }
    res.mean = total * inv_count;
    return res;
}

}  // namespace

ValueWithGrad l1(const Image& a, const Image& b) {
    require_same_shape(a, b, "l1");
    ValueWithGrad out;
    out.grad = Image(a.height(), a.width(), a.channels(), 0.0);
    const double inv_count =
        1.0 / (static_cast<double>(a.pixels()) * a.channels());
    double total = 0.0;
    for (int c = 0; c < a.channels(); ++c) {
        const Eigen::ArrayXXd diff =
            a.planes[static_cast<size_t>(c)] - b.planes[static_cast<size_t>(c)];
        total += diff.abs().sum();
        out.grad.planes[static_cast<size_t>(c)] = diff.sign() * inv_count;
    }
    out.value = total * inv_count;
    return out;
}

double l1_value(const Image& a, const Image& b) {
    require_same_shape(a, b, "l1");
    double total = 0.0;
    for (int c = 0; c < a.channels(); ++c)
        total += (a.planes[static_cast<size_t>(c)] - b.planes[static_cast<size_t>(c)])
                     .abs()
                     .sum();
    return total / (static_cast<double>(a.pixels()) * a.channels());
}

double psnr(const Image& a, const Image& b) {
    require_same_shape(a, b, "psnr");
    double sq = 0.0;
    for (int c = 0; c < a.channels(); ++c)
        sq += (a.planes[static_cast<size_t>(c)] - b.planes[static_cast<size_t>(c)])
                  .square()
                  .sum();
    const double mse = sq / (static_cast<double>(a.pixels()) * a.channels());
    if (mse <= 0.0) return 100.0;
    return std::min(100.0, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image& a, const Image& b) { return ssim_impl(a, b, false).mean; }

ValueWithGrad d_ssim(const Image& a, const Image& b) {
    SsimResult s = ssim_impl(a, b, true);
    ValueWithGrad out;
    out.value = (1.0 - s.mean) / 2.0;
    out.grad = std::move(s.grad);
    for (auto& plane : out.grad.planes) plane *= -0.5;
    return out;
}

DssimReference::DssimReference(const Image& truth) : truth_(truth) {
    const auto k = gaussian_kernel();
    for (const auto& plane : truth_.planes) {
        mu_.push_back(filter_valid(plane, k));
        e_sq_.push_back(filter_valid(plane.square(), k));
    }
}

ValueWithGrad DssimReference::evaluate(const Image& a) const {
    SsimResult s = ssim_impl(a, truth_, true, &mu_, &e_sq_);
    ValueWithGrad out;
    out.value = (1.0 - s.mean) / 2.0;
    out.grad = std::move(s.grad);
    for (auto& plane : out.grad.planes) plane *= -0.5;
    return out;
}

MetricReport evaluate_metrics(const Image& a, const Image& b) {
    return {psnr(a, b), ssim(a, b), l1_value(a, b)};
}

}  // namespace fsplat
