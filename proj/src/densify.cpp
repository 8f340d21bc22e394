#include "fsplat/densify.hpp"

#include <cmath>
#include <stdexcept>

#include "fsplat/random.hpp"

namespace fsplat {

void DensifyStats::resize(Eigen::Index n) {
    grad_norm_accum = Eigen::VectorXd::Zero(n);
    grad_vec_accum = Eigen::Matrix2Xd::Zero(2, n);
    obs_count = Eigen::VectorXi::Zero(n);
}

void accumulate(DensifyStats& stats, const Eigen::Matrix2Xd& pos_grads,
                const std::vector<uint8_t>& touched) {
    if (stats.size() != pos_grads.cols() ||
        touched.size() != static_cast<size_t>(pos_grads.cols()))
        throw std::invalid_argument("accumulate: stats/gradient length mismatch");
    for (Eigen::Index i = 0; i < stats.size(); ++i) {
        stats.grad_norm_accum(i) += pos_grads.col(i).norm();
        stats.grad_vec_accum.col(i) += pos_grads.col(i);
        if (touched[static_cast<size_t>(i)]) stats.obs_count(i) += 1;
    }
}

DensifyReport densify_step(SplatField& field, DensifyStats& stats,
                           const DensifyParams& params, uint64_t seed) {
    if (stats.size() != static_cast<Eigen::Index>(field.splats.size()))
        throw std::invalid_argument("densify_step: stats length mismatch");

    DensifyReport report;
    const double tau = params.effective_tau();
    const double sigma_split = params.sigma_split_frac * field.canvas.diagonal();
    const Eigen::Index n = static_cast<Eigen::Index>(field.splats.size());

    Rng rng(fork_seed(seed, 0xde51));
    std::vector<GaussianSplat> born;

    for (Eigen::Index i = 0; i < n; ++i) {
        if (stats.average_norm(i) < tau) continue;
        GaussianSplat& splat = field.splats[static_cast<size_t>(i)];
        const double sigma_max =
            std::exp(std::max(splat.log_scale[0], splat.log_scale[1]));

        if (sigma_max < sigma_split) {
            // Under-reconstruction: clone, offsetting the copy along the
            // accumulated gradient direction.
            GaussianSplat copy = splat;
            const Eigen::Vector2d dir = stats.grad_vec_accum.col(i);
            const double norm = dir.norm();
            if (norm > 1e-12)
                copy.pos += params.clone_offset_sigma * sigma_max * (dir / norm);
            born.push_back(copy);
            ++report.clones;
        } else {
            // Over-reconstruction: split into two children sampled from the
            // parent density, scales divided by the split factor.
            const Eigen::Matrix2d cov = covariance(splat);
            const Eigen::LLT<Eigen::Matrix2d> chol(cov);
            const Eigen::Matrix2d l = chol.matrixL();
            const Eigen::Vector2d parent_pos = splat.pos;
            const Eigen::Vector2d child_scale =
                splat.log_scale.array() - std::log(params.split_factor);

            GaussianSplat first = splat;
            auto [z1, z2] = rng.normal2();
            first.pos = parent_pos + l * Eigen::Vector2d(z1, z2);
            first.log_scale = child_scale;

            GaussianSplat second = splat;
            auto [z3, z4] = rng.normal2();
            second.pos = parent_pos + l * Eigen::Vector2d(z3, z4);
            second.log_scale = child_scale;

            splat = first;  // replace parent in place, sibling appended
            born.push_back(second);
            report.split_slots.push_back(static_cast<int>(i));
            ++report.splits;
        }
        stats.grad_norm_accum(i) = 0.0;
        stats.grad_vec_accum.col(i).setZero();
        stats.obs_count(i) = 0;
    }

    if (!born.empty()) {
        field.splats.insert(field.splats.end(), born.begin(), born.end());
        const Eigen::Index total = static_cast<Eigen::Index>(field.splats.size());
        Eigen::VectorXd norm_accum = Eigen::VectorXd::Zero(total);
        Eigen::Matrix2Xd vec_accum = Eigen::Matrix2Xd::Zero(2, total);
        Eigen::VectorXi obs = Eigen::VectorXi::Zero(total);
        norm_accum.head(n) = stats.grad_norm_accum;
        vec_accum.leftCols(n) = stats.grad_vec_accum;
        obs.head(n) = stats.obs_count;
        stats.grad_norm_accum = std::move(norm_accum);
        stats.grad_vec_accum = std::move(vec_accum);
        stats.obs_count = std::move(obs);
    }
    return report;
}

int prune(SplatField& field, double epsilon_opacity, std::vector<int>* kept) {
    if (kept) kept->clear();
    const Eigen::Index n = static_cast<Eigen::Index>(field.splats.size());
    if (n == 0) return 0;

    std::vector<uint8_t> keep(static_cast<size_t>(n), 0);
    int survivors = 0;
    Eigen::Index best = 0;
    double best_opacity = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double opacity = logistic(field.splats[static_cast<size_t>(i)].opacity_logit);
        if (opacity > best_opacity) {
            best_opacity = opacity;
            best = i;
        }
        if (opacity >= epsilon_opacity) {
            keep[static_cast<size_t>(i)] = 1;
            ++survivors;
        }
    }
    if (survivors == 0) keep[static_cast<size_t>(best)] = 1;  // never empty the field

    std::vector<GaussianSplat> next;
    next.reserve(static_cast<size_t>(std::max(survivors, 1)));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!keep[static_cast<size_t>(i)]) continue;
        next.push_back(field.splats[static_cast<size_t>(i)]);
        if (kept) kept->push_back(static_cast<int>(i));
    }
    const int removed = static_cast<int>(n - static_cast<Eigen::Index>(next.size()));
    field.splats = std::move(next);
    return removed;
}

}  // namespace fsplat
