#include "fsplat/fixtures.hpp"

#include <cmath>
#include <stdexcept>

#include "fsplat/random.hpp"

namespace fsplat {

namespace {

struct PatchRect {
    Eigen::Index row0, row1, col0, col1;  // half-open

    bool contains(Eigen::Index i, Eigen::Index j) const {
        return i >= row0 && i < row1 && j >= col0 && j < col1;
    }
};

PatchRect patch_rect(Eigen::Index h, Eigen::Index w) {
    // Off-center block covering roughly 30% x 30% of the canvas: small enough
    // that a densified field can fully resolve it, big enough to dominate the
    // residual when it stays blurry.
    PatchRect r;
    r.row0 = static_cast<Eigen::Index>(0.22 * h);
    r.row1 = static_cast<Eigen::Index>(0.52 * h);
    r.col0 = static_cast<Eigen::Index>(0.55 * w);
    r.col1 = static_cast<Eigen::Index>(0.85 * w);
    return r;
}

void build_masks(Fixture& fix, const PatchRect& rect, Eigen::Index margin) {
    const Eigen::Index h = fix.target.height();
    const Eigen::Index w = fix.target.width();
    fix.high_variance = Mask::Zero(h, w);
    fix.smooth = Mask::Zero(h, w);
    for (Eigen::Index i = 0; i < h; ++i) {
        for (Eigen::Index j = 0; j < w; ++j) {
            if (rect.contains(i, j)) {
                fix.high_variance(i, j) = 1;
            } else if (i < rect.row0 - margin || i >= rect.row1 + margin ||
                       j < rect.col0 - margin || j >= rect.col1 + margin) {
                fix.smooth(i, j) = 1;
            }
        }
    }
}

// Smooth base layer shared by all fixtures: a gentle two-tone gradient with a
// couple of broad lobes, kept inside a narrow value range so the smooth
// region's variance stays low.
void paint_background(Image& img, Rng& rng) {
    const Eigen::Index h = img.height();
    const Eigen::Index w = img.width();
    const double phase1 = rng.uniform(0.0, 2.0 * M_PI);
    const double phase2 = rng.uniform(0.0, 2.0 * M_PI);
    const double tint[3] = {rng.uniform(-0.03, 0.03), rng.uniform(-0.03, 0.03),
                            rng.uniform(-0.03, 0.03)};
    for (Eigen::Index i = 0; i < h; ++i) {
        const double v = static_cast<double>(i) / h;
        for (Eigen::Index j = 0; j < w; ++j) {
            const double u = static_cast<double>(j) / w;
            const double lobes = 0.05 * std::sin(2.0 * M_PI * u + phase1) *
                                     std::cos(2.0 * M_PI * v + phase2) +
                                 0.04 * std::sin(2.0 * M_PI * (u + v) + phase2);
            const double base = 0.40 + 0.12 * v + 0.05 * u + lobes;
            for (int c = 0; c < 3; ++c) img(i, j, c) = base + tint[c] * (c - 1);
        }
    }
}

void fill_checker_grass(Image& img, const PatchRect& rect, Rng& rng) {
    const Eigen::Index cell = std::max<Eigen::Index>(2, img.height() / 42);
    const Eigen::Index cells_r = (rect.row1 - rect.row0 + cell - 1) / cell;
    const Eigen::Index cells_c = (rect.col1 - rect.col0 + cell - 1) / cell;

    std::vector<std::array<double, 3>> cell_color(
        static_cast<size_t>(cells_r * cells_c));
    for (auto& cc : cell_color) {
        const double base = rng.uniform(0.18, 0.86);
        cc = {base + rng.uniform(-0.10, 0.10), base + rng.uniform(-0.06, 0.14),
              base + rng.uniform(-0.14, 0.06)};
    }
    for (Eigen::Index i = rect.row0; i < rect.row1; ++i) {
        const Eigen::Index ci = (i - rect.row0) / cell;
        for (Eigen::Index j = rect.col0; j < rect.col1; ++j) {
            const Eigen::Index cj = (j - rect.col0) / cell;
            const bool flip = ((ci + cj) & 1) != 0;
            const auto& cc = cell_color[static_cast<size_t>(ci * cells_c + cj)];
            for (int c = 0; c < 3; ++c) {
                const double v = flip ? 1.0 - cc[static_cast<size_t>(c)]
                                      : cc[static_cast<size_t>(c)];
                img(i, j, c) = std::clamp(v, 0.02, 0.98);
            }
        }
    }
}

void fill_fine_stripes(Image& img, const PatchRect& rect, Rng& rng) {
    const double period = std::max(3.0, static_cast<double>(img.height()) / 36.0);
    const double theta = rng.uniform(0.3, 1.2);
    const double ct = std::cos(theta), st = std::sin(theta);
    const double phase = rng.uniform(0.0, 2.0 * M_PI);

    // Smooth random amplitude envelope over the patch. A pure tone would
    // concentrate the patch spectrum into a couple of bins; the modulation
    // spreads it into a band, like real striped textures.
    const Eigen::Index grid = 9;
    Eigen::ArrayXXd envelope(grid, grid);
    for (Eigen::Index i = 0; i < grid; ++i)
        for (Eigen::Index j = 0; j < grid; ++j) envelope(i, j) = rng.uniform(0.0, 1.0);
    const double ph = static_cast<double>(rect.row1 - rect.row0);
    const double pw = static_cast<double>(rect.col1 - rect.col0);
    auto envelope_at = [&](Eigen::Index i, Eigen::Index j) {
        const double u = (i - rect.row0) / ph * (grid - 1);
        const double v = (j - rect.col0) / pw * (grid - 1);
        const Eigen::Index u0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(u), grid - 2);
        const Eigen::Index v0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(v), grid - 2);
        const double fu = u - u0, fv = v - v0;
        return (1 - fu) * ((1 - fv) * envelope(u0, v0) + fv * envelope(u0, v0 + 1)) +
               fu * ((1 - fv) * envelope(u0 + 1, v0) + fv * envelope(u0 + 1, v0 + 1));
    };

    for (Eigen::Index i = rect.row0; i < rect.row1; ++i) {
        for (Eigen::Index j = rect.col0; j < rect.col1; ++j) {
            const double s =
                std::sin(2.0 * M_PI * (ct * j + st * i) / period + phase);
            const double gain = 0.16 + 0.22 * envelope_at(i, j);
            for (int c = 0; c < 3; ++c) {
                const double amp = c == 1 ? 1.1 * gain : gain;
                img(i, j, c) = std::clamp(0.5 + amp * s, 0.02, 0.98);
            }
        }
    }
    // Secondary coarse stripes outside the patch keep the background from
    // being featureless without raising its variance much.
    const double wide = std::max(24.0, static_cast<double>(img.width()) / 6.0);
    for (Eigen::Index i = 0; i < img.height(); ++i) {
        for (Eigen::Index j = 0; j < img.width(); ++j) {
            if (rect.contains(i, j)) continue;
            const double s = std::sin(2.0 * M_PI * (j - 0.35 * i) / wide);
            for (int c = 0; c < 3; ++c) img(i, j, c) += 0.045 * s;
        }
    }
}

void fill_noise_texture(Image& img, const PatchRect& rect, Rng& rng) {
    // Band-limited noise, constant over small square cells: high variance but
    // coarse enough that a densified field can actually resolve it.
    const Eigen::Index cell = std::max<Eigen::Index>(2, img.height() / 42);
    const Eigen::Index ph = rect.row1 - rect.row0;
    const Eigen::Index pw = rect.col1 - rect.col0;
    const Eigen::Index cells_r = (ph + cell - 1) / cell;
    const Eigen::Index cells_c = (pw + cell - 1) / cell;
    Eigen::ArrayXXd luma(cells_r, cells_c), chroma(cells_r, cells_c);
    for (Eigen::Index i = 0; i < cells_r; ++i) {
        for (Eigen::Index j = 0; j < cells_c; ++j) {
            luma(i, j) = rng.uniform(-1.0, 1.0);
            chroma(i, j) = rng.uniform(-1.0, 1.0);
        }
    }
    for (Eigen::Index i = 0; i < ph; ++i) {
        for (Eigen::Index j = 0; j < pw; ++j) {
            const double l = 0.5 + 0.42 * luma(i / cell, j / cell);
            const double k = 0.10 * chroma(i / cell, j / cell);
            img(rect.row0 + i, rect.col0 + j, 0) = std::clamp(l + k, 0.02, 0.98);
            img(rect.row0 + i, rect.col0 + j, 1) = std::clamp(l - 0.4 * k, 0.02, 0.98);
            img(rect.row0 + i, rect.col0 + j, 2) = std::clamp(l - k, 0.02, 0.98);
        }
    }
}

}  // namespace

const std::vector<std::string>& fixture_names() {
    static const std::vector<std::string> names = {"checker-grass", "stripes-multiscale",
                                                   "textured-patch"};
    return names;
}

Fixture make_fixture(const std::string& name, Eigen::Index size, uint64_t seed,
                     int channels) {
    return make_fixture_rect(name, size, size, seed, channels);
}

Fixture make_fixture_rect(const std::string& name, Eigen::Index height,
                          Eigen::Index width, uint64_t seed, int channels) {
    if (height < 32 || width < 32)
        throw std::invalid_argument("make_fixture: canvas must be at least 32x32");
    if (channels != 1 && channels != 3)
        throw std::invalid_argument("make_fixture: channels must be 1 or 3");

    Fixture fix;
    fix.name = name;
    fix.target = Image(height, width, 3);
    const PatchRect rect = patch_rect(height, width);

    Rng rng(fork_seed(seed, 0xf1c5));
    paint_background(fix.target, rng);

    if (name == "checker-grass") {
        fill_checker_grass(fix.target, rect, rng);
    } else if (name == "stripes-multiscale") {
        fill_fine_stripes(fix.target, rect, rng);
    } else if (name == "textured-patch") {
        fill_noise_texture(fix.target, rect, rng);
    } else {
        throw std::invalid_argument("make_fixture: unknown fixture '" + name + "'");
    }

    for (auto& plane : fix.target.planes)
        plane = plane.min(0.98).max(0.02);

    if (channels == 1) {
        Image gray(height, width, 1);
        gray.planes[0] =
            (fix.target.planes[0] + fix.target.planes[1] + fix.target.planes[2]) / 3.0;
        fix.target = std::move(gray);
    }

    build_masks(fix, rect, std::max<Eigen::Index>(4, height / 32));
    return fix;
}

}  // namespace fsplat
