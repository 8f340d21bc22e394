#include "fsplat/io/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <vector>

#include "fsplat/spectral.hpp"

namespace fsplat::io {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

uint8_t quantize(double v) {
    const double c = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    return static_cast<uint8_t>(std::lround(c * 255.0));
}

// ---- PPM (P6) ----

int ppm_token(std::FILE* f, const std::string& path) {
    // Whitespace-separated decimal token; '#' starts a comment to end of line.
    int ch = std::fgetc(f);
    for (;;) {
        while (ch != EOF && std::isspace(ch)) ch = std::fgetc(f);
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = std::fgetc(f);
            continue;
        }
        break;
    }
    if (ch == EOF || !std::isdigit(ch)) fail(path, "malformed PPM header");
    int value = 0;
    while (ch != EOF && std::isdigit(ch)) {
        value = value * 10 + (ch - '0');
        if (value > 1 << 28) fail(path, "malformed PPM header");
        ch = std::fgetc(f);
    }
    if (ch == EOF) fail(path, "truncated PPM header");
    return value;
}

Image load_ppm(std::FILE* f, const std::string& path) {
    char magic[2];
    if (std::fread(magic, 1, 2, f) != 2 || magic[0] != 'P' || magic[1] != '6')
        fail(path, "not a binary PPM (P6)");
    const int width = ppm_token(f, path);
    const int height = ppm_token(f, path);
    const int maxval = ppm_token(f, path);
    if (width < 1 || height < 1) fail(path, "bad PPM dimensions");
    if (maxval != 255) fail(path, "unsupported PPM maxval (only 255)");

    const size_t count = static_cast<size_t>(width) * height * 3;
    std::vector<uint8_t> bytes(count);
    if (std::fread(bytes.data(), 1, count, f) != count) fail(path, "truncated PPM pixel data");

    Image img(height, width, 3);
    size_t k = 0;
    for (Eigen::Index i = 0; i < height; ++i)
        for (Eigen::Index j = 0; j < width; ++j)
            for (int c = 0; c < 3; ++c) img(i, j, c) = bytes[k++] / 255.0;
    return img;
}

void save_ppm(const Image& image, const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) fail(path, "cannot open for writing");
    std::fprintf(f.get(), "P6\n%ld %ld\n255\n", static_cast<long>(image.width()),
                 static_cast<long>(image.height()));
    std::vector<uint8_t> row(static_cast<size_t>(image.width()) * 3);
    for (Eigen::Index i = 0; i < image.height(); ++i) {
        size_t k = 0;
        for (Eigen::Index j = 0; j < image.width(); ++j) {
            for (int c = 0; c < 3; ++c) {
                const int src = image.channels() == 1 ? 0 : c;
                row[k++] = quantize(image(i, j, src));
            }
        }
        if (std::fwrite(row.data(), 1, row.size(), f.get()) != row.size())
            fail(path, "write failed");
    }
}

// ---- PNG ----

Image load_png(std::FILE* f, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(path, "libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail(path, "libpng init failed");
    }
    std::vector<std::vector<png_byte>> rows;
    std::vector<png_bytep> row_ptrs;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "corrupt or truncated PNG");
    }
    png_init_io(png, f);
    png_read_info(png, info);

    png_set_expand(png);        // palette/short gray to 8-bit
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const png_byte color = png_get_color_type(png, info);
    const int channels = color == PNG_COLOR_TYPE_GRAY ? 1 : 3;
    if (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_RGB) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "unsupported PNG color type");
    }

    rows.assign(height, std::vector<png_byte>(static_cast<size_t>(width) * channels));
    row_ptrs.resize(height);
    for (png_uint_32 i = 0; i < height; ++i) row_ptrs[i] = rows[i].data();
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(static_cast<Eigen::Index>(height), static_cast<Eigen::Index>(width), channels);
    for (png_uint_32 i = 0; i < height; ++i)
        for (png_uint_32 j = 0; j < width; ++j)
            for (int c = 0; c < channels; ++c)
                img(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j), c) =
                    rows[i][static_cast<size_t>(j) * channels + static_cast<size_t>(c)] / 255.0;
    return img;
}

void save_png(const Image& image, const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) fail(path, "cannot open for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(path, "libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail(path, "libpng init failed");
    }
    const int channels = image.channels();
    std::vector<png_byte> row(static_cast<size_t>(image.width()) * channels);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(path, "PNG write failed");
    }
    png_init_io(png, f.get());

    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()),
                 static_cast<png_uint_32>(image.height()), 8,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    for (Eigen::Index i = 0; i < image.height(); ++i) {
        size_t k = 0;
        for (Eigen::Index j = 0; j < image.width(); ++j)
            for (int c = 0; c < channels; ++c) row[k++] = quantize(image(i, j, c));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void write_heatmap(Eigen::ArrayXXd values, const std::string& path) {
    const double lo = values.minCoeff();
    const double hi = values.maxCoeff();
    if (hi > lo)
        values = (values - lo) / (hi - lo);
    else
        values.setZero();
    Image gray(values.rows(), values.cols(), 1);
    gray.planes[0] = values;
    save_image(gray, path);
}

Eigen::ArrayXXd mean_log_amplitude(const Image& image) {
    const Spectrum spec = dft2(image);
    Eigen::ArrayXXd mean = Eigen::ArrayXXd::Zero(spec.height(), spec.width());
    for (const auto& plane : spec.planes) mean += amplitude(plane);
    mean /= spec.channels();
    return (1.0 + mean).log();
}

}  // namespace

Image load_image(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) fail(path, "cannot open");
    unsigned char magic[8] = {0};
    const size_t got = std::fread(magic, 1, sizeof(magic), f.get());
    std::rewind(f.get());
    if (got >= 2 && magic[0] == 'P' && magic[1] == '6') return load_ppm(f.get(), path);
    if (got >= 8 && png_sig_cmp(magic, 0, 8) == 0) return load_png(f.get(), path);
    fail(path, "unsupported image format (expected PNG or binary PPM)");
}

void save_image(const Image& image, const std::string& path) {
    if (image.channels() == 0 || image.height() < 1)
        throw std::invalid_argument("save_image: empty image");
    if (ends_with(path, ".ppm")) {
        save_ppm(image, path);
    } else if (ends_with(path, ".png")) {
        save_png(image, path);
    } else {
        fail(path, "unsupported output extension (use .png or .ppm)");
    }
}

void export_spectrum(const Image& image, const std::string& path) {
    write_heatmap(mean_log_amplitude(image), path);
}

void export_spectrum_diff(const Image& a, const Image& b, const std::string& path) {
    require_same_shape(a, b, "export_spectrum_diff");
    const Spectrum sa = dft2(a);
    const Spectrum sb = dft2(b);
    Eigen::ArrayXXd mean = Eigen::ArrayXXd::Zero(sa.height(), sa.width());
    for (int c = 0; c < sa.channels(); ++c)
        mean += (amplitude(sa.planes[static_cast<size_t>(c)]) -
                 amplitude(sb.planes[static_cast<size_t>(c)]))
                    .abs();
    mean /= sa.channels();
    write_heatmap((1.0 + mean).log(), path);
}

}  // namespace fsplat::io
