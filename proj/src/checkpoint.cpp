#include "fsplat/io/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <vector>

namespace fsplat::io {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

constexpr char kMagic[4] = {'F', 'R', 'E', 'G'};

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

template <typename T>
void write_raw(std::FILE* f, const T& value, const std::string& path) {
    if (std::fwrite(&value, sizeof(T), 1, f) != 1) fail(path, "checkpoint write failed");
}

template <typename T>
T read_raw(std::FILE* f, const std::string& path) {
    T value;
    if (std::fread(&value, sizeof(T), 1, f) != 1) fail(path, "truncated checkpoint");
    return value;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) fail(path, "cannot open for writing");
    const SplatField& field = checkpoint.field;

    if (std::fwrite(kMagic, 1, 4, f.get()) != 4) fail(path, "checkpoint write failed");
    write_raw<uint32_t>(f.get(), kCheckpointVersion, path);
    write_raw<uint32_t>(f.get(), static_cast<uint32_t>(field.canvas.height), path);
    write_raw<uint32_t>(f.get(), static_cast<uint32_t>(field.canvas.width), path);
    write_raw<uint32_t>(f.get(), static_cast<uint32_t>(field.canvas.channels), path);
    write_raw<uint64_t>(f.get(), static_cast<uint64_t>(field.splats.size()), path);

    const int channels = field.canvas.channels;
    for (const GaussianSplat& s : field.splats) {
        write_raw<double>(f.get(), s.pos.x(), path);
        write_raw<double>(f.get(), s.pos.y(), path);
        write_raw<double>(f.get(), s.log_scale[0], path);
        write_raw<double>(f.get(), s.log_scale[1], path);
        write_raw<double>(f.get(), s.rotation, path);
        write_raw<double>(f.get(), s.opacity_logit, path);
        for (int c = 0; c < channels; ++c) write_raw<double>(f.get(), s.color[c], path);
        write_raw<double>(f.get(), s.depth, path);
    }

    write_raw<uint64_t>(f.get(), checkpoint.config_text.size(), path);
    if (!checkpoint.config_text.empty() &&
        std::fwrite(checkpoint.config_text.data(), 1, checkpoint.config_text.size(),
                    f.get()) != checkpoint.config_text.size())
        fail(path, "checkpoint write failed");
    write_raw<uint64_t>(f.get(), checkpoint.iteration, path);
    if (std::fflush(f.get()) != 0) fail(path, "checkpoint write failed");
}

Checkpoint load_checkpoint(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) fail(path, "cannot open");

    char magic[4];
    if (std::fread(magic, 1, 4, f.get()) != 4 || std::memcmp(magic, kMagic, 4) != 0)
        fail(path, "not a checkpoint (bad magic)");
    const uint32_t version = read_raw<uint32_t>(f.get(), path);
    if (version != kCheckpointVersion)
        fail(path, "unsupported checkpoint version " + std::to_string(version));

    Checkpoint out;
    const uint32_t height = read_raw<uint32_t>(f.get(), path);
    const uint32_t width = read_raw<uint32_t>(f.get(), path);
    const uint32_t channels = read_raw<uint32_t>(f.get(), path);
    if (height < 1 || width < 1 || (channels != 1 && channels != 3))
        fail(path, "corrupt checkpoint header");
    out.field.canvas = {static_cast<Eigen::Index>(height), static_cast<Eigen::Index>(width),
                        static_cast<int>(channels)};

    const uint64_t count = read_raw<uint64_t>(f.get(), path);
    if (count > (1ull << 32)) fail(path, "corrupt checkpoint header");
    out.field.splats.resize(static_cast<size_t>(count));
    for (GaussianSplat& s : out.field.splats) {
        s.pos.x() = read_raw<double>(f.get(), path);
        s.pos.y() = read_raw<double>(f.get(), path);
        s.log_scale[0] = read_raw<double>(f.get(), path);
        s.log_scale[1] = read_raw<double>(f.get(), path);
        s.rotation = read_raw<double>(f.get(), path);
        s.opacity_logit = read_raw<double>(f.get(), path);
        s.color.setZero();
        for (uint32_t c = 0; c < channels; ++c)
            s.color[static_cast<int>(c)] = read_raw<double>(f.get(), path);
        s.depth = read_raw<double>(f.get(), path);
    }

    const uint64_t config_len = read_raw<uint64_t>(f.get(), path);
    if (config_len > (1ull << 24)) fail(path, "corrupt checkpoint (config length)");
    out.config_text.resize(static_cast<size_t>(config_len));
    if (config_len > 0 &&
        std::fread(out.config_text.data(), 1, out.config_text.size(), f.get()) !=
            out.config_text.size())
        fail(path, "truncated checkpoint");
    out.iteration = read_raw<uint64_t>(f.get(), path);
    return out;
}

}  // namespace fsplat::io
