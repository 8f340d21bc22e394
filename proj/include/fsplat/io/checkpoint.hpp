#ifndef FSPLAT_IO_CHECKPOINT_HPP
#define FSPLAT_IO_CHECKPOINT_HPP

#include <cstdint>
#include <string>

#include "fsplat/gaussian_field.hpp"

namespace fsplat::io {

/// Binary checkpoint: magic "FREG", u32 format version, canvas dims, splat
/// count, then per-splat parameters as 64-bit little-endian reals in
/// declaration order (pos x/y, log_scale 1/2, rotation, opacity logit,
/// C colors, depth), then the run config text and the iteration counter.
/// Save -> load reproduces the field bitwise.
struct Checkpoint {
    SplatField field;
    std::string config_text;
    uint64_t iteration = 0;
};

constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace fsplat::io

#endif
