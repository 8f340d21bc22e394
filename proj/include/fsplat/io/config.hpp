#ifndef FSPLAT_IO_CONFIG_HPP
#define FSPLAT_IO_CONFIG_HPP

#include <cstdint>
#include <string>

#include "fsplat/trainer.hpp"

namespace fsplat::io {

/// Flat `key = value` run configuration. `#` starts a comment, unknown keys
/// are rejected, and serialize() emits a canonical form: parse(serialize(x))
/// reproduces x and serialize is a fixed point over parse.
struct RunConfig {
    // Data source: either an input image path or a named fixture.
    std::string input;               // image path; empty when a fixture is used
    std::string fixture;             // checker-grass | stripes-multiscale | textured-patch
    int64_t fixture_size = 256;
    int fixture_channels = 3;        // 1 = gray variant of the same pattern
    uint64_t fixture_seed = 0;       // 0 -> follow `seed`

    std::string out_dir = "runs";
    int64_t snapshot_interval = 0;   // 0 -> only the final snapshot
    bool export_spectra = false;
    bool region_diagnostics = false;

    TrainConfig train;

    // Ablation settings (used by the `ablate` subcommand).
    std::string ablate_seeds = "1,2,3,4,5";
    int match_attempts = 4;
    double match_tolerance = 0.05;

    void validate() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

/// FNV-1a hash of the canonical serialization, as 16 hex chars. Run output
/// directories are keyed by it.
std::string config_hash(const RunConfig& config);

}  // namespace fsplat::io

#endif
