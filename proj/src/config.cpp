#include "fsplat/io/config.hpp"

#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "fsplat/fixtures.hpp"

namespace fsplat::io {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int64_t parse_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const int64_t out = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (...) {
        throw std::invalid_argument("config: bad integer for '" + key + "': " + v);
    }
}

uint64_t parse_uint(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const uint64_t out = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (...) {
        throw std::invalid_argument("config: bad unsigned integer for '" + key + "': " + v);
    }
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (...) {
        throw std::invalid_argument("config: bad number for '" + key + "': " + v);
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw std::invalid_argument("config: bad bool for '" + key + "' (true/false): " + v);
}

RegularizerMode parse_mode(const std::string& key, const std::string& v) {
    if (v == "off") return RegularizerMode::Off;
    if (v == "naive") return RegularizerMode::Naive;
    if (v == "annealed") return RegularizerMode::Annealed;
    throw std::invalid_argument("config: bad mode for '" + key +
                                "' (off/naive/annealed): " + v);
}

std::string mode_name(RegularizerMode m) {
    switch (m) {
        case RegularizerMode::Off: return "off";
        case RegularizerMode::Naive: return "naive";
        default: return "annealed";
    }
}

// One table drives parsing and canonical serialization, so the two can never
// drift apart.
struct KeyHandler {
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

using HandlerMap = std::map<std::string, KeyHandler>;

const HandlerMap& handlers() {
    static const HandlerMap map = [] {
        HandlerMap m;
        auto str = [&m](const std::string& key, std::string RunConfig::* field) {
            m[key] = {[field](RunConfig& c, const std::string&, const std::string& v) {
                          c.*field = v;
                      },
                      [field](const RunConfig& c) { return c.*field; }};
        };
        auto i64 = [&m](const std::string& key, auto field) {
            m[key] = {[field](RunConfig& c, const std::string& k, const std::string& v) {
                          c.*field = parse_int(k, v);
                      },
                      [field](const RunConfig& c) { return std::to_string(c.*field); }};
        };
        auto ti64 = [&m](const std::string& key, auto field) {
            m[key] = {[field](RunConfig& c, const std::string& k, const std::string& v) {
                          c.train.*field = parse_int(k, v);
                      },
                      [field](const RunConfig& c) { return std::to_string(c.train.*field); }};
        };
        auto tdbl = [&m](const std::string& key, auto field) {
            m[key] = {[field](RunConfig& c, const std::string& k, const std::string& v) {
                          c.train.*field = parse_double(k, v);
                      },
                      [field](const RunConfig& c) { return format_double(c.train.*field); }};
        };
        auto lrdbl = [&m](const std::string& key, auto field) {
            m[key] = {[field](RunConfig& c, const std::string& k, const std::string& v) {
                          c.train.lr.*field = parse_double(k, v);
                      },
                      [field](const RunConfig& c) { return format_double(c.train.lr.*field); }};
        };
        auto ddbl = [&m](const std::string& key, auto field) {
            m[key] = {[field](RunConfig& c, const std::string& k, const std::string& v) {
                          c.train.densify.*field = parse_double(k, v);
                      },
                      [field](const RunConfig& c) {
                          return format_double(c.train.densify.*field);
                      }};
        };

        str("input", &RunConfig::input);
        str("fixture", &RunConfig::fixture);
        i64("fixture_size", &RunConfig::fixture_size);
        m["fixture_channels"] = {
            [](RunConfig& c, const std::string& k, const std::string& v) {
                c.fixture_channels = static_cast<int>(parse_int(k, v));
            },
            [](const RunConfig& c) { return std::to_string(c.fixture_channels); }};
        m["fixture_seed"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                                 c.fixture_seed = parse_uint(k, v);
                             },
                             [](const RunConfig& c) { return std::to_string(c.fixture_seed); }};
        str("out_dir", &RunConfig::out_dir);
        i64("snapshot_interval", &RunConfig::snapshot_interval);
        m["export_spectra"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                                   c.export_spectra = parse_bool(k, v);
                               },
                               [](const RunConfig& c) {
                                   return c.export_spectra ? "true" : "false";
                               }};
        m["region_diagnostics"] = {
            [](RunConfig& c, const std::string& k, const std::string& v) {
                c.region_diagnostics = parse_bool(k, v);
            },
            [](const RunConfig& c) { return c.region_diagnostics ? "true" : "false"; }};

        ti64("total_iters", &TrainConfig::total_iters);
        ti64("densify_end", &TrainConfig::densify_end);
        ti64("warmup_iters", &TrainConfig::warmup_iters);
        m["warmup_scale"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                                 c.train.warmup_scale =
                                     static_cast<int>(parse_int(k, v));
                             },
                             [](const RunConfig& c) {
                                 return std::to_string(c.train.warmup_scale);
                             }};
        m["freq_mode"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                              c.train.freq_mode = parse_mode(k, v);
                          },
                          [](const RunConfig& c) { return mode_name(c.train.freq_mode); }};
        tdbl("freq_w_low", &TrainConfig::freq_w_low);
        tdbl("freq_w_high", &TrainConfig::freq_w_high);
        ti64("freq_t0", &TrainConfig::freq_t0);
        ti64("freq_t_end", &TrainConfig::freq_t_end);
        tdbl("freq_d0_ratio", &TrainConfig::freq_d0_ratio);
        tdbl("lambda_dssim", &TrainConfig::lambda_dssim);

        lrdbl("lr_pos", &LearningRates::pos);
        lrdbl("lr_pos_decay_target", &LearningRates::pos_decay_target);
        lrdbl("lr_log_scale", &LearningRates::log_scale);
        lrdbl("lr_rotation", &LearningRates::rotation);
        lrdbl("lr_opacity", &LearningRates::opacity);
        lrdbl("lr_color", &LearningRates::color);
        lrdbl("lr_depth", &LearningRates::depth);

        ddbl("tau_pos", &DensifyParams::tau_pos);
        tdbl("tau_multiplier", &TrainConfig::tau_multiplier);
        ddbl("sigma_split_frac", &DensifyParams::sigma_split_frac);
        ddbl("split_factor", &DensifyParams::split_factor);
        ddbl("clone_offset_sigma", &DensifyParams::clone_offset_sigma);
        ddbl("epsilon_opacity", &DensifyParams::epsilon_opacity);
        ti64("densify_interval", &TrainConfig::densify_interval);
        ti64("densify_start", &TrainConfig::densify_start);

        m["init_count"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                               c.train.init_count = static_cast<int>(parse_int(k, v));
                           },
                           [](const RunConfig& c) {
                               return std::to_string(c.train.init_count);
                           }};
        // `threads` is deliberately not a config key: it is a CLI execution
        // knob that must never influence results, hashes, or checkpoints.
        m["seed"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                         c.train.seed = parse_uint(k, v);
                     },
                     [](const RunConfig& c) { return std::to_string(c.train.seed); }};
        ti64("metrics_interval", &TrainConfig::metrics_interval);

        str("ablate_seeds", &RunConfig::ablate_seeds);
        m["match_attempts"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                                   c.match_attempts = static_cast<int>(parse_int(k, v));
                               },
                               [](const RunConfig& c) {
                                   return std::to_string(c.match_attempts);
                               }};
        m["match_tolerance"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                                    c.match_tolerance = parse_double(k, v);
                                },
                                [](const RunConfig& c) {
                                    return format_double(c.match_tolerance);
                                }};
        return m;
    }();
    return map;
}

}  // namespace

void RunConfig::validate() const {
    if (input.empty() == fixture.empty())
        throw std::invalid_argument(
            "config: exactly one of 'input' and 'fixture' must be set");
    if (!fixture.empty()) {
        bool known = false;
        for (const auto& n : fixture_names()) known |= n == fixture;
        if (!known) throw std::invalid_argument("config: unknown fixture '" + fixture + "'");
        if (fixture_size < 32)
            throw std::invalid_argument("config: fixture_size must be >= 32");
        if (fixture_channels != 1 && fixture_channels != 3)
            throw std::invalid_argument("config: fixture_channels must be 1 or 3");
    }
    if (snapshot_interval < 0)
        throw std::invalid_argument("config: snapshot_interval must be >= 0");
    if (match_attempts < 1 || match_tolerance <= 0.0)
        throw std::invalid_argument("config: bad ablation matching parameters");
}

RunConfig parse_config(const std::string& text) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::map<std::string, bool> seen;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = handlers().find(key);
        if (it == handlers().end())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": unknown key '" + key + "'");
        if (seen[key])
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": duplicate key '" + key + "'");
        seen[key] = true;
        it->second.set(config, key, value);
    }
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open config");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& config) {
    std::ostringstream out;
    for (const auto& [key, handler] : handlers())
        out << key << " = " << handler.get(config) << "\n";
    return out.str();
}

std::string config_hash(const RunConfig& config) {
    const std::string text = serialize_config(config);
    uint64_t h = 0xcbf29ce484222325ull;
    for (const unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

}  // namespace fsplat::io
