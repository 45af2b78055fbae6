#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swr/csv.hpp"
#include "swr/errors.hpp"
#include "swr/pipeline.hpp"
#include "swr/wav.hpp"

namespace swr::config {

// Flat `section.key` -> raw value.
using KeyValues = std::map<std::string, std::string>;

struct KeySpec {
    std::string_view key;
    std::string_view default_value;
    std::string_view help;
};

// Every recognised setting. `scramble.seed` has no default: an unset seed is
// drawn from system entropy by the caller and logged.
inline const std::vector<KeySpec>& known_keys() {
    static const std::vector<KeySpec> keys = {
        {"vad.mode", "always", "always | external | energy"},
        {"vad.threshold", "0.3", "speech probability threshold"},
        {"vad.merge_gap", "0.1", "seconds; active windows closer than this are merged"},
        {"vad.padding", "0.1", "seconds added on both sides of every region"},
        {"separation.mode", "identity", "identity | external"},
        {"scramble.reverse", "true", "reverse samples within each segment"},
        {"scramble.reorder", "false", "shuffle segments within each texture frame"},
        {"scramble.seed", "", "64-bit seed for reordering and noise"},
        {"scramble.texture_frame", "2.0", "seconds"},
        {"scramble.overlap", "0.05", "crossfade fraction of the shorter segment"},
        {"fragmentation.rms_window", "0.025", "seconds"},
        {"fragmentation.rms_hop", "0.010", "seconds"},
        {"fragmentation.threshold_db", "6.0", "dB below the loudest window"},
        {"fragmentation.min_segment", "0.05", "seconds"},
        {"pipeline.crossfade", "0.01", "seconds; equal-power join at region edges"},
        {"pipeline.baseline", "none", "none | white_noise | reorder_only"},
        {"output.format", "float32", "int16 | float32"},
    };
    return keys;
}

inline bool is_known(std::string_view key) {
    const auto& keys = known_keys();
    return std::any_of(keys.begin(), keys.end(), [&](const KeySpec& k) { return k.key == key; });
}

inline KeyValues defaults() {
    KeyValues out;
    for (const KeySpec& k : known_keys()) {
        if (!k.default_value.empty()) {
            out.emplace(k.key, k.default_value);
        }
    }
    return out;
}

// TOML-like document: `[section]` headers, `key = value` lines, `#` comments,
// optional double quotes around values. Keys outside a section must already
// be dotted.
inline KeyValues parse(std::istream& in) {
    KeyValues out;
    std::string section;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = "config line " + std::to_string(line_no);
        bool in_quotes = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') {
                in_quotes = !in_quotes;
            } else if (line[i] == '#' && !in_quotes) {
                line.erase(i);
                break;
            }
        }
        const std::string t = csv::trim(line);
        if (t.empty()) {
            continue;
        }
        if (t.front() == '[') {
            if (t.back() != ']') {
                throw ValidationError(where + ": unterminated section header");
            }
            section = csv::trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(where + ": expected key = value");
        }
        std::string key = csv::trim(t.substr(0, eq));
        std::string value = csv::trim(t.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        if (!section.empty()) {
            key = section + "." + key;
        }
        if (!is_known(key)) {
            throw ValidationError(where + ": unknown setting '" + key + "'");
        }
        out[key] = value;
    }
    return out;
}

inline KeyValues read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config " + path.string());
    }
    return parse(in);
}

inline constexpr std::string_view kEnvPrefix = "SWR_";

// `scramble.seed` <-> `SWR_SCRAMBLE_SEED`.
inline std::string env_name(std::string_view key) {
    std::string out(kEnvPrefix);
    for (char c : key) {
        out.push_back(c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    return out;
}

inline KeyValues from_environment(const std::function<const char*(const char*)>& lookup) {
    KeyValues out;
    for (const KeySpec& k : known_keys()) {
        if (const char* v = lookup(env_name(k.key).c_str())) {
            out.emplace(k.key, v);
        }
    }
    return out;
}

// Later layers win.
inline KeyValues merge(std::initializer_list<const KeyValues*> layers) {
    KeyValues out;
    for (const KeyValues* layer : layers) {
        for (const auto& [k, v] : *layer) {
            out[k] = v;
        }
    }
    return out;
}

inline double get_double(const KeyValues& kv, const std::string& key) {
    return csv::parse_double(kv.at(key), key);
}

inline bool get_bool(const KeyValues& kv, const std::string& key) {
    std::string v = csv::trim(kv.at(key));
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no" || v == "off") {
        return false;
    }
    throw ValidationError("invalid boolean for " + key + ": '" + kv.at(key) + "'");
}

inline std::uint64_t parse_seed(const std::string& text) {
    const std::string t = csv::trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
        throw ValidationError("invalid seed '" + text + "'");
    }
    return v;
}

struct Resolved {
    PipelineConfig pipeline;
    SampleFormat format = SampleFormat::float32;
    bool seed_from_entropy = false;
};

// Turns merged settings into a pipeline configuration. Missing keys fall
// back to defaults; `entropy` supplies the seed when none is set.
inline Resolved resolve(const KeyValues& settings, const std::function<std::uint64_t()>& entropy) {
    const KeyValues base = defaults();
    const KeyValues kv = merge({&base, &settings});
    for (const auto& [k, v] : kv) {
        if (!is_known(k)) {
            throw ValidationError("unknown setting '" + k + "'");
        }
    }
    Resolved r;
    PipelineConfig& p = r.pipeline;

    const std::string vad = kv.at("vad.mode");
    if (vad == "always") {
        p.vad.mode = VadMode::always;
    } else if (vad == "external") {
        p.vad.mode = VadMode::external;
    } else if (vad == "energy") {
        p.vad.mode = VadMode::energy;
    } else {
        throw ValidationError("vad.mode must be always, external or energy; got '" + vad + "'");
    }
    p.vad.threshold = get_double(kv, "vad.threshold");
    p.vad.merge_gap = get_double(kv, "vad.merge_gap");
    p.vad.padding = get_double(kv, "vad.padding");

    const std::string sep = kv.at("separation.mode");
    if (sep == "identity") {
        p.separation = SeparationMode::identity;
    } else if (sep == "external") {
        p.separation = SeparationMode::external;
    } else {
        throw ValidationError("separation.mode must be identity or external; got '" + sep + "'");
    }

    p.scramble.reverse = get_bool(kv, "scramble.reverse");
    p.scramble.reorder = get_bool(kv, "scramble.reorder");
    p.scramble.texture_frame_sec = get_double(kv, "scramble.texture_frame");
    p.scramble.overlap_fraction = get_double(kv, "scramble.overlap");
    if (const auto it = kv.find("scramble.seed"); it != kv.end() && !csv::trim(it->second).empty()) {
        p.scramble.seed = parse_seed(it->second);
    } else {
        p.scramble.seed = entropy();
        r.seed_from_entropy = true;
    }

    p.fragmentation.rms_window_sec = get_double(kv, "fragmentation.rms_window");
    p.fragmentation.rms_hop_sec = get_double(kv, "fragmentation.rms_hop");
    p.fragmentation.threshold = Decibels{get_double(kv, "fragmentation.threshold_db")};
    p.fragmentation.min_segment_sec = get_double(kv, "fragmentation.min_segment");
    if (!(p.fragmentation.rms_window_sec > 0.0) || !(p.fragmentation.rms_hop_sec > 0.0) ||
        p.fragmentation.rms_hop_sec > p.fragmentation.rms_window_sec || !(p.fragmentation.min_segment_sec >= 0.0)) {
        throw ValidationError("fragmentation requires 0 < rms_hop <= rms_window and min_segment >= 0");
    }

    p.boundary_crossfade_sec = get_double(kv, "pipeline.crossfade");
    const std::string baseline = kv.at("pipeline.baseline");
    if (baseline == "none") {
        p.baseline = Baseline::none;
    } else if (baseline == "white_noise") {
        p.baseline = Baseline::white_noise;
    } else if (baseline == "reorder_only") {
        p.baseline = Baseline::reorder_only;
    } else {
        throw ValidationError("pipeline.baseline must be none, white_noise or reorder_only; got '" + baseline + "'");
    }

    const std::string format = kv.at("output.format");
    if (format == "int16") {
        r.format = SampleFormat::int16;
    } else if (format == "float32") {
        r.format = SampleFormat::float32;
    } else {
        throw ValidationError("output.format must be int16 or float32; got '" + format + "'");
    }

    p.scramble.validate();
    if (!(p.vad.threshold >= 0.0 && p.vad.threshold <= 1.0)) {
        throw ValidationError("vad.threshold must lie in [0, 1]");
    }
    if (!(p.boundary_crossfade_sec >= 0.0)) {
        throw ValidationError("pipeline.crossfade must be non-negative");
    }
    return r;
}

}  // namespace swr::config
