#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swr/csv.hpp"
#include "swr/errors.hpp"

namespace swr::metrics {

inline constexpr std::size_t kClassCount = 8;
inline constexpr std::array<std::string_view, kClassCount> kSourceClasses = {
    "speech", "engine", "jackhammer", "chainsaw", "car_horn", "siren", "music", "dog"};

// Index into kSourceClasses; accepts "car horn" for "car_horn".
inline std::optional<std::size_t> class_index(std::string_view name) {
    std::string key(name);
    std::replace(key.begin(), key.end(), ' ', '_');
    for (std::size_t i = 0; i < kClassCount; ++i) {
        if (kSourceClasses[i] == key) {
            return i;
        }
    }
    return std::nullopt;
}

struct LogitRecord {
    std::string clip_id;
    std::array<double, kClassCount> scores{};
    std::vector<std::size_t> labels;  // indices into kSourceClasses
};

enum class DetectionMode {
    mixture,     // speech over background: a label must rank in the top 2
    voice_free,  // background only: the label must rank first
};

inline std::size_t detection_depth(DetectionMode mode) { return mode == DetectionMode::mixture ? 2 : 1; }

inline DetectionMode mode_for(const LogitRecord& record) {
    if (record.labels.size() == 2) {
        return DetectionMode::mixture;
    }
    if (record.labels.size() == 1) {
        return DetectionMode::voice_free;
    }
    throw ValidationError("clip " + record.clip_id + ": expected one or two labels, got " +
                          std::to_string(record.labels.size()));
}

struct LabelDetection {
    std::size_t class_index = 0;
    std::size_t rank = 0;  // 1-based
    bool detected = false;
    // Another class has exactly the same score; the rank came from the
    // lexicographic tie-break.
    bool tied = false;
};

// Class indices ordered by descending score, ties by class name.
inline std::array<std::size_t, kClassCount> rank_order(const std::array<double, kClassCount>& scores) {
    std::array<std::size_t, kClassCount> order{};
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) {
            return scores[a] > scores[b];
        }
        return kSourceClasses[a] < kSourceClasses[b];
    });
    return order;
}

inline std::vector<LabelDetection> detect_sources(const LogitRecord& record, DetectionMode mode) {
    const std::size_t expected = mode == DetectionMode::mixture ? 2 : 1;
    if (record.labels.size() != expected) {
        throw ValidationError("clip " + record.clip_id + ": " + (mode == DetectionMode::mixture ? "mixture" : "voice-free") +
                              " mode requires exactly " + std::to_string(expected) + " label(s)");
    }
    const auto order = rank_order(record.scores);
    std::vector<LabelDetection> out;
    for (std::size_t label : record.labels) {
        if (label >= kClassCount) {
            throw ValidationError("clip " + record.clip_id + ": label index out of range");
        }
        LabelDetection d;
        d.class_index = label;
        d.rank = static_cast<std::size_t>(std::find(order.begin(), order.end(), label) - order.begin()) + 1;
        d.detected = d.rank <= detection_depth(mode);
        for (std::size_t c = 0; c < kClassCount; ++c) {
            d.tied = d.tied || (c != label && record.scores[c] == record.scores[label]);
        }
        out.push_back(d);
    }
    return out;
}

struct DetectionAccuracy {
    std::size_t trials = 0;
    std::size_t detected = 0;
    std::size_t tied = 0;

    double percent() const { return trials == 0 ? 0.0 : 100.0 * static_cast<double>(detected) / static_cast<double>(trials); }
};

// Every labeled source of every clip is one trial.
inline DetectionAccuracy detection_accuracy(std::span<const LogitRecord> records) {
    DetectionAccuracy acc;
    for (const LogitRecord& r : records) {
        for (const LabelDetection& d : detect_sources(r, mode_for(r))) {
            ++acc.trials;
            acc.detected += d.detected ? 1 : 0;
            acc.tied += d.tied ? 1 : 0;
        }
    }
    return acc;
}

struct ScadReport {
    DetectionAccuracy original;
    DetectionAccuracy processed;
    double scad = 0.0;  // percentage points
};

inline ScadReport scad(std::span<const LogitRecord> original, std::span<const LogitRecord> processed) {
    std::map<std::string, const LogitRecord*> by_id;
    for (const LogitRecord& r : processed) {
        if (!by_id.emplace(r.clip_id, &r).second) {
            throw ValidationError("duplicate processed clip_id " + r.clip_id);
        }
    }
    if (by_id.size() != original.size()) {
        throw ValidationError("original and processed logits cover different clip sets");
    }
    std::vector<LogitRecord> aligned;
    aligned.reserve(original.size());
    for (const LogitRecord& r : original) {
        const auto it = by_id.find(r.clip_id);
        if (it == by_id.end()) {
            throw ValidationError("clip " + r.clip_id + " missing from processed logits");
        }
        LogitRecord p = *it->second;
        p.labels = r.labels;  // ground truth comes from the originals
        aligned.push_back(std::move(p));
    }
    ScadReport report;
    report.original = detection_accuracy(original);
    report.processed = detection_accuracy(aligned);
    report.scad = report.original.percent() - report.processed.percent();
    return report;
}

inline constexpr const char* kLogitsHeader = "clip_id,labels,speech,engine,jackhammer,chainsaw,car_horn,siren,music,dog";

inline std::vector<LogitRecord> parse_logits_csv(std::istream& in) {
    const auto rows = csv::read_rows(in);
    if (rows.empty()) {
        throw ValidationError("logits file is empty");
    }
    const auto& header = rows.front();
    bool header_ok = header.size() == 2 + kClassCount && csv::trim(header[0]) == "clip_id" && csv::trim(header[1]) == "labels";
    for (std::size_t c = 0; header_ok && c < kClassCount; ++c) {
        header_ok = csv::trim(header[2 + c]) == kSourceClasses[c];
    }
    if (!header_ok) {
        throw ValidationError(std::string("bad logits header; expected ") + kLogitsHeader);
    }
    std::vector<LogitRecord> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        const std::string where = "logits row " + std::to_string(i);
        if (row.size() != 2 + kClassCount) {
            throw ValidationError(where + ": expected " + std::to_string(2 + kClassCount) + " fields");
        }
        LogitRecord r;
        r.clip_id = csv::trim(row[0]);
        for (const auto& name : csv::split(row[1], '|')) {
            const auto idx = class_index(csv::trim(name));
            if (!idx) {
                throw ValidationError(where + ": unknown label '" + name + "'");
            }
            r.labels.push_back(*idx);
        }
        for (std::size_t c = 0; c < kClassCount; ++c) {
            r.scores[c] = csv::parse_double(row[2 + c], kSourceClasses[c]);
        }
        mode_for(r);
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<LogitRecord> read_logits_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open logits " + path.string());
    }
    return parse_logits_csv(in);
}

}  // namespace swr::metrics
