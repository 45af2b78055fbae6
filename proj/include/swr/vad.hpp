#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "swr/audio.hpp"
#include "swr/csv.hpp"
#include "swr/errors.hpp"

namespace swr {

// Time interval in seconds, [start, end).
struct Interval {
    double start = 0.0;
    double end = 0.0;

    double length() const { return end - start; }
    bool operator==(const Interval&) const = default;
};

struct TrackEntry {
    double start = 0.0;
    double end = 0.0;
    double probability = 0.0;
};

// Per-window speech probabilities emitted by an external tagger.
struct SpeechRegionTrack {
    std::vector<TrackEntry> entries;

    void validate() const {
        double previous_start = 0.0;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const TrackEntry& e = entries[i];
            const std::string where = "track row " + std::to_string(i + 1);
            if (!std::isfinite(e.start) || !std::isfinite(e.end) || e.start < 0.0 || !(e.start < e.end)) {
                throw ValidationError(where + ": requires 0 <= start < end");
            }
            if (!(e.probability >= 0.0 && e.probability <= 1.0)) {
                throw ValidationError(where + ": probability outside [0, 1]");
            }
            if (i > 0 && e.start < previous_start) {
                throw ValidationError(where + ": entries not sorted by start");
            }
            previous_start = e.start;
        }
    }
};

// Sorted, disjoint speech intervals.
struct ActiveRegions {
    std::vector<Interval> intervals;

    bool empty() const { return intervals.empty(); }

    double total_duration() const {
        double total = 0.0;
        for (const Interval& i : intervals) {
            total += i.length();
        }
        return total;
    }

    bool operator==(const ActiveRegions&) const = default;
};

// Analysis windows starting every `hop` seconds; the last ones are clamped
// to the signal end.
inline std::vector<Interval> window_schedule(double duration, double window = 0.5, double hop = 0.44) {
    if (!(hop > 0.0) || !(window > 0.0)) {
        throw DomainError("window schedule requires positive window and hop");
    }
    std::vector<Interval> out;
    for (std::size_t k = 0;; ++k) {
        const double start = static_cast<double>(k) * hop;
        if (!(start < duration)) {
            break;
        }
        out.push_back({start, std::min(start + window, duration)});
    }
    return out;
}

// Merges overlapping intervals and those separated by at most `merge_gap`.
inline ActiveRegions merge_intervals(std::vector<Interval> intervals, double merge_gap) {
    std::sort(intervals.begin(), intervals.end(), [](const Interval& a, const Interval& b) {
        return a.start < b.start || (a.start == b.start && a.end < b.end);
    });
    ActiveRegions out;
    for (const Interval& i : intervals) {
        if (!out.intervals.empty() && i.start - out.intervals.back().end <= merge_gap) {
            out.intervals.back().end = std::max(out.intervals.back().end, i.end);
        } else {
            out.intervals.push_back(i);
        }
    }
    return out;
}

inline constexpr double kDefaultMergeGap = 0.1;

inline ActiveRegions threshold_track(const SpeechRegionTrack& track, double threshold = 0.3,
                                     double merge_gap = kDefaultMergeGap) {
    track.validate();
    std::vector<Interval> active;
    for (const TrackEntry& e : track.entries) {
        if (e.probability >= threshold) {
            active.push_back({e.start, e.end});
        }
    }
    return merge_intervals(std::move(active), merge_gap);
}

inline ActiveRegions clip_regions(const ActiveRegions& regions, double duration) {
    ActiveRegions out;
    for (const Interval& i : regions.intervals) {
        const Interval c{std::max(0.0, i.start), std::min(duration, i.end)};
        if (c.start < c.end) {
            out.intervals.push_back(c);
        }
    }
    return out;
}

// Widens every region by `padding` on both sides, then re-merges and clips.
inline ActiveRegions pad_regions(const ActiveRegions& regions, double padding, double duration) {
    std::vector<Interval> widened;
    for (const Interval& i : regions.intervals) {
        widened.push_back({i.start - padding, i.end + padding});
    }
    return clip_regions(merge_intervals(std::move(widened), 0.0), duration);
}

enum class VadMode { external, always, energy };

struct VadConfig {
    VadMode mode = VadMode::always;
    double threshold = 0.3;
    double merge_gap = kDefaultMergeGap;
    // Applied by the pipeline before processing.
    double padding = 0.1;
    std::optional<SpeechRegionTrack> track;  // required in external mode
};

// Energy stand-in: windows louder than the median window by more than 6 dB.
// Not speech-specific; used for tests and model-free smoke runs.
inline ActiveRegions detect_energy(const AudioBuffer& buffer, double merge_gap = kDefaultMergeGap) {
    const auto schedule = window_schedule(buffer.duration());
    if (schedule.empty()) {
        return {};
    }
    std::vector<Decibels> levels;
    for (const Interval& w : schedule) {
        const std::size_t b = std::min(seconds_to_index(w.start, buffer.sample_rate), buffer.size() - 1);
        const std::size_t e = std::clamp(seconds_to_index(w.end, buffer.sample_rate), b + 1, buffer.size());
        levels.push_back(rms(buffer.view().subspan(b, e - b)));
    }
    std::vector<Decibels> sorted = levels;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size() / 2;
    const double median = sorted.size() % 2 == 1 ? sorted[m].value : 0.5 * (sorted[m - 1].value + sorted[m].value);
    std::vector<Interval> active;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        if (levels[k].value > median + 6.0) {
            active.push_back(schedule[k]);
        }
    }
    return merge_intervals(std::move(active), merge_gap);
}

inline ActiveRegions detect(const AudioBuffer& buffer, const VadConfig& config) {
    const double duration = buffer.duration();
    switch (config.mode) {
        case VadMode::always:
            return duration > 0.0 ? ActiveRegions{{{0.0, duration}}} : ActiveRegions{};
        case VadMode::energy:
            return clip_regions(detect_energy(buffer, config.merge_gap), duration);
        case VadMode::external:
            if (!config.track) {
                throw ValidationError("external VAD mode requires a speech-probability track");
            }
            return clip_regions(threshold_track(*config.track, config.threshold, config.merge_gap), duration);
    }
    return {};
}

inline constexpr const char* kTrackHeader = "start_sec,end_sec,probability";

inline SpeechRegionTrack parse_track_csv(std::istream& in) {
    const auto rows = csv::read_rows(in);
    if (rows.empty()) {
        throw ValidationError("track file is empty; expected header " + std::string(kTrackHeader));
    }
    const auto& h = rows.front();
    if (h.size() != 3 || csv::trim(h[0]) != "start_sec" || csv::trim(h[1]) != "end_sec" || csv::trim(h[2]) != "probability") {
        throw ValidationError("bad track header; expected " + std::string(kTrackHeader));
    }
    SpeechRegionTrack track;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 3) {
            throw ValidationError("track row " + std::to_string(i) + ": expected 3 fields");
        }
        track.entries.push_back({csv::parse_double(rows[i][0], "start_sec"), csv::parse_double(rows[i][1], "end_sec"),
                                 csv::parse_double(rows[i][2], "probability")});
    }
    track.validate();
    return track;
}

inline SpeechRegionTrack read_track_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open speech track " + path.string());
    }
    return parse_track_csv(in);
}

inline void write_track_csv(const SpeechRegionTrack& track, std::ostream& out) {
    out << kTrackHeader << '\n';
    out.precision(17);
    for (const TrackEntry& e : track.entries) {
        out << e.start << ',' << e.end << ',' << e.probability << '\n';
    }
}

}  // namespace swr
