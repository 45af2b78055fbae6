#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "swr/audio.hpp"
#include "swr/errors.hpp"

namespace swr {

struct FragmentationParams {
    double rms_window_sec = 0.025;
    double rms_hop_sec = 0.010;
    // A window is low-energy when its RMS is at least this far below the
    // loudest window of the same texture frame.
    Decibels threshold{6.0};
    double min_segment_sec = 0.05;
};

// Short-time RMS levels. Window k covers [k*hop, k*hop + window), or the
// whole signal when it is shorter than one window.
struct RmsProfile {
    std::vector<Decibels> frame_rms;
    std::size_t window_length = 0;
    std::size_t hop_length = 0;
    std::size_t signal_length = 0;

    std::size_t size() const { return frame_rms.size(); }

    IndexRange window(std::size_t k) const {
        const std::size_t begin = k * hop_length;
        return {begin, std::min(begin + window_length, signal_length)};
    }

    std::size_t window_center(std::size_t k) const {
        const IndexRange w = window(k);
        return w.begin + w.length() / 2;
    }
};

// Contiguous low-energy span hosting one cut point.
struct Roi {
    std::size_t start = 0;
    std::size_t end = 0;
    std::size_t first_window = 0;
    std::size_t last_window = 0;

    bool operator==(const Roi&) const = default;
};

// Strictly increasing interior cut points; segments are [0,c1), [c1,c2), ..., [ck,N).
struct Segmentation {
    std::vector<std::size_t> cut_points;
    std::size_t frame_length = 0;

    std::size_t segment_count() const { return cut_points.size() + 1; }

    std::vector<IndexRange> segments() const {
        std::vector<IndexRange> out;
        out.reserve(segment_count());
        std::size_t begin = 0;
        for (std::size_t c : cut_points) {
            out.push_back({begin, c});
            begin = c;
        }
        out.push_back({begin, frame_length});
        return out;
    }

    bool is_consistent() const {
        std::size_t previous = 0;
        for (std::size_t c : cut_points) {
            if (c <= previous || c >= frame_length) {
                return false;
            }
            previous = c;
        }
        return true;
    }
};

inline RmsProfile compute_rms_profile(std::span<const double> frame, std::size_t window_length, std::size_t hop_length) {
    if (frame.empty()) {
        throw DomainError("rms profile of an empty frame");
    }
    if (hop_length < 1 || window_length < hop_length) {
        throw DomainError("rms profile requires window_length >= hop_length >= 1");
    }
    RmsProfile profile;
    profile.window_length = window_length;
    profile.hop_length = hop_length;
    profile.signal_length = frame.size();
    if (frame.size() < window_length) {
        profile.window_length = frame.size();
        profile.frame_rms.push_back(rms(frame));
        return profile;
    }
    const std::size_t count = (frame.size() - window_length) / hop_length + 1;
    profile.frame_rms.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        profile.frame_rms.push_back(rms(frame.subspan(k * hop_length, window_length)));
    }
    return profile;
}

// Maximal runs of windows at least `threshold` below the profile maximum.
inline std::vector<Roi> find_rois(const RmsProfile& profile, Decibels threshold) {
    if (profile.frame_rms.empty()) {
        throw DomainError("find_rois on an empty profile");
    }
    const Decibels loudest = *std::max_element(profile.frame_rms.begin(), profile.frame_rms.end());
    const double limit = loudest.value - threshold.value;
    std::vector<Roi> rois;
    const std::size_t n = profile.size();
    for (std::size_t k = 0; k < n;) {
        if (profile.frame_rms[k].value > limit) {
            ++k;
            continue;
        }
        std::size_t last = k;
        while (last + 1 < n && profile.frame_rms[last + 1].value <= limit) {
            ++last;
        }
        rois.push_back({profile.window(k).begin, profile.window(last).end, k, last});
        k = last + 1;
    }
    return rois;
}

namespace fragmentation_detail {

// Removes cut points until every segment reaches `min_length` or a single
// segment remains. The shortest offending segment goes first and joins its
// shorter neighbour (the preceding one on ties).
inline void merge_short_segments(Segmentation& seg, std::size_t min_length) {
    while (!seg.cut_points.empty()) {
        const auto segments = seg.segments();
        std::size_t shortest = segments.size();
        for (std::size_t i = 0; i < segments.size(); ++i) {
            if (segments[i].length() < min_length &&
                (shortest == segments.size() || segments[i].length() < segments[shortest].length())) {
                shortest = i;
            }
        }
        if (shortest == segments.size()) {
            return;
        }
        bool merge_left;
        if (shortest == 0) {
            merge_left = false;
        } else if (shortest + 1 == segments.size()) {
            merge_left = true;
        } else {
            merge_left = segments[shortest - 1].length() <= segments[shortest + 1].length();
        }
        const std::size_t cut_index = merge_left ? shortest - 1 : shortest;
        seg.cut_points.erase(seg.cut_points.begin() + static_cast<std::ptrdiff_t>(cut_index));
    }
}

}  // namespace fragmentation_detail

// Cuts the frame once per low-energy region, at the zero crossing nearest to
// the centre of the region's quietest analysis window.
inline Segmentation fragment(std::span<const double> frame, int sample_rate, const FragmentationParams& params = {}) {
    Segmentation seg;
    seg.frame_length = frame.size();
    if (frame.empty()) {
        return seg;
    }
    const std::size_t window = samples_for(params.rms_window_sec, sample_rate);
    const std::size_t hop = std::min(samples_for(params.rms_hop_sec, sample_rate), window);
    const RmsProfile profile = compute_rms_profile(frame, window, hop);

    for (const Roi& roi : find_rois(profile, params.threshold)) {
        std::size_t quietest = roi.first_window;
        for (std::size_t k = roi.first_window + 1; k <= roi.last_window; ++k) {
            if (profile.frame_rms[k] < profile.frame_rms[quietest]) {
                quietest = k;
            }
        }
        const std::size_t target = profile.window_center(quietest);
        const std::size_t cut = nearest_zero_crossing(frame, target, {roi.start, roi.end});
        if (cut > 0 && cut < frame.size()) {
            seg.cut_points.push_back(cut);
        }
    }
    std::sort(seg.cut_points.begin(), seg.cut_points.end());
    seg.cut_points.erase(std::unique(seg.cut_points.begin(), seg.cut_points.end()), seg.cut_points.end());
    fragmentation_detail::merge_short_segments(seg, samples_for(params.min_segment_sec, sample_rate));
    return seg;
}

inline Segmentation fragment(const AudioBuffer& frame, const FragmentationParams& params = {}) {
    return fragment(frame.view(), frame.sample_rate, params);
}

}  // namespace swr
