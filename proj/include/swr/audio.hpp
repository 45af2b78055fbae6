#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "swr/errors.hpp"

namespace swr {

// Level in dB relative to full scale, or a relative gain in dB.
struct Decibels {
    double value = 0.0;

    auto operator<=>(const Decibels&) const = default;
};

inline constexpr Decibels kSilenceFloor{-120.0};

// Half-open sample interval [begin, end).
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t length() const { return end - begin; }
    bool contains(std::size_t i) const { return i >= begin && i < end; }
    bool operator==(const IndexRange&) const = default;
};

// Mono signal with nominal range [-1, 1]. Values outside that range are
// legal in memory; they are clipped only when written as int16.
struct AudioBuffer {
    std::vector<double> samples;
    int sample_rate = 44100;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
    std::span<const double> view() const { return samples; }

    AudioBuffer slice(IndexRange range) const {
        return {{samples.begin() + static_cast<std::ptrdiff_t>(range.begin),
                 samples.begin() + static_cast<std::ptrdiff_t>(range.end)},
                sample_rate};
    }

    bool operator==(const AudioBuffer&) const = default;
};

inline void validate(const AudioBuffer& buffer) {
    if (buffer.sample_rate <= 0) {
        throw DomainError("sample rate must be positive, got " + std::to_string(buffer.sample_rate));
    }
    for (double s : buffer.samples) {
        if (!std::isfinite(s)) {
            throw DomainError("audio buffer contains a non-finite sample");
        }
    }
}

inline AudioBuffer zeros(std::size_t n, int sample_rate) {
    return {std::vector<double>(n, 0.0), sample_rate};
}

// Number of samples spanned by `seconds`, floored, never below one.
inline std::size_t samples_for(double seconds, int sample_rate) {
    const double n = std::floor(seconds * sample_rate + 1e-6);
    return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

inline std::size_t seconds_to_index(double seconds, int sample_rate) {
    const double n = std::round(seconds * sample_rate);
    return n <= 0.0 ? 0 : static_cast<std::size_t>(n);
}

inline double rms_linear(std::span<const double> window) {
    if (window.empty()) {
        throw DomainError("rms of an empty window");
    }
    double acc = 0.0;
    for (double s : window) {
        acc += s * s;
    }
    return std::sqrt(acc / static_cast<double>(window.size()));
}

inline Decibels amplitude_to_db(double amplitude) {
    if (amplitude <= 0.0) {
        return kSilenceFloor;
    }
    return {std::max(20.0 * std::log10(amplitude), kSilenceFloor.value)};
}

inline double db_to_gain(Decibels db) { return std::pow(10.0, db.value / 20.0); }

// RMS level of a window in dBFS, floored at -120 dBFS.
inline Decibels rms(std::span<const double> window) { return amplitude_to_db(rms_linear(window)); }

inline double peak(std::span<const double> samples) {
    double p = 0.0;
    for (double s : samples) {
        p = std::max(p, std::abs(s));
    }
    return p;
}

// Index in `range` closest to `target` where the signal crosses zero: either
// samples[i-1] and samples[i] have opposite signs, or samples[i] is exactly
// zero. Ties go to the lower index; with no crossing in range, `target` is
// returned unchanged.
inline std::size_t nearest_zero_crossing(std::span<const double> samples, std::size_t target, IndexRange range) {
    range.end = std::min(range.end, samples.size());
    auto is_crossing = [&](std::size_t i) {
        if (samples[i] == 0.0) {
            return true;
        }
        return i > 0 && ((samples[i - 1] < 0.0 && samples[i] > 0.0) || (samples[i - 1] > 0.0 && samples[i] < 0.0));
    };
    if (range.begin >= range.end || !range.contains(target)) {
        return target;
    }
    const std::size_t reach = std::max(target - range.begin, range.end - 1 - target);
    for (std::size_t d = 0; d <= reach; ++d) {
        if (d <= target - range.begin && is_crossing(target - d)) {
            return target - d;
        }
        if (d > 0 && target + d < range.end && is_crossing(target + d)) {
            return target + d;
        }
    }
    return target;
}

inline std::size_t nearest_zero_crossing(const AudioBuffer& buffer, std::size_t target, IndexRange range) {
    return nearest_zero_crossing(buffer.view(), target, range);
}

// Scales the buffer so that its largest magnitude is exactly 1.
inline AudioBuffer peak_normalize(const AudioBuffer& buffer) {
    const double p = peak(buffer.samples);
    if (p == 0.0) {
        throw DomainError("cannot peak-normalize an all-zero buffer");
    }
    AudioBuffer out = buffer;
    for (double& s : out.samples) {
        s /= p;
    }
    return out;
}

inline AudioBuffer scaled(const AudioBuffer& buffer, double gain) {
    AudioBuffer out = buffer;
    for (double& s : out.samples) {
        s *= gain;
    }
    return out;
}

}  // namespace swr
