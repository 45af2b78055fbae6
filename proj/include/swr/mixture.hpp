#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "swr/audio.hpp"
#include "swr/errors.hpp"
#include "swr/random.hpp"

namespace swr {

struct MixtureParams {
    // Background level relative to speech after RMS matching.
    Decibels background_gain{6.0};
};

struct ScaledComponents {
    AudioBuffer speech;
    AudioBuffer background;
};

// Speech keeps its level; the background is brought to the speech RMS and
// then raised by the configured gain.
inline ScaledComponents level_match(const AudioBuffer& speech, const AudioBuffer& background, const MixtureParams& params = {}) {
    if (speech.sample_rate != background.sample_rate) {
        throw ValidationError("speech and background sample rates differ (" + std::to_string(speech.sample_rate) + " vs " +
                              std::to_string(background.sample_rate) + ")");
    }
    if (speech.empty() || peak(speech.samples) == 0.0) {
        throw DomainError("speech signal is silent");
    }
    if (background.empty() || peak(background.samples) == 0.0) {
        throw DomainError("background signal is silent");
    }
    const double reference = rms_linear(speech.samples);
    const double gain = reference / rms_linear(background.samples) * db_to_gain(params.background_gain);
    return {speech, scaled(background, gain)};
}

// Level-matched sum, zero-padded to the longer input and peak-normalised.
inline AudioBuffer build_mixture(const AudioBuffer& speech, const AudioBuffer& background, const MixtureParams& params = {}) {
    const ScaledComponents c = level_match(speech, background, params);
    AudioBuffer sum = zeros(std::max(c.speech.size(), c.background.size()), speech.sample_rate);
    for (std::size_t i = 0; i < c.speech.size(); ++i) {
        sum.samples[i] += c.speech.samples[i];
    }
    for (std::size_t i = 0; i < c.background.size(); ++i) {
        sum.samples[i] += c.background.samples[i];
    }
    return peak_normalize(sum);
}

inline AudioBuffer pad_or_trim(const AudioBuffer& buffer, double target_sec) {
    if (!(target_sec > 0.0)) {
        throw DomainError("target duration must be positive");
    }
    AudioBuffer out = buffer;
    out.samples.resize(seconds_to_index(target_sec, buffer.sample_rate), 0.0);
    return out;
}

// Dataset selection helpers over user-supplied file lists.

struct LabeledClip {
    std::string path;
    std::vector<std::string> labels;
};

// Keeps clips carrying exactly one label from `classes` and draws the same
// number per class (the size of the rarest class), seeded.
inline std::vector<LabeledClip> select_balanced_single_label(const std::vector<LabeledClip>& clips,
                                                             const std::vector<std::string>& classes, std::uint64_t seed) {
    std::map<std::string, std::vector<LabeledClip>> by_class;
    for (const auto& c : classes) {
        by_class[c];
    }
    for (const LabeledClip& clip : clips) {
        if (clip.labels.size() == 1 && by_class.count(clip.labels.front()) > 0) {
            by_class[clip.labels.front()].push_back(clip);
        }
    }
    std::size_t per_class = SIZE_MAX;
    for (const auto& [name, members] : by_class) {
        per_class = std::min(per_class, members.size());
    }
    std::vector<LabeledClip> out;
    if (by_class.empty()) {
        return out;
    }
    Rng rng(seed);
    for (const auto& c : classes) {
        auto members = by_class[c];
        for (std::size_t i = members.size(); i > 1; --i) {
            std::swap(members[i - 1], members[rng.index(i)]);
        }
        out.insert(out.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(per_class));
    }
    return out;
}

struct TimedClip {
    std::string path;
    double duration = 0.0;
};

// Shuffles, then keeps the `count` clips whose duration is closest to the
// target (the shuffle decides among equal distances).
inline std::vector<TimedClip> select_closest_duration(std::vector<TimedClip> clips, double target, std::size_t count,
                                                      std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t i = clips.size(); i > 1; --i) {
        std::swap(clips[i - 1], clips[rng.index(i)]);
    }
    std::stable_sort(clips.begin(), clips.end(), [target](const TimedClip& a, const TimedClip& b) {
        return std::abs(a.duration - target) < std::abs(b.duration - target);
    });
    clips.resize(std::min(count, clips.size()));
    return clips;
}

}  // namespace swr
