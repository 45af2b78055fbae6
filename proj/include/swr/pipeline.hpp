#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "swr/audio.hpp"
#include "swr/errors.hpp"
#include "swr/fragmentation.hpp"
#include "swr/random.hpp"
#include "swr/scramble.hpp"
#include "swr/separation.hpp"
#include "swr/vad.hpp"

namespace swr {

enum class SeparationMode { identity, external };

enum class Baseline { none, white_noise, reorder_only };

struct PipelineConfig {
    VadConfig vad;
    SeparationMode separation = SeparationMode::identity;
    std::optional<StemPair> stems;  // required for SeparationMode::external
    ScrambleParams scramble;
    FragmentationParams fragmentation;
    // Equal-power join between processed and passthrough audio.
    double boundary_crossfade_sec = 0.01;
    Baseline baseline = Baseline::none;

    void validate() const {
        scramble.validate();
        if (!(boundary_crossfade_sec >= 0.0)) {
            throw ValidationError("boundary crossfade must be non-negative");
        }
        if (!(vad.threshold >= 0.0 && vad.threshold <= 1.0)) {
            throw ValidationError("VAD threshold must lie in [0, 1]");
        }
        if (!(vad.padding >= 0.0) || !(vad.merge_gap >= 0.0)) {
            throw ValidationError("VAD padding and merge gap must be non-negative");
        }
        if (separation == SeparationMode::external && !stems && baseline == Baseline::none) {
            throw ValidationError("external separation requires speech and residual stems");
        }
    }
};

// Baseline: shuffle without reversal over the whole clip.
inline PipelineConfig reorder_only_config(PipelineConfig config) {
    config.vad.mode = VadMode::always;
    config.separation = SeparationMode::identity;
    config.stems.reset();
    config.scramble.reverse = false;
    config.scramble.reorder = true;
    config.baseline = Baseline::none;
    return config;
}

struct EnforceReport {
    AudioBuffer audio;
    ActiveRegions regions;                  // padded regions actually processed
    std::vector<IndexRange> processed;      // same, in samples
    std::vector<IndexRange> crossfades;     // processed/passthrough joins
};

// I.i.d. uniform noise in [-1, 1] rescaled to the input's RMS.
inline AudioBuffer white_noise_baseline(const AudioBuffer& buffer, std::uint64_t seed) {
    AudioBuffer out = zeros(buffer.size(), buffer.sample_rate);
    if (buffer.empty()) {
        return out;
    }
    Rng rng(seed);
    for (double& s : out.samples) {
        s = rng.symmetric();
    }
    const double target = rms_linear(buffer.samples);
    const double actual = rms_linear(out.samples);
    const double gain = actual > 0.0 ? target / actual : 0.0;
    for (double& s : out.samples) {
        s *= gain;
    }
    return out;
}

inline EnforceReport enforce_detailed(const AudioBuffer& mixture, const PipelineConfig& input_config) {
    input_config.validate();
    validate(mixture);
    EnforceReport report;
    if (input_config.baseline == Baseline::white_noise) {
        report.audio = white_noise_baseline(mixture, input_config.scramble.seed);
        if (!mixture.empty()) {
            report.regions.intervals.push_back({0.0, mixture.duration()});
            report.processed.push_back({0, mixture.size()});
        }
        return report;
    }
    const PipelineConfig config =
        input_config.baseline == Baseline::reorder_only ? reorder_only_config(input_config) : input_config;

    report.audio = mixture;
    const double duration = mixture.duration();
    report.regions = pad_regions(detect(mixture, config.vad), config.vad.padding, duration);
    if (report.regions.empty()) {
        return report;
    }

    StemPair stems;
    if (config.separation == SeparationMode::identity) {
        stems = identity_stems(mixture);
    } else {
        stems = *config.stems;
        if (stems.speech.size() != mixture.size() || stems.residual.size() != mixture.size() ||
            stems.speech.sample_rate != mixture.sample_rate || stems.residual.sample_rate != mixture.sample_rate) {
            throw ValidationError("stems are not aligned with the mixture");
        }
    }

    const int rate = mixture.sample_rate;
    const std::size_t fade = seconds_to_index(config.boundary_crossfade_sec, rate);
    for (std::size_t r = 0; r < report.regions.intervals.size(); ++r) {
        const Interval& region = report.regions.intervals[r];
        const IndexRange range{seconds_to_index(region.start, rate),
                               std::min(seconds_to_index(region.end, rate), mixture.size())};
        if (range.begin >= range.end) {
            continue;
        }
        report.processed.push_back(range);

        ScrambleParams params = config.scramble;
        params.seed = derive_seed(config.scramble.seed, r);
        const AudioBuffer processed =
            remix(scramble(stems.speech.slice(range), params, config.fragmentation), stems.residual.slice(range));

        std::copy(processed.samples.begin(), processed.samples.end(),
                  report.audio.samples.begin() + static_cast<std::ptrdiff_t>(range.begin));

        const std::size_t xf = std::min(fade, range.length() / 2);
        if (xf == 0) {
            continue;
        }
        auto angle = [xf](std::size_t i) {
            return (static_cast<double>(i) + 0.5) / static_cast<double>(xf) * (std::numbers::pi / 2.0);
        };
        if (range.begin > 0) {
            report.crossfades.push_back({range.begin, range.begin + xf});
            for (std::size_t i = 0; i < xf; ++i) {
                const std::size_t t = range.begin + i;
                report.audio.samples[t] =
                    std::cos(angle(i)) * mixture.samples[t] + std::sin(angle(i)) * processed.samples[i];
            }
        }
        if (range.end < mixture.size()) {
            report.crossfades.push_back({range.end - xf, range.end});
            for (std::size_t i = 0; i < xf; ++i) {
                const std::size_t t = range.end - xf + i;
                report.audio.samples[t] =
                    std::cos(angle(i)) * processed.samples[t - range.begin] + std::sin(angle(i)) * mixture.samples[t];
            }
        }
    }
    return report;
}

// VAD, separation, segment-wise scrambling of the speech stem and remix.
// Audio outside the (padded) speech regions passes through untouched.
inline AudioBuffer enforce(const AudioBuffer& mixture, const PipelineConfig& config) {
    return enforce_detailed(mixture, config).audio;
}

// Re-applies the pipeline to already-processed audio, as an attacker who
// knows the method would.
inline AudioBuffer attack(const AudioBuffer& processed, const PipelineConfig& config) { return enforce(processed, config); }

}  // namespace swr
