#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <utility>

#include "swr/audio.hpp"
#include "swr/errors.hpp"
#include "swr/wav.hpp"

namespace swr {

// Speech stem and its complement, both aligned with the mixture.
struct StemPair {
    AudioBuffer speech;
    AudioBuffer residual;
};

struct LoadedStems {
    StemPair stems;
    // max |speech + residual - mixture|
    double reconstruction_error = 0.0;
    bool reconstruction_warning = false;
};

inline constexpr double kReconstructionTolerance = 0.05;

inline StemPair identity_stems(const AudioBuffer& mixture) {
    return {mixture, zeros(mixture.size(), mixture.sample_rate)};
}

inline AudioBuffer remix(const AudioBuffer& processed_speech, const AudioBuffer& residual) {
    if (processed_speech.size() != residual.size()) {
        throw DomainError("remix: stem lengths differ (" + std::to_string(processed_speech.size()) + " vs " +
                          std::to_string(residual.size()) + ")");
    }
    if (processed_speech.sample_rate != residual.sample_rate) {
        throw DomainError("remix: sample rates differ");
    }
    AudioBuffer out = processed_speech;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.samples[i] += residual.samples[i];
    }
    return out;
}

namespace separation_detail {

inline AudioBuffer conform(AudioBuffer stem, const AudioBuffer& mixture, const char* name) {
    if (stem.sample_rate != mixture.sample_rate) {
        throw ValidationError(std::string(name) + " stem sample rate " + std::to_string(stem.sample_rate) +
                              " does not match mixture rate " + std::to_string(mixture.sample_rate));
    }
    const auto n = static_cast<long long>(stem.size());
    const auto m = static_cast<long long>(mixture.size());
    if (std::abs(n - m) > 1) {
        throw ValidationError(std::string(name) + " stem length " + std::to_string(n) + " differs from mixture length " +
                              std::to_string(m) + " by more than one sample");
    }
    stem.samples.resize(mixture.size(), 0.0);
    return stem;
}

}  // namespace separation_detail

// Aligns separator output with the mixture: stems may be one sample longer or
// shorter (trimmed or zero-padded). Non-additive stems are accepted with a
// warning flag.
inline LoadedStems make_stems(const AudioBuffer& mixture, AudioBuffer speech, AudioBuffer residual) {
    LoadedStems out;
    out.stems.speech = separation_detail::conform(std::move(speech), mixture, "speech");
    out.stems.residual = separation_detail::conform(std::move(residual), mixture, "residual");
    for (std::size_t i = 0; i < mixture.size(); ++i) {
        const double d = std::abs(out.stems.speech.samples[i] + out.stems.residual.samples[i] - mixture.samples[i]);
        out.reconstruction_error = std::max(out.reconstruction_error, d);
    }
    out.reconstruction_warning = out.reconstruction_error > kReconstructionTolerance;
    return out;
}

inline LoadedStems load_stems(const AudioBuffer& mixture, const std::filesystem::path& speech_path,
                              const std::filesystem::path& residual_path) {
    return make_stems(mixture, read_wav(speech_path), read_wav(residual_path));
}

// `<clip>.speech.wav` and `<clip>.residual.wav` next to `<clip>.wav`.
inline std::pair<std::filesystem::path, std::filesystem::path> default_stem_paths(const std::filesystem::path& input) {
    auto base = input;
    base.replace_extension();
    return {base.string() + ".speech.wav", base.string() + ".residual.wav"};
}

}  // namespace swr
