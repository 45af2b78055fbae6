// Scrambles a synthetic "voice" (a gliding harmonic tone broken into
// syllables) and writes before/after WAVs plus the cut points.
//
//   swr_demo [out_dir]

#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>

#include "swr/swr.hpp"

int main(int argc, char** argv) {
    const std::filesystem::path dir = argc > 1 ? argv[1] : ".";
    const int rate = 16000;
    swr::AudioBuffer voice = swr::zeros(4 * rate, rate);
    double phase = 0.0;
    for (std::size_t i = 0; i < voice.size(); ++i) {
        const double t = static_cast<double>(i) / rate;
        const double f0 = 140.0 + 40.0 * std::sin(2.0 * std::numbers::pi * 0.7 * t);
        phase += 2.0 * std::numbers::pi * f0 / rate;
        const double syllable = std::pow(std::sin(std::numbers::pi * 3.3 * t), 2.0);
        double v = 0.0;
        for (int h = 1; h <= 5; ++h) {
            v += std::sin(h * phase) / h;
        }
        voice.samples[i] = 0.4 * syllable * v;
    }

    swr::PipelineConfig config;
    config.scramble.seed = 2024;
    config.scramble.reorder = true;
    const swr::EnforceReport report = swr::enforce_detailed(voice, config);

    const std::size_t frame = swr::seconds_to_index(config.scramble.texture_frame_sec, rate);
    for (std::size_t begin = 0; begin < voice.size(); begin += frame) {
        const auto seg = swr::fragment(voice.view().subspan(begin, std::min(frame, voice.size() - begin)), rate);
        std::cout << "frame at " << static_cast<double>(begin) / rate << " s: " << seg.segment_count() << " segments, cuts";
        for (std::size_t c : seg.cut_points) {
            std::cout << ' ' << begin + c;
        }
        std::cout << '\n';
    }

    swr::write_wav(voice, dir / "demo_original.wav", swr::SampleFormat::float32);
    swr::write_wav(report.audio, dir / "demo_scrambled.wav", swr::SampleFormat::float32);
    std::cout << "wrote " << (dir / "demo_original.wav").string() << " and " << (dir / "demo_scrambled.wav").string() << '\n';
}
