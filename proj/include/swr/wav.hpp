#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "swr/audio.hpp"
#include "swr/errors.hpp"

namespace swr {

enum class SampleFormat { int16, float32 };

struct WriteReport {
    // Samples outside [-1, 1] that were clipped to full scale (int16 only).
    std::size_t clipped_samples = 0;
};

namespace wav_detail {

inline constexpr std::uint16_t kFormatPcm = 1;
inline constexpr std::uint16_t kFormatFloat = 3;
inline constexpr std::uint16_t kFormatExtensible = 0xFFFE;

inline std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xFF));
    out.push_back(static_cast<unsigned char>(v >> 8));
}

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) {
        out.push_back(static_cast<unsigned char>((v >> shift) & 0xFF));
    }
}

inline void put_tag(std::vector<unsigned char>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

struct FmtChunk {
    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits = 0;
};

}  // namespace wav_detail

// Decodes a RIFF/WAVE byte image. Multi-channel audio is averaged to mono.
inline AudioBuffer decode_wav(const std::vector<unsigned char>& bytes) {
    using namespace wav_detail;
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw FormatError("not a RIFF/WAVE file");
    }
    FmtChunk fmt;
    bool have_fmt = false;
    const unsigned char* data = nullptr;
    std::size_t data_size = 0;
    bool have_data = false;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* header = bytes.data() + pos;
        const std::uint32_t size = read_u32(header + 4);
        const std::size_t body = pos + 8;
        if (std::memcmp(header, "fmt ", 4) == 0) {
            if (size < 16 || body + size > bytes.size()) {
                throw IoError("truncated fmt chunk");
            }
            const unsigned char* f = bytes.data() + body;
            fmt.format = read_u16(f);
            fmt.channels = read_u16(f + 2);
            fmt.sample_rate = read_u32(f + 4);
            fmt.bits = read_u16(f + 14);
            if (fmt.format == kFormatExtensible) {
                if (size < 40) {
                    throw FormatError("WAVE_FORMAT_EXTENSIBLE fmt chunk too short");
                }
                fmt.format = read_u16(f + 24);
            }
            have_fmt = true;
        } else if (std::memcmp(header, "data", 4) == 0) {
            if (body + size > bytes.size()) {
                throw IoError("truncated data chunk: header declares " + std::to_string(size) + " bytes, " +
                              std::to_string(bytes.size() - body) + " present");
            }
            data = bytes.data() + body;
            data_size = size;
            have_data = true;
            break;
        }
        pos = body + size + (size & 1u);
    }
    if (!have_fmt) {
        throw FormatError("missing fmt chunk");
    }
    if (!have_data) {
        throw IoError("missing data chunk");
    }
    const bool pcm16 = fmt.format == kFormatPcm && fmt.bits == 16;
    const bool float32 = fmt.format == kFormatFloat && fmt.bits == 32;
    if (!pcm16 && !float32) {
        throw FormatError("unsupported WAV encoding (format tag " + std::to_string(fmt.format) + ", " +
                          std::to_string(fmt.bits) + " bits); expected 16-bit PCM or 32-bit float");
    }
    if (fmt.channels == 0 || fmt.sample_rate == 0) {
        throw FormatError("WAV header declares zero channels or zero sample rate");
    }

    const std::size_t bytes_per_sample = fmt.bits / 8;
    const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
    const std::size_t frames = data_size / frame_bytes;
    AudioBuffer out{std::vector<double>(frames, 0.0), static_cast<int>(fmt.sample_rate)};
    for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < fmt.channels; ++c) {
            const unsigned char* p = data + i * frame_bytes + c * bytes_per_sample;
            if (pcm16) {
                acc += static_cast<std::int16_t>(read_u16(p)) / 32768.0;
            } else {
                acc += std::bit_cast<float>(read_u32(p));
            }
        }
        out.samples[i] = fmt.channels == 1 ? acc : acc / fmt.channels;
    }
    validate(out);
    return out;
}

inline std::vector<unsigned char> encode_wav(const AudioBuffer& buffer, SampleFormat format, WriteReport* report = nullptr) {
    using namespace wav_detail;
    validate(buffer);
    const std::uint16_t bits = format == SampleFormat::int16 ? 16 : 32;
    const std::size_t data_bytes = buffer.size() * (bits / 8);
    if (data_bytes > 0xFFFFFFFFull - 44) {
        throw DomainError("buffer too large for a RIFF file");
    }
    std::vector<unsigned char> out;
    out.reserve(44 + data_bytes);
    put_tag(out, "RIFF");
    put_u32(out, static_cast<std::uint32_t>(36 + data_bytes));
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put_u32(out, 16);
    put_u16(out, format == SampleFormat::int16 ? kFormatPcm : kFormatFloat);
    put_u16(out, 1);
    put_u32(out, static_cast<std::uint32_t>(buffer.sample_rate));
    put_u32(out, static_cast<std::uint32_t>(buffer.sample_rate) * (bits / 8));
    put_u16(out, bits / 8);
    put_u16(out, bits);
    put_tag(out, "data");
    put_u32(out, static_cast<std::uint32_t>(data_bytes));

    WriteReport local;
    for (double s : buffer.samples) {
        if (format == SampleFormat::int16) {
            if (s > 1.0 || s < -1.0) {
                ++local.clipped_samples;
            }
            const double q = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
            put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
        } else {
            put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
        }
    }
    if (report != nullptr) {
        *report = local;
    }
    return out;
}

inline AudioBuffer read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 12) {
        throw IoError("truncated WAV file " + path.string());
    }
    return decode_wav(bytes);
}

// Writes through a temporary sibling and renames, so a failed write never
// leaves a partial file at `path`.
inline WriteReport write_wav(const AudioBuffer& buffer, const std::filesystem::path& path,
                             SampleFormat format = SampleFormat::float32) {
    WriteReport report;
    const auto bytes = encode_wav(buffer, format, &report);
    auto tmp = path;
    tmp += ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write " + path.string());
        }
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("write failed for " + path.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into place at " + path.string());
    }
    return report;
}

}  // namespace swr
