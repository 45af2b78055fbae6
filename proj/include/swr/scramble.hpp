#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "swr/audio.hpp"
#include "swr/errors.hpp"
#include "swr/fragmentation.hpp"
#include "swr/random.hpp"

namespace swr {

struct ScrambleParams {
    double texture_frame_sec = 2.0;
    // Crossfade half-width at a boundary, as a fraction of the shorter of the
    // two segments meeting there.
    double overlap_fraction = 0.05;
    bool reverse = true;
    bool reorder = false;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(texture_frame_sec > 0.0)) {
            throw ValidationError("texture frame length must be positive");
        }
        if (!(overlap_fraction >= 0.0 && overlap_fraction < 0.5)) {
            throw ValidationError("overlap fraction must lie in [0, 0.5)");
        }
    }
};

struct Permutation {
    std::vector<std::size_t> order;

    bool operator==(const Permutation&) const = default;
};

// True when some output neighbours (p, p+1) are source neighbours (i, i+1).
inline bool reconnects_neighbours(std::span<const std::size_t> order) {
    for (std::size_t p = 0; p + 1 < order.size(); ++p) {
        if (order[p + 1] == order[p] + 1) {
            return true;
        }
    }
    return false;
}

inline std::vector<double> reverse_segment(std::span<const double> segment) {
    return {segment.rbegin(), segment.rend()};
}

inline constexpr int kMaxShuffleDraws = 10000;

// Uniform draw among permutations of n items in which no segment is directly
// followed by its original successor. Rejection sampling; after
// kMaxShuffleDraws failures the descending order (always admissible) is used.
// n == 1 has only the identity.
inline Permutation constrained_shuffle(std::size_t n, std::uint64_t seed) {
    Permutation perm;
    perm.order.resize(n);
    std::iota(perm.order.begin(), perm.order.end(), std::size_t{0});
    if (n < 2) {
        return perm;
    }
    Rng rng(seed);
    for (int draw = 0; draw < kMaxShuffleDraws; ++draw) {
        for (std::size_t i = n - 1; i > 0; --i) {
            std::swap(perm.order[i], perm.order[rng.index(i + 1)]);
        }
        if (!reconnects_neighbours(perm.order)) {
            return perm;
        }
    }
    std::iota(perm.order.rbegin(), perm.order.rend(), std::size_t{0});
    return perm;
}

// One source segment placed in the output.
struct Piece {
    IndexRange source;
    std::size_t output_begin = 0;
    bool reversed = false;

    std::size_t output_end() const { return output_begin + source.length(); }
};

// Output samples mixing two pieces.
struct CrossfadeZone {
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct ScrambleLayout {
    std::vector<Piece> pieces;  // in output order
    std::vector<CrossfadeZone> zones;
    std::vector<IndexRange> texture_frames;

    bool in_crossfade(std::size_t t) const {
        return std::any_of(zones.begin(), zones.end(), [t](const CrossfadeZone& z) { return t >= z.begin && t < z.end; });
    }
};

struct ScrambleResult {
    AudioBuffer audio;
    ScrambleLayout layout;
};

namespace scramble_detail {

// Overlap-add of pieces that tile [0, source.size()) in output order. At a
// boundary B with overlap o, each neighbour reads o extra source samples
// beyond its edge (before reversal) and the two are linearly crossfaded over
// [B - o, B + o). Extensions falling outside the source are dropped and the
// remaining piece is renormalised, so outputs never dip toward zero.
inline std::vector<double> render(std::span<const double> source, const std::vector<Piece>& pieces, double overlap_fraction,
                                  std::vector<CrossfadeZone>& zones) {
    const std::size_t n = source.size();
    std::vector<double> num(n, 0.0);
    std::vector<double> den(n, 0.0);
    std::vector<std::size_t> overlap(pieces.empty() ? 0 : pieces.size() - 1, 0);
    for (std::size_t p = 0; p + 1 < pieces.size(); ++p) {
        const std::size_t shorter = std::min(pieces[p].source.length(), pieces[p + 1].source.length());
        overlap[p] = static_cast<std::size_t>(overlap_fraction * static_cast<double>(shorter));
        if (overlap[p] > 0) {
            const std::size_t b = pieces[p].output_end();
            zones.push_back({b - overlap[p], b + overlap[p]});
        }
    }

    for (std::size_t p = 0; p < pieces.size(); ++p) {
        const Piece& piece = pieces[p];
        const auto len = static_cast<std::ptrdiff_t>(piece.source.length());
        const auto o_left = static_cast<std::ptrdiff_t>(p > 0 ? overlap[p - 1] : 0);
        const auto o_right = static_cast<std::ptrdiff_t>(p + 1 < pieces.size() ? overlap[p] : 0);
        const auto out0 = static_cast<std::ptrdiff_t>(piece.output_begin);
        const auto src_begin = static_cast<std::ptrdiff_t>(piece.source.begin);
        const auto src_last = static_cast<std::ptrdiff_t>(piece.source.end) - 1;
        for (std::ptrdiff_t u = -o_left; u < len + o_right; ++u) {
            const std::ptrdiff_t src = piece.reversed ? src_last - u : src_begin + u;
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(n)) {
                continue;
            }
            double w = 1.0;
            if (u < o_left) {
                w *= (static_cast<double>(u + o_left) + 0.5) / static_cast<double>(2 * o_left);
            }
            if (u >= len - o_right) {
                w *= (static_cast<double>(len + o_right - u) - 0.5) / static_cast<double>(2 * o_right);
            }
            const auto t = static_cast<std::size_t>(out0 + u);
            num[t] += w * source[static_cast<std::size_t>(src)];
            den[t] += w;
        }
    }
    for (std::size_t t = 0; t < n; ++t) {
        num[t] = den[t] > 0.0 ? num[t] / den[t] : 0.0;
    }
    return num;
}

// Appends the pieces of one texture frame occupying [frame.begin, frame.end).
inline void layout_frame(IndexRange frame, const Segmentation& seg, const ScrambleParams& params, std::uint64_t seed,
                         std::vector<Piece>& pieces) {
    const auto segments = seg.segments();
    Permutation perm;
    if (params.reorder) {
        perm = constrained_shuffle(segments.size(), seed);
    } else {
        perm.order.resize(segments.size());
        std::iota(perm.order.begin(), perm.order.end(), std::size_t{0});
    }
    std::size_t cursor = frame.begin;
    for (std::size_t slot : perm.order) {
        const IndexRange s = segments[slot];
        pieces.push_back({{frame.begin + s.begin, frame.begin + s.end}, cursor, params.reverse});
        cursor += s.length();
    }
}

}  // namespace scramble_detail

// Scrambles one texture frame in isolation (overlap extensions clamp at the
// frame edges).
inline AudioBuffer scramble_frame(const AudioBuffer& frame, const Segmentation& segmentation, const ScrambleParams& params) {
    params.validate();
    if (segmentation.frame_length != frame.size() || !segmentation.is_consistent()) {
        throw DomainError("segmentation does not tile the frame");
    }
    if (frame.empty()) {
        return frame;
    }
    std::vector<Piece> pieces;
    std::vector<CrossfadeZone> zones;
    scramble_detail::layout_frame({0, frame.size()}, segmentation, params, params.seed, pieces);
    return {scramble_detail::render(frame.view(), pieces, params.overlap_fraction, zones), frame.sample_rate};
}

// Splits the buffer into texture frames, fragments and scrambles each, and
// joins everything with a single overlap-add pass so frame boundaries are
// crossfaded exactly like segment boundaries. Frame f reorders with
// derive_seed(params.seed, f).
inline ScrambleResult scramble_detailed(const AudioBuffer& buffer, const ScrambleParams& params,
                                        const FragmentationParams& fragmentation = {}) {
    params.validate();
    ScrambleResult result;
    result.audio.sample_rate = buffer.sample_rate;
    if (buffer.empty()) {
        return result;
    }
    const std::size_t frame_length = std::max<std::size_t>(1, seconds_to_index(params.texture_frame_sec, buffer.sample_rate));
    ScrambleLayout& layout = result.layout;
    for (std::size_t begin = 0, f = 0; begin < buffer.size(); begin += frame_length, ++f) {
        const IndexRange frame{begin, std::min(begin + frame_length, buffer.size())};
        layout.texture_frames.push_back(frame);
        const Segmentation seg = fragment(buffer.view().subspan(frame.begin, frame.length()), buffer.sample_rate, fragmentation);
        scramble_detail::layout_frame(frame, seg, params, derive_seed(params.seed, f), layout.pieces);
    }
    result.audio.samples = scramble_detail::render(buffer.view(), layout.pieces, params.overlap_fraction, layout.zones);
    return result;
}

inline AudioBuffer scramble(const AudioBuffer& buffer, const ScrambleParams& params, const FragmentationParams& fragmentation = {}) {
    return scramble_detailed(buffer, params, fragmentation).audio;
}

}  // namespace swr
