#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swr/csv.hpp"
#include "swr/errors.hpp"

namespace swr::metrics {

inline constexpr double kWerCap = 100.0;

// Lowercases ASCII, drops every character that is not alphanumeric (bytes of
// multi-byte UTF-8 sequences are kept) except apostrophes between two word
// characters, and collapses whitespace.
inline std::string normalize_text(std::string_view text) {
    auto is_word = [](unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; };
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const auto c = static_cast<unsigned char>(text[i]);
        const bool apostrophe = c == '\'' && i > 0 && i + 1 < text.size() &&
                                is_word(static_cast<unsigned char>(text[i - 1])) &&
                                is_word(static_cast<unsigned char>(text[i + 1]));
        if (is_word(c) || apostrophe) {
            if (pending_space && !out.empty()) {
                out.push_back(' ');
            }
            pending_space = false;
            out.push_back(static_cast<char>(std::tolower(c)));
        } else {
            pending_space = true;
        }
    }
    return out;
}

inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> words;
    const std::string norm = normalize_text(text);
    std::size_t begin = 0;
    while (begin < norm.size()) {
        std::size_t end = norm.find(' ', begin);
        if (end == std::string::npos) {
            end = norm.size();
        }
        words.emplace_back(norm.substr(begin, end - begin));
        begin = end + 1;
    }
    return words;
}

// Word-level Levenshtein distance with unit costs.
inline std::size_t edit_distance(std::span<const std::string> reference, std::span<const std::string> hypothesis) {
    std::vector<std::size_t> row(hypothesis.size() + 1);
    for (std::size_t j = 0; j < row.size(); ++j) {
        row[j] = j;
    }
    for (std::size_t i = 1; i <= reference.size(); ++i) {
        std::size_t diagonal = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= hypothesis.size(); ++j) {
            const std::size_t above = row[j];
            const std::size_t substitution = diagonal + (reference[i - 1] == hypothesis[j - 1] ? 0 : 1);
            row[j] = std::min({above + 1, row[j - 1] + 1, substitution});
            diagonal = above;
        }
    }
    return row.back();
}

struct Transcript {
    std::string clip_id;
    std::string text;
};

// Uncapped word error rate in percent.
inline double raw_wer(std::string_view reference, std::string_view hypothesis) {
    const auto ref = tokenize(reference);
    if (ref.empty()) {
        throw DomainError("reference transcript is empty after normalization");
    }
    return 100.0 * static_cast<double>(edit_distance(ref, tokenize(hypothesis))) / static_cast<double>(ref.size());
}

// Per-clip word error rate in percent, capped at 100.
inline double wer(const Transcript& reference, const Transcript& hypothesis) {
    return std::min(raw_wer(reference.text, hypothesis.text), kWerCap);
}

using TranscriptSet = std::map<std::string, std::string>;  // clip_id -> text

inline TranscriptSet parse_transcripts(std::istream& in) {
    TranscriptSet out;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (first && line.rfind("\xEF\xBB\xBF", 0) == 0) {
            line.erase(0, 3);
        }
        first = false;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (csv::trim(line).empty()) {
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ValidationError("transcript line " + std::to_string(line_no) + ": expected clip_id<TAB>text");
        }
        const std::string id = csv::trim(line.substr(0, tab));
        if (id.empty()) {
            throw ValidationError("transcript line " + std::to_string(line_no) + ": empty clip_id");
        }
        if (!out.emplace(id, line.substr(tab + 1)).second) {
            throw ValidationError("transcript line " + std::to_string(line_no) + ": duplicate clip_id " + id);
        }
    }
    return out;
}

inline TranscriptSet read_transcripts(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open transcripts " + path.string());
    }
    return parse_transcripts(in);
}

struct SystemWer {
    double mean_wer = 0.0;
    std::size_t clips = 0;
};

struct WerReport {
    // Mean of capped per-clip values over every (system, clip) pair.
    double mean_wer = 0.0;
    // Total edits over total reference words, uncapped, all systems pooled.
    double pooled_wer = 0.0;
    std::size_t clips_scored = 0;
    std::vector<SystemWer> per_system;
    std::vector<std::string> warnings;
};

// Scores each hypothesis set against the references. Clips whose reference
// normalizes to nothing are skipped; clips a system did not transcribe count
// as empty hypotheses.
inline WerReport evaluate_wer(const TranscriptSet& references, const std::vector<TranscriptSet>& systems) {
    WerReport report;
    double sum = 0.0;
    std::size_t edits = 0;
    std::size_t words = 0;
    for (std::size_t s = 0; s < systems.size(); ++s) {
        SystemWer sys;
        double sys_sum = 0.0;
        for (const auto& [id, text] : references) {
            const auto ref = tokenize(text);
            if (ref.empty()) {
                if (s == 0) {
                    report.warnings.push_back("clip " + id + ": empty reference, skipped");
                }
                continue;
            }
            const auto it = systems[s].find(id);
            if (it == systems[s].end()) {
                report.warnings.push_back("system " + std::to_string(s) + " has no hypothesis for clip " + id);
            }
            const auto hyp = it == systems[s].end() ? std::vector<std::string>{} : tokenize(it->second);
            const std::size_t d = edit_distance(ref, hyp);
            edits += d;
            words += ref.size();
            const double w = std::min(100.0 * static_cast<double>(d) / static_cast<double>(ref.size()), kWerCap);
            sys_sum += w;
            ++sys.clips;
        }
        sys.mean_wer = sys.clips > 0 ? sys_sum / static_cast<double>(sys.clips) : 0.0;
        sum += sys_sum;
        report.clips_scored += sys.clips;
        report.per_system.push_back(sys);
    }
    report.mean_wer = report.clips_scored > 0 ? sum / static_cast<double>(report.clips_scored) : 0.0;
    report.pooled_wer = words > 0 ? 100.0 * static_cast<double>(edits) / static_cast<double>(words) : 0.0;
    return report;
}

}  // namespace swr::metrics
