#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "swr/csv.hpp"
#include "swr/errors.hpp"

namespace swr::metrics {

// One embedding per row.
struct EmbeddingSet {
    Eigen::MatrixXd matrix;
    std::vector<std::string> clip_ids;  // optional; filled by the CSV reader

    Eigen::Index size() const { return matrix.rows(); }
    Eigen::Index dim() const { return matrix.cols(); }
    // Fewer than d+1 rows give a singular covariance.
    bool covariance_full_rank_possible() const { return size() >= dim() + 1; }
};

struct GaussianStats {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

inline GaussianStats gaussian_stats(const EmbeddingSet& set) {
    if (set.size() < 2) {
        throw DomainError("gaussian statistics need at least two embeddings");
    }
    if (!set.matrix.allFinite()) {
        throw DomainError("embedding set contains non-finite values");
    }
    GaussianStats stats;
    stats.mean = set.matrix.colwise().mean().transpose();
    const Eigen::MatrixXd centered = set.matrix.rowwise() - stats.mean.transpose();
    stats.covariance = (centered.transpose() * centered) / static_cast<double>(set.size() - 1);
    stats.covariance = 0.5 * (stats.covariance + stats.covariance.transpose());
    return stats;
}

enum class NormConvention {
    squared,  // ||mu_r - mu_t||^2, the usual Frechet distance
    literal,  // ||mu_r - mu_t||, unsquared
};

inline constexpr double kEigenClampRelative = 1e-10;

struct FadTerms {
    double mean_term = 0.0;
    double trace_term = 0.0;
    double value = 0.0;
};

namespace fad_detail {

// Eigenvalues of a symmetric matrix, with negative ones and those below
// kEigenClampRelative of the largest magnitude set to zero.
inline Eigen::VectorXd clamped_eigenvalues(const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& solver) {
    Eigen::VectorXd values = solver.eigenvalues();
    const double scale = values.size() > 0 ? values.cwiseAbs().maxCoeff() : 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (values[i] < kEigenClampRelative * scale) {
            values[i] = 0.0;
        }
    }
    return values;
}

inline Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (m + m.transpose()));
    if (solver.info() != Eigen::Success) {
        throw DomainError("eigendecomposition failed");
    }
    const Eigen::VectorXd roots = clamped_eigenvalues(solver).cwiseSqrt();
    return solver.eigenvectors() * roots.asDiagonal() * solver.eigenvectors().transpose();
}

inline void check(const GaussianStats& s, const char* which) {
    const auto d = s.mean.size();
    if (s.covariance.rows() != d || s.covariance.cols() != d) {
        throw DomainError(std::string(which) + " covariance shape does not match its mean");
    }
    if (!s.mean.allFinite() || !s.covariance.allFinite()) {
        throw DomainError(std::string(which) + " statistics are not finite");
    }
}

}  // namespace fad_detail

// tr(Sr + St - 2 (Sr St)^{1/2}) is evaluated as
// tr(Sr) + tr(St) - 2 tr((Sr^{1/2} St Sr^{1/2})^{1/2}), which only needs
// symmetric eigendecompositions.
inline FadTerms fad_terms(const GaussianStats& ref, const GaussianStats& test, NormConvention convention = NormConvention::squared) {
    fad_detail::check(ref, "reference");
    fad_detail::check(test, "test");
    if (ref.mean.size() != test.mean.size()) {
        throw DomainError("embedding dimensions differ (" + std::to_string(ref.mean.size()) + " vs " +
                          std::to_string(test.mean.size()) + ")");
    }
    FadTerms t;
    const double dist2 = (ref.mean - test.mean).squaredNorm();
    t.mean_term = convention == NormConvention::squared ? dist2 : std::sqrt(dist2);

    const Eigen::MatrixXd root_ref = fad_detail::symmetric_sqrt(ref.covariance);
    const Eigen::MatrixXd inner = root_ref * test.covariance * root_ref;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (inner + inner.transpose()), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw DomainError("eigendecomposition failed");
    }
    const double cross = fad_detail::clamped_eigenvalues(solver).cwiseSqrt().sum();
    t.trace_term = ref.covariance.trace() + test.covariance.trace() - 2.0 * cross;
    t.value = t.mean_term + t.trace_term;
    return t;
}

inline double fad(const GaussianStats& ref, const GaussianStats& test, NormConvention convention = NormConvention::squared) {
    return fad_terms(ref, test, convention).value;
}

// Binary embedding file: "VGEM", u32 version, u32 rows, u32 dim, then
// rows*dim little-endian float32 values, row-major.
inline constexpr std::uint32_t kEmbeddingVersion = 1;

inline EmbeddingSet decode_embeddings(const std::vector<unsigned char>& bytes) {
    auto u32 = [&](std::size_t at) {
        return static_cast<std::uint32_t>(bytes[at]) | (static_cast<std::uint32_t>(bytes[at + 1]) << 8) |
               (static_cast<std::uint32_t>(bytes[at + 2]) << 16) | (static_cast<std::uint32_t>(bytes[at + 3]) << 24);
    };
    if (bytes.size() < 16 || std::memcmp(bytes.data(), "VGEM", 4) != 0) {
        throw ValidationError("not a VGEM embedding file");
    }
    if (u32(4) != kEmbeddingVersion) {
        throw ValidationError("unsupported VGEM version " + std::to_string(u32(4)));
    }
    const std::uint64_t rows = u32(8);
    const std::uint64_t dim = u32(12);
    if (bytes.size() - 16 != rows * dim * 4) {
        throw IoError("VGEM payload size does not match header (" + std::to_string(rows) + " x " + std::to_string(dim) + ")");
    }
    EmbeddingSet set;
    set.matrix.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
    std::size_t at = 16;
    for (Eigen::Index r = 0; r < set.matrix.rows(); ++r) {
        for (Eigen::Index c = 0; c < set.matrix.cols(); ++c, at += 4) {
            set.matrix(r, c) = std::bit_cast<float>(u32(at));
        }
    }
    return set;
}

inline std::vector<unsigned char> encode_embeddings(const EmbeddingSet& set) {
    std::vector<unsigned char> out;
    auto put = [&](std::uint32_t v) {
        for (int shift = 0; shift < 32; shift += 8) {
            out.push_back(static_cast<unsigned char>((v >> shift) & 0xFF));
        }
    };
    out.insert(out.end(), {'V', 'G', 'E', 'M'});
    put(kEmbeddingVersion);
    put(static_cast<std::uint32_t>(set.size()));
    put(static_cast<std::uint32_t>(set.dim()));
    for (Eigen::Index r = 0; r < set.size(); ++r) {
        for (Eigen::Index c = 0; c < set.dim(); ++c) {
            put(std::bit_cast<std::uint32_t>(static_cast<float>(set.matrix(r, c))));
        }
    }
    return out;
}

// CSV alternative: clip_id first, then one column per dimension. A header
// row is recognised by a non-numeric second field.
inline EmbeddingSet parse_embeddings_csv(std::istream& in) {
    auto rows = csv::read_rows(in);
    if (!rows.empty() && rows.front().size() > 1) {
        char* end = nullptr;
        const std::string probe = csv::trim(rows.front()[1]);
        std::strtod(probe.c_str(), &end);
        if (probe.empty() || end != probe.c_str() + probe.size()) {
            rows.erase(rows.begin());
        }
    }
    EmbeddingSet set;
    if (rows.empty()) {
        return set;
    }
    const std::size_t dim = rows.front().size() - 1;
    set.matrix.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != dim + 1) {
            throw ValidationError("embedding row " + std::to_string(r + 1) + ": expected " + std::to_string(dim + 1) + " fields");
        }
        set.clip_ids.push_back(csv::trim(rows[r][0]));
        for (std::size_t c = 0; c < dim; ++c) {
            set.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = csv::parse_double(rows[r][c + 1], "embedding");
        }
    }
    return set;
}

inline EmbeddingSet read_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open embeddings " + path.string());
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EmbeddingSet set;
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), "VGEM", 4) == 0) {
        set = decode_embeddings(bytes);
    } else {
        std::istringstream text(std::string(bytes.begin(), bytes.end()));
        set = parse_embeddings_csv(text);
    }
    if (!set.matrix.allFinite()) {
        throw ValidationError("embeddings in " + path.string() + " contain non-finite values");
    }
    return set;
}

inline void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    const auto bytes = encode_embeddings(set);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace swr::metrics
