#include <catch_amalgamated.hpp>

#include <sstream>

#include "swr/swr.hpp"

using namespace swr::metrics;

namespace {

LogitRecord record(std::string id, std::array<double, kClassCount> scores, std::vector<std::size_t> labels) {
    return {std::move(id), scores, std::move(labels)};
}

std::size_t idx(const char* name) { return *class_index(name); }

// Ranking by sorting (score, name) pairs.
std::size_t oracle_rank(const std::array<double, kClassCount>& scores, std::size_t label) {
    std::vector<std::pair<double, std::string>> v;
    for (std::size_t c = 0; c < kClassCount; ++c) {
        v.emplace_back(-scores[c], std::string(kSourceClasses[c]));
    }
    std::sort(v.begin(), v.end());
    for (std::size_t r = 0; r < v.size(); ++r) {
        if (v[r].second == kSourceClasses[label]) {
            return r + 1;
        }
    }
    return 0;
}

}  // namespace

TEST_CASE("detection examples") {
    // speech 1st, siren 2nd
    const auto a = record("a", {0.9, 0.1, 0.1, 0.1, 0.1, 0.8, 0.1, 0.1}, {idx("speech"), idx("siren")});
    for (const auto& d : detect_sources(a, DetectionMode::mixture)) {
        CHECK(d.detected);
    }
    // dog 2nd in a voice-free clip
    const auto b = record("b", {0.1, 0.1, 0.1, 0.1, 0.1, 0.9, 0.1, 0.5}, {idx("dog")});
    CHECK_FALSE(detect_sources(b, DetectionMode::voice_free)[0].detected);
    CHECK(detect_sources(b, DetectionMode::voice_free)[0].rank == 2);
    // speech 1st, siren 3rd
    const auto c = record("c", {0.9, 0.5, 0.1, 0.1, 0.1, 0.3, 0.1, 0.1}, {idx("speech"), idx("siren")});
    const auto dc = detect_sources(c, DetectionMode::mixture);
    CHECK(dc[0].detected);
    CHECK_FALSE(dc[1].detected);
    CHECK(dc[1].rank == 3);
    CHECK_THROWS_AS(detect_sources(c, DetectionMode::voice_free), swr::ValidationError);
    CHECK_THROWS_AS(detect_sources(b, DetectionMode::mixture), swr::ValidationError);
}

TEST_CASE("rank rule agrees with a sort oracle over all score orderings") {
    std::array<int, kClassCount> perm{0, 1, 2, 3, 4, 5, 6, 7};
    std::size_t orderings = 0;
    do {
        std::array<double, kClassCount> scores{};
        for (std::size_t c = 0; c < kClassCount; ++c) {
            scores[c] = static_cast<double>(perm[c]);
        }
        for (std::size_t a = 0; a < kClassCount; ++a) {
            const auto vf = detect_sources(record("v", scores, {a}), DetectionMode::voice_free)[0];
            REQUIRE(vf.rank == oracle_rank(scores, a));
            REQUIRE(vf.detected == (oracle_rank(scores, a) == 1));
            REQUIRE_FALSE(vf.tied);
            for (std::size_t b = a + 1; b < kClassCount; ++b) {
                const auto m = detect_sources(record("m", scores, {a, b}), DetectionMode::mixture);
                REQUIRE(m[0].detected == (oracle_rank(scores, a) <= 2));
                REQUIRE(m[1].detected == (oracle_rank(scores, b) <= 2));
            }
        }
        ++orderings;
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(orderings == 40320);
}

TEST_CASE("ties break by class name and are flagged") {
    // All equal: alphabetical order is car_horn, chainsaw, dog, engine, ...
    const std::array<double, kClassCount> flat{};
    const auto order = rank_order(flat);
    CHECK(kSourceClasses[order[0]] == "car_horn");
    CHECK(kSourceClasses[order[1]] == "chainsaw");
    CHECK(kSourceClasses[order[7]] == "speech");
    const auto d = detect_sources(record("t", flat, {idx("dog")}), DetectionMode::voice_free)[0];
    CHECK(d.rank == 3);
    CHECK(d.tied);
    CHECK_FALSE(d.detected);
}

TEST_CASE("scad values") {
    std::vector<LogitRecord> orig;
    std::vector<LogitRecord> proc;
    // 500 mixture clips, speech + engine: 1000 trials.
    for (int i = 0; i < 500; ++i) {
        const auto id = "clip" + std::to_string(i);
        orig.push_back(record(id, {0.9, 0.8, 0, 0, 0, 0, 0, 0}, {idx("speech"), idx("engine")}));
        // Processed: engine pushed to rank 3 in 27 clips.
        if (i < 27) {
            proc.push_back(record(id, {0.9, 0.1, 0.5, 0.4, 0, 0, 0, 0}, {}));
        } else {
            proc.push_back(record(id, {0.7, 0.8, 0, 0, 0, 0, 0, 0}, {}));
        }
    }
    const auto r = scad(orig, proc);
    CHECK(r.original.trials == 1000);
    CHECK(r.original.percent() == 100.0);
    CHECK(r.processed.percent() == Catch::Approx(97.3).margin(1e-12));
    CHECK(r.scad == Catch::Approx(2.7).margin(1e-9));

    CHECK(scad(orig, orig).scad == 0.0);

    std::vector<LogitRecord> wrong;
    for (const auto& o : orig) {
        wrong.push_back(record(o.clip_id, {0, 0, 0.9, 0.8, 0, 0, 0, 0}, o.labels));
    }
    CHECK(scad(orig, wrong).scad == 100.0);

    auto missing = proc;
    missing.pop_back();
    CHECK_THROWS_AS(scad(orig, missing), swr::ValidationError);
    auto renamed = proc;
    renamed[0].clip_id = "other";
    CHECK_THROWS_AS(scad(orig, renamed), swr::ValidationError);
    auto dup = proc;
    dup[1].clip_id = dup[0].clip_id;
    CHECK_THROWS_AS(scad(orig, dup), swr::ValidationError);
}

TEST_CASE("logits csv") {
    std::istringstream in(std::string(kLogitsHeader) +
                          "\nc1,speech|car horn,0.9,0,0,0,0.8,0,0,0\nc2,dog,0,0,0,0,0,0,0,1\n");
    const auto recs = parse_logits_csv(in);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].labels == std::vector<std::size_t>{idx("speech"), idx("car_horn")});
    CHECK(mode_for(recs[0]) == DetectionMode::mixture);
    CHECK(mode_for(recs[1]) == DetectionMode::voice_free);
    CHECK(detection_accuracy(recs).percent() == 100.0);

    std::istringstream bad_header("clip,labels\n");
    CHECK_THROWS_AS(parse_logits_csv(bad_header), swr::ValidationError);
    std::istringstream bad_label(std::string(kLogitsHeader) + "\nc1,cat,0,0,0,0,0,0,0,0\n");
    CHECK_THROWS_AS(parse_logits_csv(bad_label), swr::ValidationError);
    std::istringstream three(std::string(kLogitsHeader) + "\nc1,dog|siren|music,0,0,0,0,0,0,0,0\n");
    CHECK_THROWS_AS(parse_logits_csv(three), swr::ValidationError);
    std::istringstream short_row(std::string(kLogitsHeader) + "\nc1,dog,0,0\n");
    CHECK_THROWS_AS(parse_logits_csv(short_row), swr::ValidationError);
    CHECK_THROWS_AS(read_logits_csv("/nonexistent.csv"), swr::IoError);
}
