#include <catch_amalgamated.hpp>

#include <sstream>

#include "support/signals.hpp"
#include "swr/swr.hpp"

using Catch::Approx;

namespace {

swr::SpeechRegionTrack track(std::vector<swr::TrackEntry> e) { return {std::move(e)}; }

}  // namespace

TEST_CASE("window schedule arithmetic") {
    const auto w = swr::window_schedule(1.0);
    REQUIRE(w.size() == 3);
    CHECK(w[0].start == 0.0);
    CHECK(w[1].start == Approx(0.44));
    CHECK(w[2].start == Approx(0.88));
    CHECK(w[2].end == 1.0);
    const auto s = swr::window_schedule(0.3);
    REQUIRE(s.size() == 1);
    CHECK(s[0] == swr::Interval{0.0, 0.3});
    CHECK(swr::window_schedule(0.0).empty());
    CHECK(swr::window_schedule(10.0).size() == 23);  // ceil(10 / 0.44)
    CHECK_THROWS_AS(swr::window_schedule(1.0, 0.5, 0.0), swr::DomainError);
}

TEST_CASE("threshold track examples") {
    const auto a = swr::threshold_track(track({{0, 0.5, 0.9}, {0.44, 0.94, 0.1}}));
    CHECK(a.intervals == std::vector<swr::Interval>{{0.0, 0.5}});
    CHECK(swr::threshold_track(track({{0, 0.5, 0.0}, {0.44, 0.94, 0.0}})).empty());
    const auto b = swr::threshold_track(track({{0, 0.5, 0.9}, {0.44, 0.94, 0.8}}));
    CHECK(b.intervals == std::vector<swr::Interval>{{0.0, 0.94}});
    // Probability exactly at the threshold counts as speech.
    CHECK(swr::threshold_track(track({{0, 0.5, 0.3}})).intervals.size() == 1);
}

TEST_CASE("malformed tracks are validation errors") {
    CHECK_THROWS_AS(swr::threshold_track(track({{0.5, 1.0, 0.9}, {0.0, 0.5, 0.9}})), swr::ValidationError);
    CHECK_THROWS_AS(swr::threshold_track(track({{0.0, 0.5, 1.5}})), swr::ValidationError);
    CHECK_THROWS_AS(swr::threshold_track(track({{0.0, 0.5, -0.1}})), swr::ValidationError);
    CHECK_THROWS_AS(swr::threshold_track(track({{0.5, 0.5, 0.5}})), swr::ValidationError);
    CHECK_THROWS_AS(swr::threshold_track(track({{-1.0, 0.5, 0.5}})), swr::ValidationError);
}

TEST_CASE("merge gap joins nearby windows") {
    const auto r = swr::merge_intervals({{0.0, 1.0}, {1.05, 2.0}, {2.5, 3.0}}, 0.1);
    CHECK(r.intervals == std::vector<swr::Interval>{{0.0, 2.0}, {2.5, 3.0}});
}

TEST_CASE("raising the threshold never adds speech") {
    swr::Rng rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        swr::SpeechRegionTrack t;
        for (const auto& w : swr::window_schedule(1.0 + 9.0 * rng.unit())) {
            t.entries.push_back({w.start, w.end, rng.unit()});
        }
        const double lo = rng.unit();
        const double hi = lo + (1.0 - lo) * rng.unit();
        const auto a = swr::threshold_track(t, lo);
        const auto b = swr::threshold_track(t, hi);
        REQUIRE(b.total_duration() <= a.total_duration() + 1e-12);
        // Every high-threshold region lies inside a low-threshold one.
        for (const auto& i : b.intervals) {
            const bool inside = std::any_of(a.intervals.begin(), a.intervals.end(),
                                            [&](const swr::Interval& j) { return j.start <= i.start && i.end <= j.end; });
            REQUIRE(inside);
        }
        // Merging is idempotent.
        REQUIRE(swr::merge_intervals(a.intervals, swr::kDefaultMergeGap) == a);
    }
}

TEST_CASE("detect modes") {
    const auto clip = testsig::tone(200.0, 10.0, 8000);
    swr::VadConfig cfg;
    CHECK(swr::detect(clip, cfg).intervals == std::vector<swr::Interval>{{0.0, 10.0}});
    CHECK(swr::detect(swr::zeros(0, 8000), cfg).empty());

    cfg.mode = swr::VadMode::external;
    CHECK_THROWS_AS(swr::detect(clip, cfg), swr::ValidationError);
    cfg.track = swr::SpeechRegionTrack{};
    CHECK(swr::detect(clip, cfg).empty());
    cfg.track = track({{9.5, 12.0, 0.9}});
    CHECK(swr::detect(clip, cfg).intervals == std::vector<swr::Interval>{{9.5, 10.0}});

    cfg.mode = swr::VadMode::energy;
    CHECK(swr::detect(swr::zeros(80000, 8000), cfg).empty());
    auto bursty = swr::zeros(80000, 8000);
    for (std::size_t i = 24000; i < 40000; ++i) {
        bursty.samples[i] = 0.5 * std::sin(0.3 * static_cast<double>(i));
    }
    for (std::size_t i = 0; i < bursty.size(); ++i) {
        bursty.samples[i] += 1e-3 * std::sin(0.01 * static_cast<double>(i));
    }
    const auto found = swr::detect(bursty, cfg);
    REQUIRE(found.intervals.size() == 1);
    CHECK(found.intervals[0].start <= 3.0);
    CHECK(found.intervals[0].end >= 5.0);
}

TEST_CASE("padding widens and clips") {
    swr::ActiveRegions r{{{0.05, 1.0}, {1.15, 2.0}, {9.0, 9.98}}};
    const auto p = swr::pad_regions(r, 0.1, 10.0);
    CHECK(p.intervals == std::vector<swr::Interval>{{0.0, 2.1}, {8.9, 10.0}});
}

TEST_CASE("track csv round trip and errors") {
    swr::SpeechRegionTrack t;
    for (const auto& w : swr::window_schedule(3.0)) {
        t.entries.push_back({w.start, w.end, 0.123456789});
    }
    std::stringstream s;
    swr::write_track_csv(t, s);
    const auto back = swr::parse_track_csv(s);
    REQUIRE(back.entries.size() == t.entries.size());
    for (std::size_t i = 0; i < t.entries.size(); ++i) {
        CHECK(back.entries[i].start == t.entries[i].start);
        CHECK(back.entries[i].end == t.entries[i].end);
        CHECK(back.entries[i].probability == t.entries[i].probability);
    }
    std::istringstream bad_header("start,end,p\n0,1,0.5\n");
    CHECK_THROWS_AS(swr::parse_track_csv(bad_header), swr::ValidationError);
    std::istringstream bad_row("start_sec,end_sec,probability\n0,1\n");
    CHECK_THROWS_AS(swr::parse_track_csv(bad_row), swr::ValidationError);
    std::istringstream bad_number("start_sec,end_sec,probability\n0,one,0.5\n");
    CHECK_THROWS_AS(swr::parse_track_csv(bad_number), swr::ValidationError);
    std::istringstream empty("");
    CHECK_THROWS_AS(swr::parse_track_csv(empty), swr::ValidationError);
    CHECK_THROWS_AS(swr::read_track_csv("/nonexistent/track.csv"), swr::IoError);
}
