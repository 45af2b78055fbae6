#include <catch_amalgamated.hpp>

#include <sstream>

#include "support/signals.hpp"
#include "swr/swr.hpp"

using namespace swr::config;

namespace {

KeyValues parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

std::uint64_t no_entropy() { throw std::logic_error("entropy should not be consulted"); }

}  // namespace

TEST_CASE("defaults resolve to the documented pipeline") {
    const auto r = resolve({{"scramble.seed", "9"}}, no_entropy);
    CHECK(r.pipeline.vad.mode == swr::VadMode::always);
    CHECK(r.pipeline.scramble.reverse);
    CHECK_FALSE(r.pipeline.scramble.reorder);
    CHECK(r.pipeline.scramble.texture_frame_sec == 2.0);
    CHECK(r.pipeline.scramble.overlap_fraction == 0.05);
    CHECK(r.pipeline.scramble.seed == 9);
    CHECK(r.pipeline.fragmentation.threshold.value == 6.0);
    CHECK(r.pipeline.boundary_crossfade_sec == 0.01);
    CHECK(r.format == swr::SampleFormat::float32);
    CHECK_FALSE(r.seed_from_entropy);
}

TEST_CASE("config file syntax") {
    const auto kv = parse_text(
        "# comment\n"
        "[scramble]\n"
        "reorder = true   # trailing\n"
        "seed = \"12\"\n"
        "\n"
        "[vad]\nmode = energy\n"
        "[]\n"
        "output.format = int16\n");
    CHECK(kv.at("scramble.reorder") == "true");
    CHECK(kv.at("scramble.seed") == "12");
    CHECK(kv.at("vad.mode") == "energy");
    CHECK(kv.at("output.format") == "int16");

    CHECK_THROWS_AS(parse_text("[scramble]\nshuffle = true\n"), swr::ValidationError);
    CHECK_THROWS_AS(parse_text("[scramble\n"), swr::ValidationError);
    CHECK_THROWS_AS(parse_text("scramble.reorder\n"), swr::ValidationError);
    CHECK_THROWS_AS(read_file("/nonexistent/swr.toml"), swr::IoError);
}

TEST_CASE("layer precedence: defaults < file < environment < flags") {
    const KeyValues file = parse_text("[scramble]\noverlap = 0.1\nseed = 1\ntexture_frame = 1.0\n[vad]\npadding = 0.2\n");
    const std::map<std::string, std::string> vars{{"SWR_SCRAMBLE_SEED", "2"}, {"SWR_VAD_PADDING", "0.3"}};
    const KeyValues env = from_environment([&](const char* name) -> const char* {
        const auto it = vars.find(name);
        return it == vars.end() ? nullptr : it->second.c_str();
    });
    const KeyValues flags{{"vad.padding", "0.4"}};
    const auto r = resolve(merge({&file, &env, &flags}), no_entropy);
    CHECK(r.pipeline.scramble.texture_frame_sec == 1.0);  // file only
    CHECK(r.pipeline.scramble.overlap_fraction == 0.1);   // file over default
    CHECK(r.pipeline.scramble.seed == 2);                 // env over file
    CHECK(r.pipeline.vad.padding == 0.4);                 // flag over env
    CHECK(r.pipeline.vad.merge_gap == 0.1);               // default
}

TEST_CASE("environment names") {
    CHECK(env_name("scramble.seed") == "SWR_SCRAMBLE_SEED");
    CHECK(env_name("fragmentation.threshold_db") == "SWR_FRAGMENTATION_THRESHOLD_DB");
}

TEST_CASE("missing seed is drawn from entropy and flagged") {
    const auto r = resolve({}, [] { return std::uint64_t{777}; });
    CHECK(r.seed_from_entropy);
    CHECK(r.pipeline.scramble.seed == 777);
    const auto blank = resolve({{"scramble.seed", "  "}}, [] { return std::uint64_t{5}; });
    CHECK(blank.seed_from_entropy);
}

TEST_CASE("invalid values are rejected") {
    auto bad = [](std::string key, std::string value) {
        KeyValues kv{{"scramble.seed", "1"}};
        kv[key] = value;
        CHECK_THROWS_AS(resolve(kv, no_entropy), swr::ValidationError);
    };
    bad("vad.mode", "neural");
    bad("separation.mode", "demucs");
    bad("scramble.reverse", "maybe");
    bad("scramble.overlap", "0.5");
    bad("scramble.overlap", "-0.1");
    bad("scramble.texture_frame", "0");
    bad("scramble.seed", "-1");
    bad("scramble.seed", "12abc");
    bad("fragmentation.rms_hop", "0.05");
    bad("vad.threshold", "1.5");
    bad("pipeline.crossfade", "-1");
    bad("pipeline.baseline", "silence");
    bad("output.format", "pcm24");
    bad("vad.padding", "abc");
    CHECK_THROWS_AS(resolve({{"nope", "1"}}, no_entropy), swr::ValidationError);
    CHECK(resolve({{"scramble.seed", "18446744073709551615"}}, no_entropy).pipeline.scramble.seed == UINT64_MAX);
}

TEST_CASE("boolean spellings") {
    for (const char* t : {"true", "TRUE", "1", "yes", "on"}) {
        CHECK(resolve({{"scramble.seed", "1"}, {"scramble.reorder", t}}, no_entropy).pipeline.scramble.reorder);
    }
    for (const char* f : {"false", "0", "No", "off"}) {
        CHECK_FALSE(resolve({{"scramble.seed", "1"}, {"scramble.reverse", f}}, no_entropy).pipeline.scramble.reverse);
    }
}
