#include <catch_amalgamated.hpp>

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "support/signals.hpp"
#include "swr/swr.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

swr::cli::Environment fake_env(std::map<std::string, std::string> vars = {}, std::uint64_t entropy = 4242) {
    auto shared = std::make_shared<std::map<std::string, std::string>>(std::move(vars));
    swr::cli::Environment env;
    env.getenv = [shared](const char* name) -> const char* {
        const auto it = shared->find(name);
        return it == shared->end() ? nullptr : it->second.c_str();
    };
    env.entropy = [entropy] { return entropy; };
    return env;
}

Result run(std::vector<std::string> args, const swr::cli::Environment& env = fake_env()) {
    std::ostringstream out, err;
    const int code = swr::cli::run(args, out, err, env);
    return {code, out.str(), err.str()};
}

std::vector<json> json_lines(const std::string& text) {
    std::vector<json> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.front() == '{') {
            lines.push_back(json::parse(line));
        }
    }
    return lines;
}

std::vector<unsigned char> bytes_of(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("enforce writes the scrambled file and logs the run") {
    testsig::TempDir dir("cli");
    const auto s = testsig::speech_like(3);
    swr::write_wav(s.audio, dir / "in.wav", swr::SampleFormat::float32);
    const auto r = run({"enforce", "--in", (dir / "in.wav").string(), "--out", (dir / "out.wav").string(), "--seed", "17"});
    REQUIRE(r.code == swr::cli::kExitOk);
    REQUIRE(fs::exists(dir / "out.wav"));

    swr::PipelineConfig cfg;
    cfg.scramble.seed = 17;
    const auto expected = swr::enforce(swr::read_wav(dir / "in.wav"), cfg);
    const auto got = swr::read_wav(dir / "out.wav");
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        REQUIRE(got.samples[i] == static_cast<double>(static_cast<float>(expected.samples[i])));
    }

    const auto log = json_lines(r.err);
    REQUIRE(log.size() == 3);
    CHECK(log[0]["event"] == "run");
    CHECK(log[0]["seed"] == 17);
    CHECK(log[0]["seed_source"] == "config");
    CHECK(log[1]["event"] == "file");
    CHECK(log[1]["status"] == "ok");
    CHECK(log[2]["event"] == "done");
    CHECK(log[2]["exit_code"] == 0);
}

TEST_CASE("unset seed comes from entropy and is logged") {
    testsig::TempDir dir("cli");
    swr::write_wav(testsig::tone(200, 0.5, 16000), dir / "in.wav", swr::SampleFormat::float32);
    const auto r = run({"enforce", "--in", (dir / "in.wav").string(), "--out", (dir / "o.wav").string(), "--log",
                        (dir / "run.jsonl").string()});
    REQUIRE(r.code == 0);
    std::ifstream in(dir / "run.jsonl");
    const auto log = json_lines(std::string(std::istreambuf_iterator<char>(in), {}));
    REQUIRE(!log.empty());
    CHECK(log[0]["seed"] == 4242);
    CHECK(log[0]["seed_source"] == "entropy");
}

TEST_CASE("missing input exits with the I/O code and writes nothing") {
    testsig::TempDir dir("cli");
    const auto r = run({"enforce", "--in", (dir / "absent.wav").string(), "--out", (dir / "out.wav").string(), "--seed", "1"});
    CHECK(r.code == swr::cli::kExitIo);
    CHECK_FALSE(fs::exists(dir / "out.wav"));
    const auto log = json_lines(r.err);
    REQUIRE(log.size() == 3);
    CHECK(log[1]["status"] == "error");
}

TEST_CASE("usage errors exit with the validation code") {
    CHECK(run({"enforce", "--bogus"}).code == swr::cli::kExitValidation);
    CHECK(run({"enforce", "--in", "x.wav"}).code == swr::cli::kExitValidation);
    CHECK(run({"enforce", "--in", "a.wav", "--out", "b.wav", "--overlap", "0.7", "--seed", "1"}).code ==
          swr::cli::kExitValidation);
    CHECK(run({}).code == swr::cli::kExitValidation);
    CHECK(run({"--help"}).code == swr::cli::kExitOk);
}

TEST_CASE("environment settings apply and flags override them") {
    testsig::TempDir dir("cli");
    swr::write_wav(testsig::tone(200, 0.5, 16000), dir / "in.wav", swr::SampleFormat::float32);
    const auto env = fake_env({{"SWR_SCRAMBLE_SEED", "99"}, {"SWR_OUTPUT_FORMAT", "int16"}});
    auto r = run({"enforce", "--in", (dir / "in.wav").string(), "--out", (dir / "o.wav").string()}, env);
    REQUIRE(r.code == 0);
    CHECK(json_lines(r.err)[0]["seed"] == 99);
    CHECK(swr::wav_detail::read_u16(bytes_of(dir / "o.wav").data() + 34) == 16);
    r = run({"enforce", "--in", (dir / "in.wav").string(), "--out", (dir / "o.wav").string(), "--seed", "3"}, env);
    CHECK(json_lines(r.err)[0]["seed"] == 3);
}

TEST_CASE("validate-only checks inputs without writing") {
    testsig::TempDir dir("cli");
    swr::write_wav(testsig::tone(200, 0.5, 16000), dir / "in.wav", swr::SampleFormat::float32);
    write_text(dir / "track.csv", "start_sec,end_sec,probability\n0.0,0.5,0.9\n");
    auto r = run({"enforce", "--in", (dir / "in.wav").string(), "--out", (dir / "o.wav").string(), "--validate-only",
                  "--vad", "external", "--track", (dir / "track.csv").string(), "--seed", "1"});
    CHECK(r.code == swr::cli::kExitOk);
    CHECK_FALSE(fs::exists(dir / "o.wav"));
    write_text(dir / "bad.csv", "start_sec,end_sec,probability\n0.0,0.5,2.0\n");
    r = run({"enforce", "--in", (dir / "in.wav").string(), "--validate-only", "--vad", "external", "--track",
             (dir / "bad.csv").string(), "--seed", "1"});
    CHECK(r.code == swr::cli::kExitValidation);
}

TEST_CASE("manifest runs are deterministic and use per-entry seeds") {
    testsig::TempDir dir("cli");
    for (int i = 0; i < 3; ++i) {
        swr::write_wav(testsig::speech_like(50 + i).audio, dir / ("in" + std::to_string(i) + ".wav"), swr::SampleFormat::float32);
    }
    auto manifest = [&](const std::string& tag) {
        std::string text = "input_path,output_path\n";
        for (int i = 0; i < 3; ++i) {
            text += "in" + std::to_string(i) + ".wav," + tag + std::to_string(i) + ".wav\n";
        }
        write_text(dir / (tag + ".csv"), text);
        return (dir / (tag + ".csv")).string();
    };
    const auto a = run({"enforce", "--manifest", manifest("a"), "--reorder", "--seed", "5"});
    const auto b = run({"enforce", "--manifest", manifest("b"), "--reorder", "--seed", "5", "--jobs", "3"});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    for (int i = 0; i < 3; ++i) {
        CHECK(bytes_of(dir / ("a" + std::to_string(i) + ".wav")) == bytes_of(dir / ("b" + std::to_string(i) + ".wav")));
    }
    CHECK(bytes_of(dir / "a0.wav") != bytes_of(dir / "a1.wav"));
    for (const auto& rec : json_lines(a.err)) {
        if (rec["event"] == "file") {
            CHECK(rec["seed"] == swr::derive_seed(5, rec["index"].get<std::size_t>()));
        }
    }

    write_text(dir / "broken.csv", "input_path,output_path\nin0.wav,c0.wav\nmissing.wav,c1.wav\n");
    const auto c = run({"enforce", "--manifest", (dir / "broken.csv").string(), "--seed", "5"});
    CHECK(c.code == swr::cli::kExitIo);
    CHECK(fs::exists(dir / "c0.wav"));
    CHECK(json_lines(c.err).back()["failed"] == 1);
}

TEST_CASE("fragment prints absolute cut points") {
    testsig::TempDir dir("cli");
    const auto s = testsig::speech_like(8);
    swr::write_wav(s.audio, dir / "in.wav", swr::SampleFormat::float32);
    const auto r = run({"fragment", "--in", (dir / "in.wav").string()});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "frame_index,cut_point_sample");
    std::vector<std::size_t> cuts;
    while (std::getline(in, line)) {
        cuts.push_back(std::stoul(line.substr(line.find(',') + 1)));
    }
    CHECK(cuts == s.dips);
}

TEST_CASE("mix builds a level-matched mixture") {
    testsig::TempDir dir("cli");
    swr::write_wav(testsig::tone(300, 1.0, 16000, 0.1), dir / "s.wav", swr::SampleFormat::float32);
    swr::write_wav(testsig::noise(16000, 16000, 0.01, 3), dir / "b.wav", swr::SampleFormat::float32);
    const auto r = run({"mix", "--speech", (dir / "s.wav").string(), "--background", (dir / "b.wav").string(), "--out",
                        (dir / "m.wav").string()});
    REQUIRE(r.code == 0);
    const auto m = swr::read_wav(dir / "m.wav");
    CHECK(m.size() == 16000);
    CHECK(swr::peak(m.view()) == Catch::Approx(1.0).margin(1e-6));
    CHECK(run({"mix", "--speech", (dir / "s.wav").string()}).code == swr::cli::kExitValidation);
}

TEST_CASE("eval reports") {
    testsig::TempDir dir("cli");
    write_text(dir / "ref.tsv", "c1\tthe cat sat\nc2\thello\n");
    write_text(dir / "hyp.tsv", "c1\tthe bat sat\nc2\thello\n");
    auto r = run({"eval", "wer", "--ref", (dir / "ref.tsv").string(), "--hyp", (dir / "hyp.tsv").string()});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["wer"].get<double>() == Catch::Approx(100.0 / 6.0));

    swr::metrics::EmbeddingSet a, b;
    a.matrix = Eigen::MatrixXd::Random(20, 4);
    b.matrix = Eigen::MatrixXd::Random(20, 4).array() + 1.0;
    swr::metrics::write_embeddings(a, dir / "a.emb");
    swr::metrics::write_embeddings(b, dir / "b.emb");
    r = run({"eval", "fad", "--ref", (dir / "a.emb").string(), "--test", (dir / "b.emb").string()});
    REQUIRE(r.code == 0);
    j = json::parse(r.out);
    REQUIRE(j.contains("fad"));
    const auto expected = swr::metrics::fad(swr::metrics::gaussian_stats(swr::metrics::read_embeddings(dir / "a.emb")),
                                            swr::metrics::gaussian_stats(swr::metrics::read_embeddings(dir / "b.emb")));
    CHECK(j["fad"].get<double>() == Catch::Approx(expected).epsilon(1e-9));
    CHECK(j["convention"] == "squared");

    r = run({"eval", "fad", "--ref", (dir / "a.emb").string(), "--test", (dir / "b.emb").string(), "--validate-only"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["valid"] == true);
    CHECK(run({"eval", "fad", "--ref", (dir / "a.emb").string(), "--test", (dir / "none.emb").string()}).code ==
          swr::cli::kExitIo);

    const std::string header = swr::metrics::kLogitsHeader;
    write_text(dir / "o.csv", header + "\nc1,speech|siren,0.9,0,0,0,0,0.8,0,0\nc2,dog,0,0,0,0,0,0,0,1\n");
    write_text(dir / "p.csv", header + "\nc1,speech|siren,0.9,0.85,0,0,0,0.8,0,0\nc2,dog,0,0,0,0,0,0,0,1\n");
    r = run({"eval", "scad", "--original", (dir / "o.csv").string(), "--processed", (dir / "p.csv").string()});
    REQUIRE(r.code == 0);
    j = json::parse(r.out);
    CHECK(j["scad"].get<double>() == Catch::Approx(100.0 / 3.0));
    write_text(dir / "bad.csv", "clip,x\n");
    CHECK(run({"eval", "scad", "--original", (dir / "bad.csv").string(), "--processed", (dir / "p.csv").string()}).code ==
          swr::cli::kExitValidation);
}
