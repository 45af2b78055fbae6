#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>
#include <utility>

#include <CLI11.hpp>
#include <json.hpp>

#include "swr/swr.hpp"

namespace swr::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

Environment Environment::system() {
    return {[](const char* name) -> const char* { return std::getenv(name); }, [] { return entropy_seed(); }};
}

namespace {

// Serialised writer for the JSON Lines run log.
class RunLog {
public:
    explicit RunLog(std::ostream& fallback) : stream_(&fallback) {}

    void open(const std::string& path) {
        if (path.empty()) {
            return;
        }
        file_ = std::make_unique<std::ofstream>(path, std::ios::app);
        if (!*file_) {
            throw IoError("cannot open log " + path);
        }
        stream_ = file_.get();
    }

    void write(const json& record) {
        const std::lock_guard lock(mutex_);
        *stream_ << record.dump() << '\n';
        stream_->flush();
    }

private:
    std::ostream* stream_;
    std::unique_ptr<std::ofstream> file_;
    std::mutex mutex_;
};

const char* to_string(VadMode m) {
    switch (m) {
        case VadMode::always: return "always";
        case VadMode::external: return "external";
        case VadMode::energy: return "energy";
    }
    return "?";
}

const char* to_string(Baseline b) {
    switch (b) {
        case Baseline::none: return "none";
        case Baseline::white_noise: return "white_noise";
        case Baseline::reorder_only: return "reorder_only";
    }
    return "?";
}

json config_json(const config::Resolved& r) {
    const PipelineConfig& p = r.pipeline;
    return {
        {"vad", {{"mode", to_string(p.vad.mode)}, {"threshold", p.vad.threshold}, {"merge_gap", p.vad.merge_gap},
                 {"padding", p.vad.padding}}},
        {"separation", {{"mode", p.separation == SeparationMode::identity ? "identity" : "external"}}},
        {"scramble", {{"reverse", p.scramble.reverse}, {"reorder", p.scramble.reorder}, {"seed", p.scramble.seed},
                      {"texture_frame", p.scramble.texture_frame_sec}, {"overlap", p.scramble.overlap_fraction}}},
        {"fragmentation", {{"rms_window", p.fragmentation.rms_window_sec}, {"rms_hop", p.fragmentation.rms_hop_sec},
                           {"threshold_db", p.fragmentation.threshold.value},
                           {"min_segment", p.fragmentation.min_segment_sec}}},
        {"pipeline", {{"crossfade", p.boundary_crossfade_sec}, {"baseline", to_string(p.baseline)}}},
        {"output", {{"format", r.format == SampleFormat::int16 ? "int16" : "float32"}}},
    };
}

int exit_code_for(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const IoError&) {
        return kExitIo;
    } catch (...) {
        return kExitValidation;
    }
}

std::string message_of(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const std::exception& ex) {
        return ex.what();
    } catch (...) {
        return "unknown error";
    }
}

// Flag value only when the flag was given on the command line.
struct Overrides {
    std::vector<std::pair<CLI::Option*, std::string>> options;
    std::vector<std::pair<CLI::Option*, std::string>> switches;
    std::map<std::string, std::string> string_values;
    std::map<std::string, bool> bool_values;

    void option(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        auto* o = app->add_option(flag, string_values[key], help);
        options.emplace_back(o, key);
    }

    void toggle(CLI::App* app, const std::string& flags, const std::string& key, const std::string& help) {
        auto* o = app->add_flag(flags, bool_values[key], help);
        switches.emplace_back(o, key);
    }

    config::KeyValues collect() const {
        config::KeyValues kv;
        for (const auto& [o, key] : options) {
            if (o->count() > 0) {
                kv[key] = string_values.at(key);
            }
        }
        for (const auto& [o, key] : switches) {
            if (o->count() > 0) {
                kv[key] = bool_values.at(key) ? "true" : "false";
            }
        }
        return kv;
    }
};

struct Settings {
    std::string config_path;
    Overrides overrides;

    config::Resolved resolve(const Environment& env) const {
        config::KeyValues file;
        if (!config_path.empty()) {
            file = config::read_file(config_path);
        }
        const config::KeyValues from_env = config::from_environment(env.getenv);
        const config::KeyValues flags = overrides.collect();
        return config::resolve(config::merge({&file, &from_env, &flags}), env.entropy);
    }
};

void add_fragmentation_options(CLI::App* app, Settings& s) {
    s.overrides.option(app, "--rms-window", "fragmentation.rms_window", "RMS analysis window (s)");
    s.overrides.option(app, "--rms-hop", "fragmentation.rms_hop", "RMS analysis hop (s)");
    s.overrides.option(app, "--threshold-db", "fragmentation.threshold_db", "low-energy threshold below the frame maximum (dB)");
    s.overrides.option(app, "--min-segment", "fragmentation.min_segment", "minimum segment length (s)");
    s.overrides.option(app, "--texture-frame", "scramble.texture_frame", "texture frame length (s)");
}

void add_pipeline_options(CLI::App* app, Settings& s) {
    app->add_option("--config", s.config_path, "key/value configuration file");
    s.overrides.option(app, "--vad", "vad.mode", "always | external | energy");
    s.overrides.option(app, "--vad-threshold", "vad.threshold", "speech probability threshold");
    s.overrides.option(app, "--merge-gap", "vad.merge_gap", "merge active windows closer than this (s)");
    s.overrides.option(app, "--padding", "vad.padding", "region padding on each side (s)");
    s.overrides.option(app, "--sep", "separation.mode", "identity | external");
    s.overrides.toggle(app, "--reverse,!--no-reverse", "scramble.reverse", "reverse samples within segments");
    s.overrides.toggle(app, "--reorder,!--no-reorder", "scramble.reorder", "shuffle segments within texture frames");
    s.overrides.option(app, "--seed", "scramble.seed", "64-bit seed (default: system entropy, logged)");
    s.overrides.option(app, "--overlap", "scramble.overlap", "crossfade fraction of the shorter segment");
    s.overrides.option(app, "--crossfade", "pipeline.crossfade", "region boundary crossfade (s)");
    s.overrides.option(app, "--baseline", "pipeline.baseline", "none | white_noise | reorder_only");
    s.overrides.option(app, "--format", "output.format", "int16 | float32");
    add_fragmentation_options(app, s);
}

struct ProcessEntry {
    fs::path input;
    fs::path output;
    fs::path track;
    fs::path speech_stem;
    fs::path residual_stem;
};

std::vector<csv::Row> manifest_rows(const fs::path& path, std::string_view first_header) {
    auto rows = csv::read_file(path);
    if (!rows.empty() && csv::trim(rows.front().front()) == first_header) {
        rows.erase(rows.begin());
    }
    return rows;
}

fs::path relative_to(const fs::path& base, const std::string& field) {
    const std::string t = csv::trim(field);
    if (t.empty()) {
        return {};
    }
    const fs::path p(t);
    return p.is_absolute() ? p : base / p;
}

std::vector<ProcessEntry> read_process_manifest(const fs::path& path) {
    std::vector<ProcessEntry> out;
    const fs::path base = path.parent_path();
    std::size_t line = 0;
    for (const auto& row : manifest_rows(path, "input_path")) {
        ++line;
        if (row.size() < 2 || row.size() > 5) {
            throw ValidationError("manifest entry " + std::to_string(line) +
                                  ": expected input_path,output_path[,track_path,speech_stem,residual_stem]");
        }
        ProcessEntry e{relative_to(base, row[0]), relative_to(base, row[1]), {}, {}, {}};
        if (row.size() > 2) e.track = relative_to(base, row[2]);
        if (row.size() > 3) e.speech_stem = relative_to(base, row[3]);
        if (row.size() > 4) e.residual_stem = relative_to(base, row[4]);
        out.push_back(std::move(e));
    }
    return out;
}

// Runs `task(i)` for every index on `jobs` workers; returns per-index errors.
std::vector<std::exception_ptr> for_each_entry(std::size_t count, int jobs, const std::function<void(std::size_t)>& task) {
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto n = static_cast<std::size_t>(std::clamp(jobs, 1, 256));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < std::min(n, count); ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& th : pool) {
        th.join();
    }
    return errors;
}

int summarize(const std::vector<std::exception_ptr>& errors, RunLog& log, std::ostream& err, const std::string& command) {
    int code = kExitOk;
    std::size_t failed = 0;
    for (const auto& e : errors) {
        if (e) {
            ++failed;
            code = std::max(code, exit_code_for(e));
        }
    }
    log.write({{"event", "done"}, {"command", command}, {"entries", errors.size()}, {"failed", failed}, {"exit_code", code}});
    if (failed > 0) {
        err << "swr " << command << ": " << failed << " of " << errors.size() << " entries failed\n";
    }
    return code;
}

struct ProcessOptions {
    Settings settings;
    std::string input;
    std::string output;
    std::string manifest;
    std::string track;
    std::string speech_stem;
    std::string residual_stem;
    std::string log_path;
    int jobs = 1;
    bool validate_only = false;
};

CLI::App* add_process_command(CLI::App& app, const std::string& name, const std::string& help, ProcessOptions& o) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("--in", o.input, "input WAV");
    cmd->add_option("--out", o.output, "output WAV");
    cmd->add_option("--manifest", o.manifest, "CSV input_path,output_path[,track_path,speech_stem,residual_stem]");
    cmd->add_option("--jobs", o.jobs, "worker count for manifests")->check(CLI::PositiveNumber);
    cmd->add_option("--track", o.track, "speech-probability track CSV (external VAD)");
    cmd->add_option("--speech-stem", o.speech_stem, "speech stem WAV (external separation)");
    cmd->add_option("--residual-stem", o.residual_stem, "residual stem WAV (external separation)");
    cmd->add_option("--log", o.log_path, "append the JSON Lines run log here instead of stderr");
    cmd->add_flag("--validate-only", o.validate_only, "parse and check every input, write nothing");
    add_pipeline_options(cmd, o.settings);
    return cmd;
}

int run_process(const std::string& command, const ProcessOptions& o, const Environment& env, std::ostream& err) {
    RunLog log(err);
    log.open(o.log_path);
    const config::Resolved resolved = o.settings.resolve(env);

    std::vector<ProcessEntry> entries;
    const bool batch = !o.manifest.empty();
    if (batch) {
        if (!o.input.empty() || !o.output.empty()) {
            throw ValidationError("--manifest cannot be combined with --in/--out");
        }
        entries = read_process_manifest(o.manifest);
    } else {
        if (o.input.empty() || (o.output.empty() && !o.validate_only)) {
            throw ValidationError(command + " requires --in and --out, or --manifest");
        }
        entries.push_back({o.input, o.output, o.track, o.speech_stem, o.residual_stem});
    }

    json run_record = {{"event", "run"}, {"command", command}, {"config", config_json(resolved)},
                       {"seed", resolved.pipeline.scramble.seed}, {"seed_source", resolved.seed_from_entropy ? "entropy" : "config"},
                       {"entries", entries.size()}, {"jobs", o.jobs}, {"validate_only", o.validate_only}};
    if (!o.manifest.empty()) {
        run_record["manifest"] = o.manifest;
    }
    log.write(run_record);

    auto task = [&](std::size_t i) {
        const ProcessEntry& e = entries[i];
        const auto started = std::chrono::steady_clock::now();
        json record = {{"event", "file"}, {"index", i}, {"input", e.input.string()}, {"output", e.output.string()}};
        try {
            PipelineConfig cfg = resolved.pipeline;
            cfg.scramble.seed = batch ? derive_seed(resolved.pipeline.scramble.seed, i) : resolved.pipeline.scramble.seed;
            record["seed"] = cfg.scramble.seed;
            const AudioBuffer input = read_wav(e.input);
            json warnings = json::array();
            if (cfg.vad.mode == VadMode::external && cfg.baseline == Baseline::none) {
                if (e.track.empty()) {
                    throw ValidationError("external VAD needs a track file for " + e.input.string());
                }
                cfg.vad.track = read_track_csv(e.track);
            }
            if (cfg.separation == SeparationMode::external && cfg.baseline == Baseline::none) {
                auto [speech_path, residual_path] = default_stem_paths(e.input);
                if (!e.speech_stem.empty()) speech_path = e.speech_stem;
                if (!e.residual_stem.empty()) residual_path = e.residual_stem;
                LoadedStems stems = load_stems(input, speech_path, residual_path);
                if (stems.reconstruction_warning) {
                    warnings.push_back("stems deviate from the mixture by up to " + std::to_string(stems.reconstruction_error));
                }
                cfg.stems = std::move(stems.stems);
            }
            if (!o.validate_only) {
                const EnforceReport report = enforce_detailed(input, cfg);
                const WriteReport written = write_wav(report.audio, e.output, resolved.format);
                if (written.clipped_samples > 0) {
                    warnings.push_back(std::to_string(written.clipped_samples) + " samples clipped to full scale");
                }
                record["regions"] = report.processed.size();
                record["clipped_samples"] = written.clipped_samples;
            } else {
                cfg.validate();
            }
            record["warnings"] = warnings;
            record["status"] = "ok";
        } catch (const std::exception& ex) {
            record["status"] = "error";
            record["error"] = ex.what();
            record["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            log.write(record);
            throw;
        }
        record["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        log.write(record);
    };
    const auto errors = for_each_entry(entries.size(), o.jobs, task);
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (errors[i]) {
            err << "swr " << command << ": " << entries[i].input.string() << ": " << message_of(errors[i]) << '\n';
        }
    }
    return summarize(errors, log, err, command);
}

struct FragmentOptions {
    Settings settings;
    std::string input;
    std::string output;
};

int run_fragment(const FragmentOptions& o, const Environment& env, std::ostream& out) {
    const config::Resolved resolved = o.settings.resolve(env);
    const AudioBuffer buffer = read_wav(o.input);
    std::ostringstream csv_out;
    csv_out << "frame_index,cut_point_sample\n";
    const std::size_t frame_length =
        std::max<std::size_t>(1, seconds_to_index(resolved.pipeline.scramble.texture_frame_sec, buffer.sample_rate));
    for (std::size_t begin = 0, f = 0; begin < buffer.size(); begin += frame_length, ++f) {
        const std::size_t len = std::min(frame_length, buffer.size() - begin);
        const Segmentation seg = fragment(buffer.view().subspan(begin, len), buffer.sample_rate, resolved.pipeline.fragmentation);
        for (std::size_t c : seg.cut_points) {
            csv_out << f << ',' << begin + c << '\n';
        }
    }
    if (o.output.empty() || o.output == "-") {
        out << csv_out.str();
    } else {
        std::ofstream file(o.output, std::ios::trunc);
        if (!file) {
            throw IoError("cannot write " + o.output);
        }
        file << csv_out.str();
    }
    return kExitOk;
}

struct MixOptions {
    std::string speech;
    std::string background;
    std::string output;
    std::string manifest;
    std::string format = "float32";
    std::string log_path;
    double gain_db = 6.0;
    double duration = 0.0;
    int jobs = 1;
};

int run_mix(const MixOptions& o, std::ostream& err) {
    RunLog log(err);
    log.open(o.log_path);
    struct MixEntry {
        fs::path speech, background, output;
    };
    std::vector<MixEntry> entries;
    if (!o.manifest.empty()) {
        const fs::path base = fs::path(o.manifest).parent_path();
        for (const auto& row : manifest_rows(o.manifest, "speech_path")) {
            if (row.size() != 3) {
                throw ValidationError("mix manifest rows must be speech_path,background_path,output_path");
            }
            entries.push_back({relative_to(base, row[0]), relative_to(base, row[1]), relative_to(base, row[2])});
        }
    } else {
        if (o.speech.empty() || o.background.empty() || o.output.empty()) {
            throw ValidationError("mix requires --speech, --background and --out, or --manifest");
        }
        entries.push_back({o.speech, o.background, o.output});
    }
    if (o.format != "int16" && o.format != "float32") {
        throw ValidationError("--format must be int16 or float32");
    }
    const SampleFormat format = o.format == "int16" ? SampleFormat::int16 : SampleFormat::float32;
    log.write({{"event", "run"}, {"command", "mix"}, {"gain_db", o.gain_db}, {"duration", o.duration},
               {"format", o.format}, {"entries", entries.size()}, {"jobs", o.jobs}});
    const auto errors = for_each_entry(entries.size(), o.jobs, [&](std::size_t i) {
        const MixEntry& e = entries[i];
        json record = {{"event", "file"}, {"index", i}, {"speech", e.speech.string()},
                       {"background", e.background.string()}, {"output", e.output.string()}};
        try {
            AudioBuffer speech = read_wav(e.speech);
            AudioBuffer background = read_wav(e.background);
            if (o.duration > 0.0) {
                speech = pad_or_trim(speech, o.duration);
                background = pad_or_trim(background, o.duration);
            }
            const AudioBuffer mixed = build_mixture(speech, background, {Decibels{o.gain_db}});
            write_wav(mixed, e.output, format);
            record["status"] = "ok";
            log.write(record);
        } catch (const std::exception& ex) {
            record["status"] = "error";
            record["error"] = ex.what();
            log.write(record);
            throw;
        }
    });
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (errors[i]) {
            err << "swr mix: " << entries[i].output.string() << ": " << message_of(errors[i]) << '\n';
        }
    }
    return summarize(errors, log, err, "mix");
}

void emit_report(const json& report, const std::string& path, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << report.dump(2) << '\n';
        return;
    }
    std::ofstream file(path, std::ios::trunc);
    if (!file) {
        throw IoError("cannot write " + path);
    }
    file << report.dump(2) << '\n';
}

struct EvalOptions {
    std::string reference;
    std::vector<std::string> hypotheses;
    std::string original;
    std::string processed;
    std::string test;
    std::string convention = "squared";
    std::string output;
    bool validate_only = false;
};

int run_eval_wer(const EvalOptions& o, std::ostream& out) {
    const metrics::TranscriptSet refs = metrics::read_transcripts(o.reference);
    std::vector<metrics::TranscriptSet> systems;
    for (const auto& h : o.hypotheses) {
        systems.push_back(metrics::read_transcripts(h));
    }
    if (o.validate_only) {
        emit_report({{"metric", "wer"}, {"valid", true}, {"references", refs.size()}, {"systems", systems.size()}}, o.output, out);
        return kExitOk;
    }
    const metrics::WerReport r = metrics::evaluate_wer(refs, systems);
    json per_system = json::array();
    for (std::size_t s = 0; s < r.per_system.size(); ++s) {
        per_system.push_back({{"hypotheses", o.hypotheses[s]}, {"wer", r.per_system[s].mean_wer}, {"clips", r.per_system[s].clips}});
    }
    emit_report({{"metric", "wer"},
                 {"wer", r.mean_wer},
                 {"pooled_wer", r.pooled_wer},
                 {"convention", "per-clip capped mean"},
                 {"tolerance", {{"cap_percent", metrics::kWerCap}}},
                 {"clips_scored", r.clips_scored},
                 {"per_system", per_system},
                 {"warnings", r.warnings}},
                o.output, out);
    return kExitOk;
}

int run_eval_scad(const EvalOptions& o, std::ostream& out) {
    const auto original = metrics::read_logits_csv(o.original);
    const auto processed = metrics::read_logits_csv(o.processed);
    if (o.validate_only) {
        emit_report({{"metric", "scad"}, {"valid", true}, {"original_clips", original.size()}, {"processed_clips", processed.size()}},
                    o.output, out);
        return kExitOk;
    }
    const metrics::ScadReport r = metrics::scad(original, processed);
    emit_report({{"metric", "scad"},
                 {"scad", r.scad},
                 {"original_accuracy", r.original.percent()},
                 {"processed_accuracy", r.processed.percent()},
                 {"trials", r.original.trials},
                 {"convention", "mixture: top-2 of 8; voice-free: top-1 of 8"},
                 {"tolerance", {{"rank_ties", "lexicographic class name"}}},
                 {"tied_ranks", {{"original", r.original.tied}, {"processed", r.processed.tied}}}},
                o.output, out);
    return kExitOk;
}

int run_eval_fad(const EvalOptions& o, std::ostream& out) {
    if (o.convention != "squared" && o.convention != "literal") {
        throw ValidationError("--convention must be squared or literal");
    }
    const metrics::EmbeddingSet ref = metrics::read_embeddings(o.reference);
    const metrics::EmbeddingSet test = metrics::read_embeddings(o.test);
    json warnings = json::array();
    for (const auto& [name, set] : {std::pair{"reference", &ref}, std::pair{"test", &test}}) {
        if (!set->covariance_full_rank_possible()) {
            warnings.push_back(std::string(name) + " set has " + std::to_string(set->size()) + " embeddings for dimension " +
                               std::to_string(set->dim()) + "; covariance is singular");
        }
    }
    if (o.validate_only) {
        emit_report({{"metric", "fad"}, {"valid", true}, {"reference_rows", ref.size()}, {"test_rows", test.size()},
                     {"dim", ref.dim()}, {"warnings", warnings}},
                    o.output, out);
        return kExitOk;
    }
    const auto convention = o.convention == "squared" ? metrics::NormConvention::squared : metrics::NormConvention::literal;
    const metrics::FadTerms t = metrics::fad_terms(metrics::gaussian_stats(ref), metrics::gaussian_stats(test), convention);
    emit_report({{"metric", "fad"},
                 {"fad", t.value},
                 {"mean_term", t.mean_term},
                 {"trace_term", t.trace_term},
                 {"convention", o.convention},
                 {"tolerance", {{"eigenvalue_clamp_relative", metrics::kEigenClampRelative}}},
                 {"reference_rows", ref.size()},
                 {"test_rows", test.size()},
                 {"dim", ref.dim()},
                 {"warnings", warnings}},
                o.output, out);
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Environment& env) {
    CLI::App app{"Speech content privacy enforcement by segment-wise waveform reversal", "swr"};
    app.require_subcommand(1);

    ProcessOptions enforce_opts;
    ProcessOptions attack_opts;
    auto* enforce_cmd = add_process_command(app, "enforce", "render speech unintelligible", enforce_opts);
    auto* attack_cmd = add_process_command(app, "attack", "re-apply the pipeline to processed audio", attack_opts);

    FragmentOptions frag;
    auto* fragment_cmd = app.add_subcommand("fragment", "dump cut points as CSV frame_index,cut_point_sample");
    fragment_cmd->add_option("--in", frag.input, "input WAV")->required();
    fragment_cmd->add_option("--out", frag.output, "output CSV (default stdout)");
    fragment_cmd->add_option("--config", frag.settings.config_path, "key/value configuration file");
    add_fragmentation_options(fragment_cmd, frag.settings);

    MixOptions mix;
    auto* mix_cmd = app.add_subcommand("mix", "build level-matched speech/background mixtures");
    mix_cmd->add_option("--speech", mix.speech, "speech WAV");
    mix_cmd->add_option("--background", mix.background, "background WAV");
    mix_cmd->add_option("--out", mix.output, "output WAV");
    mix_cmd->add_option("--manifest", mix.manifest, "CSV speech_path,background_path,output_path");
    mix_cmd->add_option("--gain-db", mix.gain_db, "background level above speech after RMS matching");
    mix_cmd->add_option("--duration", mix.duration, "pad or trim both inputs to this many seconds first");
    mix_cmd->add_option("--format", mix.format, "int16 | float32");
    mix_cmd->add_option("--jobs", mix.jobs, "worker count")->check(CLI::PositiveNumber);
    mix_cmd->add_option("--log", mix.log_path, "append the JSON Lines run log here instead of stderr");

    EvalOptions ev;
    auto* eval_cmd = app.add_subcommand("eval", "evaluation metrics");
    eval_cmd->require_subcommand(1);
    auto* wer_cmd = eval_cmd->add_subcommand("wer", "word error rate from TSV transcripts");
    wer_cmd->add_option("--ref", ev.reference, "reference transcripts")->required();
    wer_cmd->add_option("--hyp", ev.hypotheses, "hypothesis transcripts, one file per ASR system")->required();
    auto* scad_cmd = eval_cmd->add_subcommand("scad", "source classification accuracy drop");
    scad_cmd->add_option("--original", ev.original, "logits of the original clips")->required();
    scad_cmd->add_option("--processed", ev.processed, "logits of the processed clips")->required();
    auto* fad_cmd = eval_cmd->add_subcommand("fad", "Frechet audio distance between embedding sets");
    fad_cmd->add_option("--ref", ev.reference, "reference embeddings (VGEM or CSV)")->required();
    fad_cmd->add_option("--test", ev.test, "test embeddings (VGEM or CSV)")->required();
    fad_cmd->add_option("--convention", ev.convention, "squared | literal mean term");
    for (auto* c : {wer_cmd, scad_cmd, fad_cmd}) {
        c->add_option("--out", ev.output, "JSON report path (default stdout)");
        c->add_flag("--validate-only", ev.validate_only, "parse inputs and report their shape only");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "swr: " << e.what() << '\n';
        err << app.help();
        return kExitValidation;
    }

    try {
        if (enforce_cmd->parsed()) {
            return run_process("enforce", enforce_opts, env, err);
        }
        if (attack_cmd->parsed()) {
            return run_process("attack", attack_opts, env, err);
        }
        if (fragment_cmd->parsed()) {
            return run_fragment(frag, env, out);
        }
        if (mix_cmd->parsed()) {
            return run_mix(mix, err);
        }
        if (wer_cmd->parsed()) {
            return run_eval_wer(ev, out);
        }
        if (scad_cmd->parsed()) {
            return run_eval_scad(ev, out);
        }
        if (fad_cmd->parsed()) {
            return run_eval_fad(ev, out);
        }
    } catch (const IoError& e) {
        err << "swr: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        err << "swr: " << e.what() << '\n';
        return kExitValidation;
    }
    err << app.help();
    return kExitValidation;
}

}  // namespace swr::cli
