#include "voxweave/cli.hpp"

#include <charconv>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "voxweave/audio.hpp"
#include "voxweave/error.hpp"
#include "voxweave/eval.hpp"
#include "voxweave/golden.hpp"
#include "voxweave/interleave.hpp"
#include "voxweave/metrics.hpp"
#include "voxweave/rewards.hpp"
#include "voxweave/service.hpp"
#include "voxweave/text.hpp"
#include "voxweave/tooling.hpp"
#include "voxweave/transcript.hpp"
#include "voxweave/wav.hpp"

namespace voxweave {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::vector<std::uint32_t> read_token_file(const std::string& path) {
    std::vector<std::uint32_t> ids;
    std::size_t lineno = 0;
    for (const std::string& line : read_lines(path)) {
        ++lineno;
        const std::string_view s = trim(line);
        if (s.empty()) continue;
        std::uint32_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size())
            throw InvalidConfig(path + ":" + std::to_string(lineno) + ": not a token id: '" + std::string(s) + "'");
        ids.push_back(v);
    }
    return ids;
}

void write_token_file(const std::string& path, std::span<const std::uint32_t> ids) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (std::uint32_t id : ids) out << id << '\n';
}

std::vector<std::string> read_jsonl(const std::string& path) {
    std::vector<std::string> out;
    for (std::string& line : read_lines(path))
        if (!trim(line).empty()) out.push_back(std::move(line));
    return out;
}

InterleaveConfig parse_ratio(const std::string& ratio, InterleaveConfig cfg) {
    const auto colon = ratio.find(':');
    if (colon == std::string::npos) throw InvalidConfig("ratio must look like 1:3, got '" + ratio + "'");
    try {
        cfg.n_text = static_cast<std::uint32_t>(std::stoul(ratio.substr(0, colon)));
        cfg.n_audio = static_cast<std::uint32_t>(std::stoul(ratio.substr(colon + 1)));
    } catch (const std::exception&) {
        throw InvalidConfig("ratio must look like 1:3, got '" + ratio + "'");
    }
    cfg.validate();
    return cfg;
}

std::string fixed(double v, int dp) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(dp) << v;
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
}

std::optional<ToolCall> tool_call_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    ToolCall c;
    c.name = j.at("name").get<std::string>();
    if (j.contains("arguments")) c.arguments = j["arguments"].get<std::map<std::string, std::string>>();
    return c;
}

// Options shared by several subcommands.
struct Opts {
    // mux / demux
    std::string text_path, audio_path, output, input, ratio = "1:3";
    std::uint32_t text_pad = 0, audio_pad = kDefaultAudioVocabSize - 1, vocab = kDefaultAudioVocabSize;
    bool strip = false;
    // vad
    std::string wav;
    VadConfig vad;
    bool as_json = false;
    // library
    std::string dir, query;
    std::size_t k = 1;
    // replay
    std::string transcript;
    // score
    std::vector<std::string> refs;
    std::string hyp, unit = "words", tokenize = "whitespace", golden;
    bool smooth = false, per_utterance = false;
    std::size_t max_n = 4;
    // bench
    std::string dataset, model, audio_root, report_out;
    std::size_t workers = 4, per_tool = 200, per_task = 50;
    std::uint32_t seed = 7;
    // reward
    std::string traces;
    std::size_t max_len = 0;
    // serve
    std::string config_path, host, backend, library, transcript_dir, log_level;
    int port = -1;
    double eou_ms = -1.0;
};

int do_mux(const Opts& o, std::ostream& out) {
    InterleaveConfig cfg;
    cfg.text_pad = o.text_pad;
    cfg.audio_pad = o.audio_pad;
    cfg.audio_vocab_size = o.vocab;
    cfg = parse_ratio(o.ratio, cfg);
    const auto text = read_token_file(o.text_path);
    const auto audio = read_token_file(o.audio_path);
    const InterleavedSequence seq = mux(text, audio, cfg);
    std::ofstream f(o.output, std::ios::binary);
    if (!f) throw IoError("cannot write " + o.output);
    write_ilv(f, seq);
    out << "wrote " << seq.size() << " tokens (" << seq.blocks() << " blocks) to " << o.output << '\n';
    return kExitOk;
}

int do_demux(const Opts& o, std::ostream& out) {
    std::ifstream f(o.input, std::ios::binary);
    if (!f) throw IoError("cannot open " + o.input);
    const InterleavedSequence seq = read_ilv(f, o.vocab);
    const Channels ch = demux(seq, o.strip);
    write_token_file(o.text_path, ch.text);
    write_token_file(o.audio_path, ch.audio);
    out << "text " << ch.text.size() << " tokens, audio " << ch.audio.size() << " tokens\n";
    return kExitOk;
}

int do_vad(const Opts& o, std::ostream& out) {
    const PcmClip clip = read_wav(o.wav);
    for (const SpeechSpan& sp : vad_segments(clip, o.vad))
        out << ordered_json{{"start_ms", sp.start_ms}, {"end_ms", sp.end_ms}}.dump() << '\n';
    if (o.as_json) {
        const std::size_t enc = encoder_frames(clip);
        out << ordered_json{{"duration_s", clip.duration_seconds()},
                            {"encoder_frames", enc},
                            {"adaptor_frames", adaptor_frames(enc)}}
                   .dump()
            << '\n';
    }
    return kExitOk;
}

int do_library_build(const Opts& o, std::ostream& out) {
    const std::size_t n = build_library_sidecar(o.dir);
    out << "wrote " << n << " embeddings to " << (std::filesystem::path(o.dir) / kSidecarName).string() << '\n';
    return kExitOk;
}

int do_library_search(const Opts& o, std::ostream& out) {
    const VoiceLibrary lib = VoiceLibrary::load(o.dir);
    const auto hits = audio_search(o.query, o.k, lib);
    if (o.as_json) {
        ordered_json arr = ordered_json::array();
        for (const SearchHit& h : hits)
            arr.push_back({{"id", h.entry->id}, {"similarity", h.similarity},
                           {"transcription", h.entry->transcription}, {"description", h.entry->description}});
        out << arr.dump(2) << '\n';
    } else {
        std::size_t rank = 0;
        for (const SearchHit& h : hits)
            out << ++rank << '\t' << h.entry->id << '\t' << fixed(h.similarity, 4) << '\t' << h.entry->transcription
                << '\n';
    }
    return kExitOk;
}

int do_replay(const Opts& o, std::ostream& out, std::ostream& err) {
    std::ifstream in(o.transcript);
    if (!in) throw IoError("cannot open " + o.transcript);
    const ReplayReport report = replay_transcript(in);
    for (const std::string& line : report.turn_lines) out << line << '\n';
    out << "turns=" << report.turns << " identical=" << (report.identical() ? "yes" : "no") << '\n';
    for (const std::string& m : report.mismatches) err << "mismatch: " << m << '\n';
    return report.identical() ? kExitOk : kExitInputError;
}

struct ScorePair {
    std::string id;
    std::vector<std::string> refs;
    std::string hyp;
};

/// {id, ref, hyp} records (ref may be a list for BLEU), or line-aligned
/// --ref/--hyp files.
std::vector<ScorePair> load_pairs(const Opts& o) {
    std::vector<ScorePair> pairs;
    if (!o.input.empty()) {
        if (!o.refs.empty() || !o.hyp.empty()) throw InvalidConfig("use either --input or --ref/--hyp");
        for (const std::string& line : read_jsonl(o.input)) {
            try {
                const json j = json::parse(line);
                ScorePair p;
                p.id = j.contains("id") ? (j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump())
                                        : std::to_string(pairs.size() + 1);
                if (j.at("ref").is_array())
                    p.refs = j["ref"].get<std::vector<std::string>>();
                else
                    p.refs.push_back(j["ref"].get<std::string>());
                p.hyp = j.at("hyp").get<std::string>();
                pairs.push_back(std::move(p));
            } catch (const json::exception& e) {
                throw InvalidConfig("score record: " + std::string(e.what()));
            }
        }
        return pairs;
    }
    if (o.refs.empty() || o.hyp.empty()) throw InvalidConfig("pass --input, or --ref and --hyp");
    const auto hyps = read_lines(o.hyp);
    pairs.resize(hyps.size());
    for (std::size_t i = 0; i < hyps.size(); ++i) {
        pairs[i].id = std::to_string(i + 1);
        pairs[i].hyp = hyps[i];
    }
    for (const std::string& path : o.refs) {
        const auto lines = read_lines(path);
        if (lines.size() != hyps.size())
            throw InvalidConfig(path + " has " + std::to_string(lines.size()) + " lines, hypothesis " +
                                std::to_string(hyps.size()));
        for (std::size_t i = 0; i < lines.size(); ++i) pairs[i].refs.push_back(lines[i]);
    }
    return pairs;
}

void print_report(const MetricReport& r, bool as_json, std::ostream& out) {
    if (as_json) {
        ordered_json j;
        j["name"] = r.name;
        j["value"] = r.value ? ordered_json(round_half_away(*r.value, 2)) : ordered_json(nullptr);
        j["numerator"] = r.numerator;
        j["denominator"] = r.denominator;
        ordered_json br = ordered_json::object();
        for (const auto& [k, v] : r.breakdown) br[k] = v ? ordered_json(round_half_away(*v, 2)) : ordered_json(nullptr);
        j["breakdown"] = br;
        out << j.dump() << '\n';
        return;
    }
    for (const auto& [k, v] : r.breakdown) out << k << '\t' << format_percent(v) << '\n';
    out << r.name << ' ' << format_percent(r.value) << " (" << r.numerator << '/' << r.denominator << ")\n";
}

int do_score_asr(const Opts& o, std::ostream& out) {
    const NormalizationProfile profile =
        o.unit == "chars" ? NormalizationProfile::chinese_chars() : NormalizationProfile::english_words();
    MetricReport report;
    report.name = o.unit == "chars" ? "CER" : "WER";
    ErrorRateTotals totals;
    for (const ScorePair& p : load_pairs(o)) {
        if (p.refs.size() != 1) throw InvalidConfig("record '" + p.id + "' needs exactly one reference");
        totals = accumulate_error_rate(totals, p.refs.front(), p.hyp, profile);
        if (o.per_utterance) report.breakdown.emplace_back(p.id, error_rate(p.refs.front(), p.hyp, profile));
    }
    report.value = totals.rate();
    report.numerator = totals.edits.distance;
    report.denominator = totals.reference_units;
    print_report(report, o.as_json, out);
    if (!o.as_json)
        out << "S=" << totals.edits.substitutions << " I=" << totals.edits.insertions
            << " D=" << totals.edits.deletions << " normalization=" << NormalizationProfile::kVersion << '\n';
    return kExitOk;
}

TokenList bleu_tokens(const std::string& text, const std::string& mode) {
    if (mode == "chars") {
        TokenList out;
        for (char32_t cp : utf8_decode(text))
            if (!is_whitespace(cp)) out.push_back(utf8_encode(cp));
        return out;
    }
    return whitespace_tokens(text);
}

int do_score_bleu(const Opts& o, std::ostream& out) {
    if (o.tokenize != "whitespace" && o.tokenize != "chars")
        throw InvalidConfig("--tokenize must be whitespace or chars");
    BleuStats stats;
    MetricReport report;
    report.name = "BLEU";
    for (const ScorePair& p : load_pairs(o)) {
        if (p.refs.empty()) throw InvalidConfig("record '" + p.id + "' has no reference");
        std::vector<TokenList> refs;
        for (const std::string& r : p.refs) refs.push_back(bleu_tokens(r, o.tokenize));
        const BleuStats s = bleu_stats(refs, bleu_tokens(p.hyp, o.tokenize), o.max_n);
        stats.add(s);
        if (o.per_utterance)
            report.breakdown.emplace_back(p.id, bleu_from_stats(s, o.smooth ? BleuSmoothing::Floor : BleuSmoothing::None));
    }
    report.value = bleu_from_stats(stats, o.smooth ? BleuSmoothing::Floor : BleuSmoothing::None);
    report.numerator = stats.matches.empty() ? 0 : stats.matches.front();
    report.denominator = stats.totals.empty() ? 0 : stats.totals.front();
    print_report(report, o.as_json, out);
    if (!o.as_json) {
        out << "matches";
        for (std::size_t n = 0; n < stats.matches.size(); ++n) out << ' ' << stats.matches[n] << '/' << stats.totals[n];
        out << " hyp_len=" << stats.hyp_length << " ref_len=" << stats.ref_length << '\n';
    }
    return kExitOk;
}

int do_score_toolcall(const Opts& o, std::ostream& out) {
    std::map<std::string, std::vector<ToolCallOutcome>> buckets;
    for (const std::string& line : read_jsonl(o.input)) {
        json j;
        try {
            j = json::parse(line);
            ToolCallOutcome oc;
            // Either {gold: {trigger, tool, arguments}} or flat gold_* fields.
            const json gold = j.contains("gold") ? j["gold"]
                                                 : json{{"trigger", j.at("gold_trigger")},
                                                        {"tool", j.value("gold_tool", json())},
                                                        {"arguments", j.value("gold_params", json())}};
            oc.gold_trigger = gold.at("trigger").get<bool>();
            if (gold.contains("tool") && !gold["tool"].is_null()) oc.gold_tool = gold["tool"].get<std::string>();
            if (gold.contains("arguments") && !gold["arguments"].is_null())
                oc.gold_params = gold["arguments"].get<std::map<std::string, std::string>>();
            if (j.contains("predicted")) oc.predicted_call = tool_call_from_json(j["predicted"]);
            const std::string tool = j.value("tool", oc.gold_tool.value_or("all"));
            buckets[tool].push_back(std::move(oc));
        } catch (const json::exception& e) {
            throw InvalidConfig("toolcall outcome: " + std::string(e.what()));
        }
    }
    std::vector<EvalRecord> records;
    std::vector<std::optional<ToolCallOutcome>> outcomes;
    for (auto& [tool, outs] : buckets)
        for (auto& oc : outs) {
            EvalRecord r;
            r.id = tool + "-" + std::to_string(records.size());
            r.task = tool;
            records.push_back(std::move(r));
            outcomes.emplace_back(std::move(oc));
        }
    const ToolcallReport report = summarize_toolcall(records, outcomes);
    out << (o.as_json ? report_json(report) + "\n" : report_table(report));
    return kExitOk;
}

int do_score_table(const Opts& o, std::ostream& out) {
    const std::filesystem::path path =
        o.golden.empty() ? default_data_dir() / "golden_tables.json" : std::filesystem::path(o.golden);
    const auto tables = load_golden_tables(path);
    const auto checks = check_golden_tables(tables);
    bool ok = true;
    ordered_json arr = ordered_json::array();
    for (const GoldenCheck& c : checks) {
        const std::string status = c.matches ? "ok" : (c.source_reported ? "source-reported" : "MISMATCH");
        if (!c.matches && !c.source_reported) ok = false;
        if (o.as_json) {
            arr.push_back({{"table", c.table}, {"label", c.label}, {"computed", fixed(c.computed, c.dp)},
                           {"reported", fixed(c.reported, c.dp)}, {"status", status}});
        } else {
            out << std::left << std::setw(16) << c.table << std::setw(10) << c.label << std::right << std::setw(8)
                << fixed(c.computed, c.dp) << std::setw(8) << fixed(c.reported, c.dp) << "  " << status << '\n';
        }
    }
    if (o.as_json) out << arr.dump(2) << '\n';
    return ok ? kExitOk : kExitInputError;
}

int do_bench(const Opts& o, bool paralinguistic, std::ostream& out) {
    const auto records = load_manifest(o.dataset);
    if (records.empty()) throw InvalidConfig("dataset " + o.dataset + " is empty");
    const BackendFactory factory(o.model);
    const std::filesystem::path root =
        o.audio_root.empty() ? std::filesystem::path(o.dataset).parent_path() : std::filesystem::path(o.audio_root);
    const ModelPipeline pipeline(factory, SessionConfig{}, root);
    std::string json_text, table;
    if (paralinguistic) {
        EchoTranscriber asr;
        ExactMatchJudge judge;
        const auto report = run_paralinguistic(records, pipeline, asr, judge, {o.workers});
        json_text = report_json(report);
        table = report_table(report);
    } else {
        const auto report = run_toolcall(records, pipeline, {o.workers});
        json_text = report_json(report);
        table = report_table(report);
    }
    if (!o.report_out.empty()) write_text_file(o.report_out, json_text + "\n");
    out << (o.as_json ? json_text + "\n" : table);
    return kExitOk;
}

int do_bench_fixtures(const Opts& o, std::ostream& out) {
    const std::filesystem::path dir(o.dir);
    std::filesystem::create_directories(dir);
    const auto dump = [&dir](const std::string& name, const auto& items, auto line_of) {
        std::string text;
        for (const auto& item : items) text += line_of(item) + "\n";
        write_text_file((dir / name).string(), text);
    };
    const ToolcallFixture tc = make_toolcall_fixture(o.per_tool, o.seed);
    dump("toolcall.jsonl", tc.records, manifest_line);
    dump("toolcall_perfect.script.jsonl", tc.perfect, script_line);
    const ParalinguisticFixture pl = make_paralinguistic_fixture(o.per_task, o.seed + 4);
    dump("paralinguistic.jsonl", pl.records, manifest_line);
    dump("paralinguistic_perfect.script.jsonl", pl.perfect, script_line);
    out << "wrote " << tc.records.size() << " tool-call and " << pl.records.size() << " paralinguistic records to "
        << dir.string() << '\n';
    return kExitOk;
}

int do_reward_score(const Opts& o, std::ostream& out, std::ostream& err) {
    struct Row {
        std::string id;
        std::string group;
        double reward = 0.0;
        std::optional<double> advantage;
    };
    std::vector<Row> rows;
    for (const std::string& line : read_jsonl(o.traces)) {
        try {
            const json j = json::parse(line);
            Row r;
            r.id = j.at("id").is_string() ? j["id"].get<std::string>() : j["id"].dump();
            if (j.contains("group_id"))
                r.group = j["group_id"].is_string() ? j["group_id"].get<std::string>() : j["group_id"].dump();
            if (j.contains("reward") && !j["reward"].is_null()) {
                r.reward = j["reward"].get<double>();
            } else {
                if (o.max_len == 0) throw InvalidConfig("record '" + r.id + "' has no reward; pass --max-len");
                const auto thinking = j.at("thinking_tokens").get<std::int64_t>();
                if (thinking < 0) throw InvalidConfig("record '" + r.id + "' has negative thinking_tokens");
                ThinkingTrace t;
                t.thinking_tokens = static_cast<std::size_t>(thinking);
                r.reward = binary_length_reward(t, o.max_len);
            }
            rows.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw InvalidConfig("trace record: " + std::string(e.what()));
        }
    }
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (!rows[i].group.empty()) groups[rows[i].group].push_back(i);
    for (const auto& [gid, members] : groups) {
        if (members.size() < 2) {
            err << "warning: group '" << gid << "' has a single record; no advantage\n";
            continue;
        }
        std::vector<double> rewards;
        for (std::size_t i : members) rewards.push_back(rows[i].reward);
        const auto adv = group_advantage(rewards);
        for (std::size_t k = 0; k < members.size(); ++k) rows[members[k]].advantage = adv[k];
    }
    for (const Row& r : rows) {
        ordered_json j;
        j["id"] = r.id;
        j["group_id"] = r.group.empty() ? ordered_json(nullptr) : ordered_json(r.group);
        j["reward"] = r.reward;
        j["advantage"] = r.advantage ? ordered_json(*r.advantage) : ordered_json(nullptr);
        out << j.dump() << '\n';
    }
    return kExitOk;
}

int do_serve(const Opts& o, std::ostream& out, std::ostream& err) {
    ServiceConfig cfg;
    if (!o.config_path.empty()) cfg = load_service_config(o.config_path, cfg);
    apply_env_overrides(cfg);
    if (!o.host.empty()) cfg.host = o.host;
    if (o.port >= 0) cfg.set("port", std::to_string(o.port));
    if (!o.backend.empty()) cfg.backend = o.backend;
    if (!o.library.empty()) cfg.library = o.library;
    if (!o.transcript_dir.empty()) cfg.transcript_dir = o.transcript_dir;
    if (!o.log_level.empty()) cfg.log_level = o.log_level;
    if (o.eou_ms > 0) cfg.end_of_utterance_ms = o.eou_ms;

    // Block the stop signals before any thread starts so only sigwait sees them.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    Server server(cfg, &err);
    server.start();
    out << "listening on " << cfg.host << ':' << server.port() << std::endl;
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
    pthread_sigmask(SIG_UNBLOCK, &set, nullptr);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"voxweave: interleaved speech-text session runtime, metrics and benchmarks", "voxweave"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Print help for every subcommand");
    Opts o;

    auto* mux_cmd = app.add_subcommand("mux", "Interleave text and audio token files into an ILV1 stream");
    mux_cmd->add_option("--text", o.text_path, "Text token file, one id per line")->required();
    mux_cmd->add_option("--audio", o.audio_path, "Audio token file, one id per line")->required();
    mux_cmd->add_option("-o,--output", o.output, "Output .ilv file")->required();
    mux_cmd->add_option("--ratio", o.ratio, "Text:audio block ratio")->capture_default_str();
    mux_cmd->add_option("--text-pad", o.text_pad, "Text padding id")->capture_default_str();
    mux_cmd->add_option("--audio-pad", o.audio_pad, "Audio padding id")->capture_default_str();
    mux_cmd->add_option("--vocab", o.vocab, "Audio vocabulary size")->capture_default_str();

    auto* demux_cmd = app.add_subcommand("demux", "Split an ILV1 stream back into token files");
    demux_cmd->add_option("-i,--input", o.input, "Input .ilv file")->required();
    demux_cmd->add_option("--text", o.text_path, "Text token output file")->required();
    demux_cmd->add_option("--audio", o.audio_path, "Audio token output file")->required();
    demux_cmd->add_flag("--strip", o.strip, "Remove trailing padding");
    demux_cmd->add_option("--vocab", o.vocab, "Audio vocabulary size")->capture_default_str();

    auto* vad_cmd = app.add_subcommand("vad", "Detect speech segments in a mono WAV file");
    vad_cmd->add_option("wav", o.wav, "Input WAV")->required();
    vad_cmd->add_option("--window-ms", o.vad.window_ms, "Analysis window")->capture_default_str();
    vad_cmd->add_option("--threshold-dbfs", o.vad.energy_threshold_dbfs, "Energy threshold")->capture_default_str();
    vad_cmd->add_option("--hangover-ms", o.vad.hangover_ms, "Gap bridged between segments")->capture_default_str();
    vad_cmd->add_option("--min-segment-ms", o.vad.min_segment_ms, "Shortest kept segment")->capture_default_str();
    vad_cmd->add_flag("--frames", o.as_json, "Append a record with the clip's encoder and adaptor frame counts");

    auto* lib_cmd = app.add_subcommand("library", "Voice library tools");
    lib_cmd->require_subcommand(1);
    auto* lib_build = lib_cmd->add_subcommand("build", "Compute the embedding sidecar of a library directory");
    lib_build->add_option("--dir", o.dir, "Library directory holding manifest.jsonl")->required();
    auto* lib_search = lib_cmd->add_subcommand("search", "Search a library by text query");
    lib_search->add_option("--dir", o.dir, "Library directory")->required();
    lib_search->add_option("--query", o.query, "Query text")->required();
    lib_search->add_option("-k", o.k, "Number of hits")->capture_default_str();
    lib_search->add_flag("--json", o.as_json, "JSON output");

    auto* replay_cmd = app.add_subcommand("replay", "Re-run a session transcript and compare the results");
    replay_cmd->add_option("transcript", o.transcript, "Transcript (.jsonl)")->required();

    auto* score_cmd = app.add_subcommand("score", "Metrics over files");
    score_cmd->require_subcommand(1);
    auto* score_asr = score_cmd->add_subcommand("asr", "Corpus WER or CER over line-aligned files");
    score_asr->add_option("--input", o.input, "JSON lines {id, ref, hyp}");
    score_asr->add_option("--ref", o.refs, "Reference lines (with --hyp)");
    score_asr->add_option("--hyp", o.hyp, "Hypothesis lines, aligned with --ref");
    score_asr->add_flag("--json", o.as_json, "JSON output");
    score_asr->add_option("--unit", o.unit, "words (WER) or chars (CER)")
        ->check(CLI::IsMember({"words", "chars"}))
        ->capture_default_str();
    score_asr->add_flag("--per-utterance", o.per_utterance, "Also print each line's rate");
    auto* score_bleu = score_cmd->add_subcommand("bleu", "Corpus BLEU over line-aligned files");
    score_bleu->add_option("--input", o.input, "JSON lines {id, ref, hyp}; ref may be a list");
    score_bleu->add_option("--ref", o.refs, "Reference lines; repeat for multiple references");
    score_bleu->add_option("--hyp", o.hyp, "Hypothesis lines, aligned with --ref");
    score_bleu->add_flag("--per-utterance", o.per_utterance, "Also print sentence scores");
    score_bleu->add_flag("--json", o.as_json, "JSON output");
    score_bleu->add_option("--tokenize", o.tokenize, "whitespace or chars")->capture_default_str();
    score_bleu->add_option("--max-n", o.max_n, "Highest n-gram order")->check(CLI::Range(1, 9))->capture_default_str();
    score_bleu->add_flag("--smooth", o.smooth, "Floor smoothing for zero-match orders");
    auto* score_tool = score_cmd->add_subcommand("toolcall", "Tool-call funnel over outcome records");
    score_tool->add_option("--input", o.input, "JSON lines {id, tool, gold: {trigger, tool, arguments}, predicted}")
        ->required();
    score_tool->add_flag("--json", o.as_json, "JSON output");
    auto* score_table = score_cmd->add_subcommand("table", "Recompute the bundled golden table averages");
    score_table->add_option("--golden", o.golden, "Golden table file (default: bundled)");
    score_table->add_flag("--json", o.as_json, "JSON output");

    auto* bench_cmd = app.add_subcommand("bench", "Benchmarks");
    bench_cmd->require_subcommand(1);
    std::vector<CLI::App*> bench_runs;
    for (const char* name : {"paralinguistic", "toolcall"}) {
        auto* b = bench_cmd->add_subcommand(name, std::string("Run the ") + name + " benchmark");
        b->add_option("--dataset", o.dataset, "Manifest (.jsonl)")->required();
        b->add_option("--model", o.model, "Backend spec: scripted:<path> or stub:")->required();
        b->add_option("--workers", o.workers, "Worker threads")->capture_default_str();
        b->add_option("--audio-root", o.audio_root, "Base directory of relative audio paths");
        b->add_option("--report", o.report_out, "Also write the JSON report here");
        b->add_flag("--json", o.as_json, "Print JSON instead of a table");
        bench_runs.push_back(b);
    }
    auto* bench_fix = bench_cmd->add_subcommand("fixtures", "Write the synthetic benchmark fixtures");
    bench_fix->add_option("--out", o.dir, "Output directory")->required();
    bench_fix->add_option("--per-tool", o.per_tool, "Positive conversations per tool")->capture_default_str();
    bench_fix->add_option("--per-task", o.per_task, "Records per paralinguistic task")->capture_default_str();
    bench_fix->add_option("--seed", o.seed, "Generator seed")->capture_default_str();

    auto* reward_cmd = app.add_subcommand("reward", "Reward shaping");
    reward_cmd->require_subcommand(1);
    auto* reward_score = reward_cmd->add_subcommand("score", "Rewards and group advantages for trace records");
    reward_score->add_option("--traces", o.traces, "JSON lines {id, thinking_tokens, group_id, reward}")->required();
    reward_score->add_option("--max-len", o.max_len, "Longest rewarded thinking length");

    auto* serve_cmd = app.add_subcommand("serve", "Run the streaming session service");
    serve_cmd->add_option("--config", o.config_path, "key=value configuration file");
    serve_cmd->add_option("--host", o.host, "Bind address");
    serve_cmd->add_option("--port", o.port, "TCP port (0 picks one)");
    serve_cmd->add_option("--backend", o.backend, "Backend spec: scripted:<path> or stub:");
    serve_cmd->add_option("--library", o.library, "Voice library directory");
    serve_cmd->add_option("--transcript-dir", o.transcript_dir, "Write one transcript per session here");
    serve_cmd->add_option("--end-of-utterance-ms", o.eou_ms, "Silence that ends an utterance");
    serve_cmd->add_option("--log-level", o.log_level, "debug, info, warn, error or off");

    std::vector<std::string> argv_store{"voxweave"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (std::string& s : argv_store) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        if (dynamic_cast<const CLI::RequiredError*>(&e) == nullptr) err << app.help();
        return kExitInputError;
    }

    try {
        if (mux_cmd->parsed()) return do_mux(o, out);
        if (demux_cmd->parsed()) return do_demux(o, out);
        if (vad_cmd->parsed()) return do_vad(o, out);
        if (lib_build->parsed()) return do_library_build(o, out);
        if (lib_search->parsed()) return do_library_search(o, out);
        if (replay_cmd->parsed()) return do_replay(o, out, err);
        if (score_asr->parsed()) return do_score_asr(o, out);
        if (score_bleu->parsed()) return do_score_bleu(o, out);
        if (score_tool->parsed()) return do_score_toolcall(o, out);
        if (score_table->parsed()) return do_score_table(o, out);
        if (bench_runs[0]->parsed()) return do_bench(o, true, out);
        if (bench_runs[1]->parsed()) return do_bench(o, false, out);
        if (bench_fix->parsed()) return do_bench_fixtures(o, out);
        if (reward_score->parsed()) return do_reward_score(o, out, err);
        if (serve_cmd->parsed()) return do_serve(o, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternalError;
    }
    err << app.help();
    return kExitInputError;
}

}  // namespace voxweave
