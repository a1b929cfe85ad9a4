#include "voxweave/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "voxweave/error.hpp"
#include "voxweave/text.hpp"
#include "voxweave/wav.hpp"

namespace voxweave {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Results are
/// written by index, so the output order never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn fn) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
}

/// Benchmark tool resolution: the call is parsed and acknowledged without
/// touching any client, so scores depend only on what the model emitted.
class BenchDispatcher : public ToolDispatcher {
public:
    ToolResult resolve(std::string_view span) override {
        ToolResult r;
        try {
            r.call = parse_tool_call(span);
            r.ok = true;
            r.payload = "ok";
        } catch (const Error& e) {
            r.payload = e.what();
        }
        return r;
    }
};

void check_rates(std::span<const PcmClip> clips) {
    for (const PcmClip& c : clips)
        if (c.sample_rate != clips.front().sample_rate)
            throw RateMismatch("clip rates differ: " + std::to_string(clips.front().sample_rate) + " vs " +
                               std::to_string(c.sample_rate));
}

void peak_normalize(PcmClip& clip) {
    float peak = 0.0f;
    for (float s : clip.samples) peak = std::max(peak, std::abs(s));
    if (peak > 1.0f)
        for (float& s : clip.samples) s /= peak;
}

std::size_t pick(std::mt19937& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

}  // namespace

bool is_paralinguistic_task(std::string_view task) {
    return std::find(kParalinguisticTasks.begin(), kParalinguisticTasks.end(), task) != kParalinguisticTasks.end();
}

// ---------------------------------------------------------------------------
// Manifest

EvalRecord parse_manifest_line(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw IoError(std::string("manifest: ") + e.what());
    }
    EvalRecord r;
    try {
        r.id = j.at("id").get<std::string>();
        r.task = j.at("task").get<std::string>();
        if (j.contains("audio")) {
            if (j["audio"].is_string())
                r.audio.push_back(j["audio"].get<std::string>());
            else
                r.audio = j["audio"].get<std::vector<std::string>>();
        }
        r.turns = j.value("turns", std::size_t{1});
        r.split = j.value("split", "");
        const json& gold = j.at("gold");
        if (gold.is_string()) {
            r.gold = gold.get<std::string>();
        } else {
            r.gold_trigger = gold.at("trigger").get<bool>();
            if (gold.contains("tool") && !gold["tool"].is_null()) r.gold_tool = gold["tool"].get<std::string>();
            if (gold.contains("arguments") && !gold["arguments"].is_null())
                r.gold_params = gold["arguments"].get<std::map<std::string, std::string>>();
        }
    } catch (const json::exception& e) {
        throw IoError("manifest record '" + r.id + "': " + e.what());
    }
    if (r.id.empty()) throw IoError("manifest record without id");
    if (r.turns == 0) throw IoError("manifest record '" + r.id + "' has zero turns");
    return r;
}

std::vector<EvalRecord> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path.string());
    std::vector<EvalRecord> out;
    std::string line;
    while (std::getline(in, line))
        if (!trim(line).empty()) out.push_back(parse_manifest_line(line));
    return out;
}

std::string manifest_line(const EvalRecord& r) {
    ordered_json j;
    j["id"] = r.id;
    j["task"] = r.task;
    j["audio"] = r.audio;
    if (is_paralinguistic_task(r.task) || !r.gold.empty()) {
        j["gold"] = r.gold;
    } else {
        ordered_json gold;
        gold["trigger"] = r.gold_trigger;
        gold["tool"] = r.gold_tool ? ordered_json(*r.gold_tool) : ordered_json(nullptr);
        gold["arguments"] = r.gold_params ? ordered_json(*r.gold_params) : ordered_json(nullptr);
        j["gold"] = gold;
    }
    j["turns"] = r.turns;
    j["split"] = r.split;
    return j.dump();
}

// ---------------------------------------------------------------------------
// Judging

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::Correct: return "correct";
        case Verdict::Incorrect: return "incorrect";
        case Verdict::Unscored: return "unscored";
    }
    return "unscored";
}

JudgeVerdict ExactMatchJudge::judge(const EvalRecord& record, std::string_view transcript) {
    JudgeVerdict v;
    v.record_id = record.id;
    v.transcript = std::string(transcript);
    const std::string got = normalize_text(transcript, profile_);
    const std::string want = normalize_text(record.gold, profile_);
    v.verdict = got == want ? Verdict::Correct : Verdict::Incorrect;
    v.rationale = v.correct() ? "exact match" : "expected '" + want + "', got '" + got + "'";
    return v;
}

PromptJudge::PromptJudge(std::string prompt_template, TextCompleter& completer)
    : template_(std::move(prompt_template)), completer_(completer) {
    if (template_.find("{{response}}") == std::string::npos)
        throw InvalidConfig("judge prompt template has no {{response}} slot");
}

std::string PromptJudge::load_template(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open judge prompt " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string PromptJudge::render(const EvalRecord& record, std::string_view transcript) const {
    std::string out = template_;
    const auto replace_all = [&out](std::string_view key, std::string_view value) {
        for (std::size_t pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos + value.size()))
            out.replace(pos, key.size(), value);
    };
    replace_all("{{task}}", record.task);
    replace_all("{{gold}}", record.gold);
    replace_all("{{response}}", transcript);
    return out;
}

JudgeVerdict PromptJudge::judge(const EvalRecord& record, std::string_view transcript) {
    JudgeVerdict v;
    v.record_id = record.id;
    v.transcript = std::string(transcript);
    const std::string reply = completer_.complete(render(record, transcript));
    v.rationale = std::string(trim(reply));
    std::string first;
    std::istringstream(v.rationale) >> first;
    first = ascii_lower(first);
    while (!first.empty() && !std::isalpha(static_cast<unsigned char>(first.back()))) first.pop_back();
    if (first == "correct")
        v.verdict = Verdict::Correct;
    else if (first == "incorrect")
        v.verdict = Verdict::Incorrect;
    return v;
}

// ---------------------------------------------------------------------------
// Model pipeline

PcmClip synthetic_clip(std::string_view key, double seconds, std::uint32_t sample_rate) {
    const std::uint64_t h = fnv1a(key);
    const double freq = 120.0 + static_cast<double>(h % 200);
    const double wobble = 2.0 + static_cast<double>((h >> 8) % 4);
    PcmClip clip;
    clip.sample_rate = sample_rate;
    const auto n = static_cast<std::size_t>(std::llround(seconds * sample_rate));
    clip.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        const double env = 0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * wobble * t);
        clip.samples[i] = static_cast<float>(0.3 * env * std::sin(2.0 * std::numbers::pi * freq * t));
    }
    return clip;
}

ModelPipeline::ModelPipeline(const BackendFactory& factory, SessionConfig config, std::filesystem::path audio_root)
    : factory_(factory), config_(std::move(config)), audio_root_(std::move(audio_root)) {}

PcmClip ModelPipeline::clip_for(const EvalRecord& record, std::size_t turn) const {
    const auto load = [this](const std::string& p) {
        const std::filesystem::path path(p);
        return read_wav(path.is_absolute() ? path : audio_root_ / path);
    };
    if (record.audio.empty()) return synthetic_clip(record.id + "#" + std::to_string(turn));
    if (record.turns == 1 && record.audio.size() > 1) {
        std::vector<PcmClip> clips;
        for (const std::string& p : record.audio) clips.push_back(load(p));
        check_rates(clips);
        PcmClip out;
        out.sample_rate = clips.front().sample_rate;
        for (const PcmClip& c : clips) out.samples.insert(out.samples.end(), c.samples.begin(), c.samples.end());
        return out;
    }
    if (turn < record.audio.size()) return load(record.audio[turn]);
    return synthetic_clip(record.id + "#" + std::to_string(turn));
}

std::vector<TurnResult> ModelPipeline::run(const EvalRecord& record) const {
    std::unique_ptr<GeneratorBackend> backend = factory_.make(record.id);
    BenchDispatcher tools;
    StubDetokenizer detok;
    SessionState state = config_.initial_state();
    std::vector<TurnResult> results;
    for (std::size_t t = 0; t < record.turns; ++t)
        results.push_back(run_turn(state, clip_for(record, t), {*backend, tools, detok, config_, nullptr}));
    return results;
}

// ---------------------------------------------------------------------------
// Paralinguistic

std::optional<double> TaskScore::accuracy() const {
    const std::size_t scored = correct + incorrect;
    if (scored == 0) return std::nullopt;
    return 100.0 * static_cast<double>(correct) / static_cast<double>(scored);
}

ParalinguisticReport summarize_paralinguistic(std::span<const EvalRecord> records,
                                              std::span<const JudgeVerdict> verdicts) {
    std::map<std::string_view, const JudgeVerdict*> by_id;
    for (const JudgeVerdict& v : verdicts) by_id[v.record_id] = &v;

    std::map<std::string, TaskScore> scores;
    for (const EvalRecord& r : records) {
        if (!is_paralinguistic_task(r.task))
            throw InvalidConfig("record '" + r.id + "' has non-paralinguistic task '" + r.task + "'");
        TaskScore& s = scores[r.task];
        s.task = r.task;
        const auto it = by_id.find(r.id);
        const Verdict v = it == by_id.end() ? Verdict::Unscored : it->second->verdict;
        if (v == Verdict::Correct)
            ++s.correct;
        else if (v == Verdict::Incorrect)
            ++s.incorrect;
        else
            ++s.unscored;
    }

    ParalinguisticReport report;
    std::vector<double> accuracies;
    for (std::string_view task : kParalinguisticTasks) {
        const auto it = scores.find(std::string(task));
        if (it == scores.end()) continue;
        report.tasks.push_back(it->second);
        report.unscored += it->second.unscored;
        if (auto acc = it->second.accuracy()) accuracies.push_back(*acc);
    }
    if (!accuracies.empty()) report.average = mean_of_subsets(accuracies, 2);
    report.verdicts.assign(verdicts.begin(), verdicts.end());
    std::sort(report.verdicts.begin(), report.verdicts.end(),
              [](const JudgeVerdict& a, const JudgeVerdict& b) { return a.record_id < b.record_id; });
    return report;
}

ParalinguisticReport run_paralinguistic(std::span<const EvalRecord> records, const ModelPipeline& model,
                                        Transcriber& asr, Judge& judge, EvalOptions options) {
    std::vector<JudgeVerdict> verdicts(records.size());
    std::mutex io;  // transcriber and judge implementations need not be thread-safe
    parallel_for(records.size(), options.workers, [&](std::size_t i) {
        const EvalRecord& r = records[i];
        JudgeVerdict v;
        v.record_id = r.id;
        try {
            const std::vector<TurnResult> turns = model.run(r);
            std::lock_guard lock(io);
            const std::string transcript = asr.transcribe(turns.back());
            v = judge.judge(r, transcript);
            v.record_id = r.id;
        } catch (const std::exception& e) {
            v.verdict = Verdict::Unscored;
            v.rationale = e.what();
        }
        verdicts[i] = std::move(v);
    });
    return summarize_paralinguistic(records, verdicts);
}

// ---------------------------------------------------------------------------
// Tool calls

ToolcallReport summarize_toolcall(std::span<const EvalRecord> records,
                                  std::span<const std::optional<ToolCallOutcome>> outcomes) {
    if (records.size() != outcomes.size()) throw InvalidConfig("records and outcomes differ in length");
    std::map<std::string, std::vector<ToolCallOutcome>> buckets;
    ToolcallReport report;
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto& bucket = buckets[records[i].task];
        if (outcomes[i]) {
            bucket.push_back(*outcomes[i]);
        } else {
            ++report.unscored;
            report.unscored_ids.push_back(records[i].id);
        }
    }
    std::sort(report.unscored_ids.begin(), report.unscored_ids.end());
    for (const auto& [tool, outs] : buckets) report.rows.push_back({tool, toolcall_metrics(outs)});
    return report;
}

ToolcallReport run_toolcall(std::span<const EvalRecord> records, const ModelPipeline& model, EvalOptions options) {
    std::vector<std::optional<ToolCallOutcome>> outcomes(records.size());
    parallel_for(records.size(), options.workers, [&](std::size_t i) {
        const EvalRecord& r = records[i];
        try {
            const std::vector<TurnResult> turns = model.run(r);
            ToolCallOutcome o;
            o.gold_trigger = r.gold_trigger;
            o.gold_tool = r.gold_tool;
            o.gold_params = r.gold_params;
            if (!turns.back().tool_calls.empty()) o.predicted_call = turns.back().tool_calls.front().call;
            outcomes[i] = std::move(o);
        } catch (const std::exception&) {
            outcomes[i] = std::nullopt;
        }
    });
    return summarize_toolcall(records, outcomes);
}

// ---------------------------------------------------------------------------
// Reports

namespace {

ordered_json ratio_json(const Ratio& r) {
    ordered_json j;
    const auto p = r.percent();
    j["value"] = p ? ordered_json(round_half_away(*p, 2)) : ordered_json(nullptr);
    j["numerator"] = r.numerator;
    j["denominator"] = r.denominator;
    return j;
}

std::string pad_right(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

}  // namespace

std::string report_json(const ParalinguisticReport& report) {
    ordered_json j;
    j["benchmark"] = "paralinguistic";
    j["normalization"] = NormalizationProfile::kVersion;
    ordered_json tasks = ordered_json::array();
    for (const TaskScore& t : report.tasks) {
        const auto acc = t.accuracy();
        tasks.push_back({{"task", t.task},
                         {"accuracy", acc ? ordered_json(round_half_away(*acc, 2)) : ordered_json(nullptr)},
                         {"correct", t.correct},
                         {"incorrect", t.incorrect},
                         {"unscored", t.unscored},
                         {"total", t.total()}});
    }
    j["tasks"] = tasks;
    j["average"] = report.average ? ordered_json(*report.average) : ordered_json(nullptr);
    j["unscored"] = report.unscored;
    ordered_json verdicts = ordered_json::array();
    for (const JudgeVerdict& v : report.verdicts)
        verdicts.push_back({{"id", v.record_id},
                            {"verdict", to_string(v.verdict)},
                            {"transcript", v.transcript},
                            {"rationale", v.rationale}});
    j["verdicts"] = verdicts;
    return j.dump(2);
}

std::string report_table(const ParalinguisticReport& report) {
    std::ostringstream out;
    out << pad_right("task", 10) << pad_right("accuracy", 10) << "correct/scored  unscored\n";
    for (const TaskScore& t : report.tasks)
        out << pad_right(t.task, 10) << pad_right(format_percent(t.accuracy()), 10)
            << pad_right(std::to_string(t.correct) + "/" + std::to_string(t.correct + t.incorrect), 16)
            << t.unscored << '\n';
    out << pad_right("average", 10) << format_percent(report.average) << '\n';
    if (report.unscored > 0)
        out << report.unscored << " record(s) unscored and excluded from the averages\n";
    return out.str();
}

std::string report_json(const ToolcallReport& report) {
    ordered_json j;
    j["benchmark"] = "toolcall";
    ordered_json rows = ordered_json::array();
    for (const ToolReportRow& r : report.rows) {
        const ToolCallMetrics& m = r.metrics;
        rows.push_back({{"tool", r.tool},
                        {"precision", ratio_json(m.precision)},
                        {"recall", ratio_json(m.recall)},
                        {"type_accuracy", ratio_json(m.type_accuracy)},
                        {"parameter_accuracy", ratio_json(m.parameter_accuracy)},
                        {"tp", m.true_positives},
                        {"fp", m.false_positives},
                        {"fn", m.false_negatives},
                        {"tn", m.true_negatives}});
    }
    j["rows"] = rows;
    j["unscored"] = report.unscored;
    j["unscored_ids"] = report.unscored_ids;
    return j.dump(2);
}

std::string report_table(const ToolcallReport& report) {
    std::ostringstream out;
    out << pad_right("tool", 14) << pad_right("precision", 11) << pad_right("recall", 9) << pad_right("type", 9)
        << "parameter\n";
    for (const ToolReportRow& r : report.rows) {
        const ToolCallMetrics& m = r.metrics;
        out << pad_right(r.tool, 14) << pad_right(format_percent(m.precision.percent()), 11)
            << pad_right(format_percent(m.recall.percent()), 9)
            << pad_right(format_percent(m.type_accuracy.percent()), 9)
            << format_percent(m.parameter_accuracy.percent()) << '\n';
    }
    if (report.unscored > 0) out << report.unscored << " conversation(s) unscored\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Mixtures

PcmClip mix_clips(std::span<const PcmClip> clips) {
    if (clips.empty()) throw EmptyAudio();
    check_rates(clips);
    PcmClip out;
    out.sample_rate = clips.front().sample_rate;
    for (const PcmClip& c : clips) {
        if (c.samples.size() > out.samples.size()) out.samples.resize(c.samples.size(), 0.0f);
        for (std::size_t i = 0; i < c.samples.size(); ++i) out.samples[i] += c.samples[i];
    }
    return out;
}

PcmClip build_mixture(std::span<const PcmClip> audios, const PcmClip& speech, Placement placement, MixMode mode) {
    std::vector<PcmClip> clips;
    if (placement == Placement::Before) clips.push_back(speech);
    clips.insert(clips.end(), audios.begin(), audios.end());
    if (placement == Placement::After) clips.push_back(speech);
    check_rates(clips);

    PcmClip out;
    if (mode == MixMode::Mix) {
        out = mix_clips(clips);
    } else {
        out.sample_rate = clips.front().sample_rate;
        for (const PcmClip& c : clips) out.samples.insert(out.samples.end(), c.samples.begin(), c.samples.end());
    }
    if (out.empty()) throw EmptyAudio();
    peak_normalize(out);
    return out;
}

// ---------------------------------------------------------------------------
// Fixtures

std::string script_line(const ScriptedConversation& conv) {
    ordered_json turns = ordered_json::array();
    for (const std::vector<GenEvent>& events : conv.turns) {
        ordered_json items = ordered_json::array();
        std::vector<std::uint32_t> text;
        std::vector<std::uint32_t> audio;
        std::vector<std::uint32_t> think;
        bool thinking = false;
        const auto flush = [&] {
            if (!text.empty()) items.push_back({{"text", decode_text(text)}});
            if (!audio.empty()) items.push_back({{"audio", audio}});
            text.clear();
            audio.clear();
        };
        for (const GenEvent& ev : events) {
            switch (ev.type) {
                case EventType::TextToken:
                    if (thinking) {
                        think.push_back(ev.id);
                    } else {
                        if (!audio.empty()) flush();
                        text.push_back(ev.id);
                    }
                    break;
                case EventType::AudioToken:
                    if (!text.empty()) flush();
                    audio.push_back(ev.id);
                    break;
                case EventType::ThinkStart:
                    flush();
                    thinking = true;
                    break;
                case EventType::ThinkEnd:
                    items.push_back({{"think", decode_text(think)}});
                    think.clear();
                    thinking = false;
                    break;
                case EventType::ToolCallSpan:
                    flush();
                    items.push_back({{"tool_call_raw", ev.span}});
                    break;
                case EventType::EndOfTurn:
                    break;
            }
        }
        flush();
        turns.push_back(items);
    }
    ordered_json j;
    j["id"] = conv.id;
    j["turns"] = turns;
    return j.dump();
}

namespace {

constexpr std::array<std::string_view, 12> kCities{"Beijing", "Shanghai", "London", "Paris", "Tokyo", "Nairobi",
                                                   "Lima", "Oslo", "Toronto", "Sydney", "Cairo", "Mumbai"};
constexpr std::array<std::string_view, 10> kTopics{
    "latest electric car prices", "tallest building in europe", "how to brew green tea",
    "marathon world record",      "jazz festivals this summer", "symptoms of a cold",
    "best hiking trails nearby",  "exchange rate yen to euro",  "who won the chess final",
    "opening hours of the museum"};
constexpr std::array<std::string_view, 8> kVoices{
    "a gentle elderly man speaking slowly", "an excited child",          "a calm female news anchor",
    "a whispering storyteller",             "a cheerful cartoon voice", "a deep movie trailer voice",
    "a fast talking sports commentator",    "a soft lullaby singer"};
constexpr std::array<std::string_view, 6> kChatter{"tell me a joke",    "how are you today", "thanks a lot",
                                                    "say that again",    "what is your name", "that sounds nice"};

std::vector<GenEvent> text_events(std::string_view text) {
    std::vector<GenEvent> out;
    for (std::uint32_t id : encode_text(text)) out.push_back(GenEvent::text(id));
    return out;
}

void append_audio(std::vector<GenEvent>& events, std::mt19937& rng, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) events.push_back(GenEvent::audio(static_cast<std::uint32_t>(rng() % 6599)));
}

}  // namespace

ToolcallFixture make_toolcall_fixture(std::size_t per_tool, std::uint32_t seed) {
    std::mt19937 rng(seed);
    ToolcallFixture fx;
    for (std::string_view tool : known_tools()) {
        for (std::size_t k = 0; k < 2 * per_tool; ++k) {
            const bool positive = k < per_tool;
            EvalRecord r;
            r.id = std::string(tool) + (positive ? "-pos-" : "-neg-") + std::to_string(positive ? k : k - per_tool);
            r.task = std::string(tool);
            r.turns = 3 + pick(rng, 4);
            r.split = "synthetic";
            r.gold_trigger = positive;
            std::map<std::string, std::string> args;
            if (tool == tools::kWeather)
                args["location"] = std::string(kCities[pick(rng, kCities.size())]);
            else if (tool == tools::kWebSearch)
                args["query"] = std::string(kTopics[pick(rng, kTopics.size())]);
            else if (tool == tools::kAudioSearch)
                args["query"] = std::string(kVoices[pick(rng, kVoices.size())]);
            if (positive) {
                r.gold_tool = std::string(tool);
                r.gold_params = args;
            }

            ScriptedConversation conv;
            conv.id = r.id;
            for (std::size_t t = 0; t + 1 < r.turns; ++t) {
                std::vector<GenEvent> ev = text_events(kChatter[pick(rng, kChatter.size())]);
                append_audio(ev, rng, 3 + pick(rng, 6));
                conv.turns.push_back(std::move(ev));
            }
            std::vector<GenEvent> last;
            if (positive) {
                last.push_back(GenEvent::tool_call(serialize_tool_call({std::string(tool), args})));
                for (auto& e : text_events("here you go")) last.push_back(e);
            } else {
                last = text_events("no tool is needed for that");
            }
            append_audio(last, rng, 3 + pick(rng, 6));
            conv.turns.push_back(std::move(last));

            fx.records.push_back(std::move(r));
            fx.perfect.push_back(std::move(conv));
        }
    }
    return fx;
}

ParalinguisticFixture make_paralinguistic_fixture(std::size_t per_task, std::uint32_t seed) {
    static const std::map<std::string_view, std::vector<std::string_view>> kAnswers{
        {"gender", {"male", "female"}},
        {"age", {"child", "young adult", "middle aged", "elderly"}},
        {"timbre", {"bright", "husky", "nasal", "warm"}},
        {"scenario", {"office", "street", "kitchen", "stadium"}},
        {"event", {"dog barking", "door slam", "applause", "siren"}},
        {"emotion", {"happy", "sad", "angry", "neutral", "surprised"}},
        {"pitch", {"high", "medium", "low"}},
        {"rhythm", {"steady", "halting", "sing-song"}},
        {"speed", {"fast", "normal", "slow"}},
        {"style", {"reading", "chatting", "broadcasting", "whispering"}},
        {"vocal", {"laughing", "coughing", "sighing", "humming"}},
    };
    std::mt19937 rng(seed);
    ParalinguisticFixture fx;
    for (std::string_view task : kParalinguisticTasks) {
        const auto& answers = kAnswers.at(task);
        for (std::size_t k = 0; k < per_task; ++k) {
            EvalRecord r;
            r.id = std::string(task) + "-" + (k < 10 ? "0" : "") + std::to_string(k);
            r.task = std::string(task);
            r.gold = std::string(answers[pick(rng, answers.size())]);
            r.split = "synthetic";
            ScriptedConversation conv;
            conv.id = r.id;
            std::vector<GenEvent> ev = text_events(r.gold);
            append_audio(ev, rng, 4 + pick(rng, 8));
            conv.turns.push_back(std::move(ev));
            fx.records.push_back(std::move(r));
            fx.perfect.push_back(std::move(conv));
        }
    }
    return fx;
}

}  // namespace voxweave
