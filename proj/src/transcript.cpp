#include "voxweave/transcript.hpp"

#include <deque>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "voxweave/backends.hpp"
#include "voxweave/error.hpp"
#include "voxweave/text.hpp"

namespace voxweave {

using nlohmann::json;

namespace {

json tokens_json(const std::vector<Token>& tokens) {
    json arr = json::array();
    for (const Token& t : tokens) arr.push_back(json::array({static_cast<int>(t.channel), t.id}));
    return arr;
}

json segment_json(const Segment& s) {
    json j{{"kind", to_string(s.kind)}, {"count", s.count}};
    if (!s.feature_ref.empty()) j["ref"] = s.feature_ref;
    if (!s.tokens.empty()) j["tokens"] = tokens_json(s.tokens);
    return j;
}

json tool_result_json(const ToolResult& r) {
    json entries = json::array();
    for (const VoiceLibraryEntry& e : r.entries)
        entries.push_back({{"id", e.id},
                           {"audio_tokens", e.audio_tokens},
                           {"transcription", e.transcription},
                           {"description", e.description}});
    return {{"name", r.call.name}, {"arguments", r.call.arguments}, {"ok", r.ok},
            {"payload", r.payload}, {"entries", entries}};
}

ToolResult tool_result_from_json(const json& j) {
    ToolResult r;
    r.call.name = j.at("name").get<std::string>();
    r.call.arguments = j.at("arguments").get<std::map<std::string, std::string>>();
    r.ok = j.at("ok").get<bool>();
    r.payload = j.at("payload").get<std::string>();
    for (const auto& e : j.at("entries")) {
        VoiceLibraryEntry entry;
        entry.id = e.at("id").get<std::string>();
        entry.audio_tokens = e.at("audio_tokens").get<std::vector<std::uint32_t>>();
        entry.transcription = e.at("transcription").get<std::string>();
        entry.description = e.at("description").get<std::string>();
        r.entries.push_back(std::move(entry));
    }
    return r;
}

json event_json(const GenEvent& ev) {
    json j{{"event", to_string(ev.type)}};
    if (ev.type == EventType::TextToken || ev.type == EventType::AudioToken) j["id"] = ev.id;
    if (ev.type == EventType::ToolCallSpan) j["span"] = ev.span;
    return j;
}

GenEvent event_from_json(const json& j) {
    const std::string name = j.at("event").get<std::string>();
    if (name == "text") return GenEvent::text(j.at("id").get<std::uint32_t>());
    if (name == "audio") return GenEvent::audio(j.at("id").get<std::uint32_t>());
    if (name == "think_start") return GenEvent::think_start();
    if (name == "think_end") return GenEvent::think_end();
    if (name == "tool_call") return GenEvent::tool_call(j.at("span").get<std::string>());
    if (name == "end_of_turn") return GenEvent::end_of_turn();
    throw InvalidConfig("unknown event '" + name + "'");
}

std::string pcm_digest(const PcmClip& pcm) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::int16_t s : pcm.to_pcm16()) {
        for (int b = 0; b < 2; ++b) {
            h ^= static_cast<std::uint8_t>((s >> (8 * b)) & 0xff);
            h *= 0x100000001b3ULL;
        }
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (int i = 15; i >= 0; --i) out.push_back(kHex[(h >> (4 * i)) & 0xf]);
    return out;
}

json session_header(const SessionConfig& c, const Detokenizer& d) {
    return {{"type", "session"},
            {"version", 1},
            {"system_prompt", c.system_prompt},
            {"budget", c.budget},
            {"max_generated_tokens", c.max_generated_tokens},
            {"interleave",
             {{"n_text", c.interleave.n_text},
              {"n_audio", c.interleave.n_audio},
              {"text_pad", c.interleave.text_pad},
              {"audio_pad", c.interleave.audio_pad},
              {"audio_vocab_size", c.interleave.audio_vocab_size}}},
            {"clock", {{"encoder_rate", c.clock.encoder_rate}, {"adaptor_downsample", c.clock.adaptor_downsample}}},
            {"vad",
             {{"window_ms", c.vad.window_ms},
              {"energy_threshold_dbfs", c.vad.energy_threshold_dbfs},
              {"hangover_ms", c.vad.hangover_ms},
              {"min_segment_ms", c.vad.min_segment_ms}}},
            {"detokenizer", {{"sample_rate", d.sample_rate()}, {"token_rate", d.token_rate()}}}};
}

SessionConfig config_from_header(const json& h) {
    SessionConfig c;
    c.system_prompt = h.at("system_prompt").get<std::string>();
    c.budget = h.at("budget").get<std::size_t>();
    c.max_generated_tokens = h.at("max_generated_tokens").get<std::size_t>();
    const auto& il = h.at("interleave");
    c.interleave.n_text = il.at("n_text");
    c.interleave.n_audio = il.at("n_audio");
    c.interleave.text_pad = il.at("text_pad");
    c.interleave.audio_pad = il.at("audio_pad");
    c.interleave.audio_vocab_size = il.at("audio_vocab_size");
    c.clock.encoder_rate = h.at("clock").at("encoder_rate");
    c.clock.adaptor_downsample = h.at("clock").at("adaptor_downsample");
    const auto& v = h.at("vad");
    c.vad.window_ms = v.at("window_ms");
    c.vad.energy_threshold_dbfs = v.at("energy_threshold_dbfs");
    c.vad.hangover_ms = v.at("hangover_ms");
    c.vad.min_segment_ms = v.at("min_segment_ms");
    return c;
}

class RecordedDispatcher : public ToolDispatcher {
public:
    explicit RecordedDispatcher(std::deque<ToolResult> results) : results_(std::move(results)) {}
    ToolResult resolve(std::string_view span) override {
        if (results_.empty()) {
            ToolResult r;
            r.payload = "transcript has no recorded result for " + std::string(span);
            return r;
        }
        ToolResult r = std::move(results_.front());
        results_.pop_front();
        return r;
    }

private:
    std::deque<ToolResult> results_;
};

/// Captures the lines a replayed turn would have written.
class CaptureObserver : public TurnObserver {
public:
    explicit CaptureObserver(std::size_t turn) : turn_(turn) {}
    void on_context(std::span<const Segment> context) override {
        contexts.push_back(serialize_context(turn_, context));
    }
    void on_turn_end(const TurnResult& r) override { end_line = serialize_turn_result(turn_, r); }

    std::vector<std::string> contexts;
    std::string end_line;

private:
    std::size_t turn_;
};

struct RecordedTurn {
    std::size_t index = 0;
    Segment current_audio;
    std::vector<std::string> contexts;
    std::vector<GenEvent> events;
    std::deque<ToolResult> results;
    std::string end_line;
    std::string error;
    bool ended = false;
};

}  // namespace

std::string serialize_context(std::size_t turn, std::span<const Segment> context) {
    json segs = json::array();
    for (const Segment& s : context) segs.push_back(segment_json(s));
    return json{{"type", "context"}, {"turn", turn}, {"segments", segs}}.dump();
}

std::string serialize_turn_result(std::size_t turn, const TurnResult& r) {
    json calls = json::array();
    for (const ToolResult& t : r.tool_calls) calls.push_back(tool_result_json(t));
    return json{{"type", "turn_end"},
                {"turn", turn},
                {"text", r.text},
                {"thinking", r.thinking},
                {"audio_tokens", r.audio_tokens},
                {"output", tokens_json(r.output.tokens())},
                {"pcm_samples", r.pcm.samples.size()},
                {"pcm_sample_rate", r.pcm.sample_rate},
                {"pcm_digest", pcm_digest(r.pcm)},
                {"tool_calls", calls}}
        .dump();
}

TranscriptWriter::TranscriptWriter(std::ostream& out, const SessionConfig& config, const Detokenizer& detokenizer)
    : out_(out) {
    write(session_header(config, detokenizer).dump());
}

void TranscriptWriter::write(const std::string& line) {
    out_ << line << '\n';
    out_.flush();
}

void TranscriptWriter::on_turn_begin(std::size_t, const Segment& a) {
    write(json{{"type", "turn_begin"}, {"turn", turn_}, {"feature_ref", a.feature_ref}, {"frames", a.count}}.dump());
}

void TranscriptWriter::on_context(std::span<const Segment> context) { write(serialize_context(turn_, context)); }

void TranscriptWriter::on_event(const GenEvent& event) {
    json j = event_json(event);
    j["type"] = "event";
    j["turn"] = turn_;
    write(j.dump());
}

void TranscriptWriter::on_tool_result(const ToolResult& result) {
    json j = tool_result_json(result);
    j["type"] = "tool_result";
    j["turn"] = turn_;
    write(j.dump());
}

void TranscriptWriter::on_turn_end(const TurnResult& result) { write(serialize_turn_result(turn_++, result)); }

void TranscriptWriter::on_turn_error(const std::string& what) {
    write(json{{"type", "turn_error"}, {"turn", turn_++}, {"what", what}}.dump());
}

void ObserverFanout::on_turn_begin(std::size_t i, const Segment& a) {
    for (auto* o : observers_) o->on_turn_begin(i, a);
}
void ObserverFanout::on_context(std::span<const Segment> c) {
    for (auto* o : observers_) o->on_context(c);
}
void ObserverFanout::on_event(const GenEvent& e) {
    for (auto* o : observers_) o->on_event(e);
}
void ObserverFanout::on_tool_result(const ToolResult& r) {
    for (auto* o : observers_) o->on_tool_result(r);
}
void ObserverFanout::on_turn_end(const TurnResult& r) {
    for (auto* o : observers_) o->on_turn_end(r);
}
void ObserverFanout::on_turn_error(const std::string& w) {
    for (auto* o : observers_) o->on_turn_error(w);
}

ReplayReport replay_transcript(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    std::optional<json> header;
    std::vector<RecordedTurn> turns;

    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw IoError("transcript line " + std::to_string(lineno) + ": " + e.what());
        }
        const std::string type = rec.value("type", "");
        if (type == "session") {
            header = rec;
            continue;
        }
        if (!header) throw IoError("transcript does not start with a session record");
        const std::size_t turn = rec.at("turn").get<std::size_t>();
        if (type == "turn_begin") {
            RecordedTurn t;
            t.index = turn;
            t.current_audio = Segment::audio_features(rec.at("feature_ref").get<std::string>(),
                                                      rec.at("frames").get<std::size_t>());
            turns.push_back(std::move(t));
            continue;
        }
        if (turns.empty() || turns.back().index != turn || turns.back().ended)
            throw IoError("transcript line " + std::to_string(lineno) + " is outside its turn");
        RecordedTurn& t = turns.back();
        if (type == "context") {
            t.contexts.push_back(line);
        } else if (type == "event") {
            t.events.push_back(event_from_json(rec));
        } else if (type == "tool_result") {
            t.results.push_back(tool_result_from_json(rec));
        } else if (type == "turn_end") {
            t.end_line = line;
            t.ended = true;
        } else if (type == "turn_error") {
            t.error = rec.at("what").get<std::string>();
            t.ended = true;
        } else {
            throw IoError("transcript line " + std::to_string(lineno) + ": unknown record type '" + type + "'");
        }
    }
    if (!header) throw IoError("empty transcript");

    const SessionConfig config = config_from_header(*header);
    const auto& detok_cfg = header->at("detokenizer");
    StubDetokenizer detok(detok_cfg.at("sample_rate").get<std::uint32_t>(),
                          detok_cfg.at("token_rate").get<std::uint32_t>());
    SessionState state = config.initial_state();

    ReplayReport report;
    for (RecordedTurn& t : turns) {
        if (!t.ended) {
            report.mismatches.push_back("turn " + std::to_string(t.index) + " has no end record");
            continue;
        }
        FixedEventsBackend backend(t.events);
        RecordedDispatcher tools(t.results);
        CaptureObserver capture(t.index);
        ++report.turns;
        try {
            run_turn_features(state, t.current_audio, {backend, tools, detok, config, &capture});
            if (!t.error.empty())
                report.mismatches.push_back("turn " + std::to_string(t.index) + " succeeded on replay but failed when recorded");
            report.turn_lines.push_back(capture.end_line);
            if (capture.end_line != t.end_line)
                report.mismatches.push_back("turn " + std::to_string(t.index) + ": turn result differs");
        } catch (const Error& e) {
            report.turn_lines.push_back(json{{"type", "turn_error"}, {"turn", t.index}, {"what", e.what()}}.dump());
            if (t.error != e.what())
                report.mismatches.push_back("turn " + std::to_string(t.index) + ": error differs: " + e.what());
        }
        if (capture.contexts != t.contexts)
            report.mismatches.push_back("turn " + std::to_string(t.index) + ": backend contexts differ");
    }
    return report;
}

}  // namespace voxweave
