#include "voxweave/session.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "voxweave/error.hpp"

namespace voxweave {

namespace {

constexpr std::array<std::string_view, 5> kKindNames{"SystemText", "AudioFeatures", "RetrievedInfo",
                                                     "InterleavedOutput", "ThinkingText"};

std::vector<Token> text_tokens_of(std::string_view text) {
    std::vector<Token> out;
    out.reserve(text.size());
    for (std::uint32_t id : encode_text(text)) out.push_back(text_token(id));
    return out;
}

std::size_t sum_cost(std::span<const Segment> segments) {
    std::size_t total = 0;
    for (const Segment& s : segments) total += s.cost();
    return total;
}

}  // namespace

std::string_view to_string(SegmentKind kind) { return kKindNames.at(static_cast<std::size_t>(kind)); }

SegmentKind segment_kind_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (kKindNames[i] == name) return static_cast<SegmentKind>(i);
    throw InvalidConfig("unknown segment kind '" + std::string(name) + "'");
}

Segment Segment::system_text(std::string_view text) {
    Segment s;
    s.kind = SegmentKind::SystemText;
    s.tokens = text_tokens_of(text);
    s.count = s.tokens.size();
    return s;
}

Segment Segment::audio_features(std::string feature_ref, std::size_t frames) {
    Segment s;
    s.kind = SegmentKind::AudioFeatures;
    s.feature_ref = std::move(feature_ref);
    s.count = frames;
    return s;
}

Segment Segment::retrieved(const ToolResult& result) {
    Segment s;
    s.kind = SegmentKind::RetrievedInfo;
    if (!result.ok) {
        s.tokens = text_tokens_of("error: " + result.payload);
    } else if (!result.entries.empty()) {
        // Retrieved speech: its audio tokens followed by its transcription.
        for (const VoiceLibraryEntry& e : result.entries) {
            for (std::uint32_t id : e.audio_tokens) s.tokens.push_back(audio_token(id));
            for (const Token& t : text_tokens_of(e.transcription)) s.tokens.push_back(t);
        }
    } else {
        s.tokens = text_tokens_of(result.payload);
    }
    s.count = s.tokens.size();
    return s;
}

Segment Segment::interleaved_output(const InterleavedSequence& seq) {
    Segment s;
    s.kind = SegmentKind::InterleavedOutput;
    s.tokens = seq.tokens();
    s.count = s.tokens.size();
    return s;
}

Segment Segment::thinking(std::string_view text) {
    Segment s = system_text(text);
    s.kind = SegmentKind::ThinkingText;
    return s;
}

std::size_t Turn::cost() const { return sum_cost(user) + assistant.cost(); }

std::size_t SessionState::cost() const {
    std::size_t total = system_prompt.cost();
    for (const Turn& t : turns) total += t.cost();
    return total;
}

SessionState SessionConfig::initial_state() const {
    interleave.validate();
    clock.validate();
    vad.validate();
    SessionState state;
    state.system_prompt = Segment::system_text(system_prompt);
    state.budget = budget;
    return state;
}

std::vector<Segment> assemble_context(const SessionState& state, const Segment& current_audio,
                                      std::span<const Segment> retrieved) {
    if (current_audio.kind != SegmentKind::AudioFeatures || current_audio.count == 0)
        throw InvalidConfig("current audio must be a non-empty AudioFeatures segment");
    const std::size_t fixed = state.system_prompt.cost() + current_audio.cost() + sum_cost(retrieved);
    if (fixed > state.budget)
        throw ContextOverflow("system prompt and current turn need " + std::to_string(fixed) +
                              " units, budget is " + std::to_string(state.budget));

    std::size_t room = state.budget - fixed;
    std::size_t first = state.turns.size();
    while (first > 0 && state.turns[first - 1].cost() <= room) {
        room -= state.turns[first - 1].cost();
        --first;
    }

    std::vector<Segment> ctx;
    ctx.push_back(state.system_prompt);
    for (std::size_t i = first; i < state.turns.size(); ++i) {
        const Turn& t = state.turns[i];
        ctx.insert(ctx.end(), t.user.begin(), t.user.end());
        ctx.push_back(t.assistant);
    }
    ctx.push_back(current_audio);
    ctx.insert(ctx.end(), retrieved.begin(), retrieved.end());
    return ctx;
}

SessionState trim_history(SessionState state) {
    if (state.system_prompt.cost() > state.budget)
        throw ContextOverflow("system prompt alone exceeds the context budget");
    std::size_t total = state.cost();
    std::size_t drop = 0;
    while (total > state.budget) total -= state.turns[drop++].cost();
    state.turns.erase(state.turns.begin(), state.turns.begin() + static_cast<std::ptrdiff_t>(drop));
    return state;
}

std::string feature_ref_for(const PcmClip& clip) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto mix = [&h](std::uint8_t byte) {
        h ^= byte;
        h *= 0x100000001b3ULL;
    };
    for (int i = 0; i < 4; ++i) mix(static_cast<std::uint8_t>(clip.sample_rate >> (8 * i)));
    for (std::int16_t s : clip.to_pcm16()) {
        mix(static_cast<std::uint8_t>(s & 0xff));
        mix(static_cast<std::uint8_t>((s >> 8) & 0xff));
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string ref = "pcm:";
    for (int i = 15; i >= 0; --i) ref.push_back(kHex[(h >> (4 * i)) & 0xf]);
    return ref;
}

std::string_view to_string(EventType type) {
    switch (type) {
        case EventType::TextToken: return "text";
        case EventType::AudioToken: return "audio";
        case EventType::ThinkStart: return "think_start";
        case EventType::ThinkEnd: return "think_end";
        case EventType::ToolCallSpan: return "tool_call";
        case EventType::EndOfTurn: return "end_of_turn";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------

StubDetokenizer::StubDetokenizer(std::uint32_t sample_rate, std::uint32_t token_rate)
    : sample_rate_(sample_rate), token_rate_(token_rate) {
    if (sample_rate == 0 || token_rate == 0 || sample_rate % token_rate != 0)
        throw InvalidConfig("detokenizer sample rate must be a positive multiple of the token rate");
}

void StubDetokenizer::render_token(std::uint32_t token, std::vector<float>& out) const {
    const std::uint32_t n = sample_rate_ / token_rate_;
    // Semitone steps above 110 Hz over four octaves.
    const double freq = 110.0 * std::pow(2.0, static_cast<double>(token % 48) / 12.0);
    const double step = 2.0 * std::numbers::pi * freq / sample_rate_;
    for (std::uint32_t i = 0; i < n; ++i) out.push_back(static_cast<float>(0.25 * std::sin(step * i)));
}

PcmClip StubDetokenizer::synthesize(std::span<const std::uint32_t> audio_tokens) {
    PcmClip clip;
    clip.sample_rate = sample_rate_;
    clip.samples.reserve(audio_tokens.size() * (sample_rate_ / token_rate_));
    for (std::uint32_t t : audio_tokens) render_token(t, clip.samples);
    return clip;
}

// ---------------------------------------------------------------------------

TurnResult run_turn(SessionState& state, const PcmClip& clip, TurnDeps deps) {
    if (clip.empty()) throw EmptyAudio();
    if (vad_segments(clip, deps.config.vad).empty()) throw SilenceRejected();
    const std::size_t frames = adaptor_frames(encoder_frames(clip, deps.config.clock), deps.config.clock);
    return run_turn_features(state, Segment::audio_features(feature_ref_for(clip), frames), deps);
}

TurnResult run_turn_features(SessionState& state, const Segment& current_audio, TurnDeps deps) {
    const InterleaveConfig& cfg = deps.config.interleave;
    TurnObserver* obs = deps.observer;
    try {
        if (obs) obs->on_turn_begin(state.turns.size(), current_audio);

        TurnResult result;
        std::vector<Segment> retrieved;
        std::vector<std::uint32_t> text_ids;
        std::vector<std::uint32_t> visible_ids;
        std::vector<std::uint32_t> thinking_ids;

        result.contexts.push_back(assemble_context(state, current_audio, retrieved));
        if (obs) obs->on_context(result.contexts.back());
        std::unique_ptr<Generation> gen = deps.backend.generate(result.contexts.back());
        if (!gen) throw BackendProtocolError("backend returned no generation");

        bool thinking = false;
        std::size_t produced = 0;
        for (;;) {
            std::optional<GenEvent> ev = gen->next();
            if (!ev) throw BackendProtocolError("stream ended without EndOfTurn");
            if (++produced > deps.config.max_generated_tokens)
                throw BackendProtocolError("generation exceeded " +
                                           std::to_string(deps.config.max_generated_tokens) + " events");
            if (obs) obs->on_event(*ev);

            if (ev->type == EventType::EndOfTurn) {
                if (thinking) throw BackendProtocolError("EndOfTurn inside a thinking span");
                break;
            }
            switch (ev->type) {
                case EventType::TextToken:
                    if (thinking) {
                        thinking_ids.push_back(ev->id);
                    } else if (ev->id != cfg.text_pad) {
                        text_ids.push_back(ev->id);
                        visible_ids.push_back(ev->id);
                    }
                    break;
                case EventType::AudioToken:
                    if (thinking) throw BackendProtocolError("audio token inside a thinking span");
                    if (ev->id >= cfg.audio_vocab_size)
                        throw BackendProtocolError("audio token " + std::to_string(ev->id) +
                                                   " is out of vocabulary");
                    if (ev->id != cfg.audio_pad) result.audio_tokens.push_back(ev->id);
                    break;
                case EventType::ThinkStart:
                    if (thinking) throw BackendProtocolError("nested ThinkStart");
                    thinking = true;
                    break;
                case EventType::ThinkEnd:
                    if (!thinking) throw BackendProtocolError("ThinkEnd without ThinkStart");
                    thinking = false;
                    break;
                case EventType::ToolCallSpan: {
                    if (thinking) throw BackendProtocolError("tool call inside a thinking span");
                    // The call stays in-band in the text channel of the output.
                    for (std::uint32_t id : encode_text(ev->span)) text_ids.push_back(id);
                    ToolResult tr = deps.tools.resolve(ev->span);
                    if (obs) obs->on_tool_result(tr);
                    retrieved.push_back(Segment::retrieved(tr));
                    result.tool_calls.push_back(std::move(tr));
                    result.contexts.push_back(assemble_context(state, current_audio, retrieved));
                    if (obs) obs->on_context(result.contexts.back());
                    gen->resume(result.contexts.back());
                    break;
                }
                case EventType::EndOfTurn:
                    break;
            }
        }

        result.output = mux(text_ids, result.audio_tokens, cfg);
        result.text = decode_text(visible_ids);
        result.thinking = decode_text(thinking_ids);
        result.pcm = deps.detokenizer.synthesize(result.audio_tokens);

        Turn turn;
        turn.user.push_back(current_audio);
        turn.user.insert(turn.user.end(), retrieved.begin(), retrieved.end());
        turn.assistant = Segment::interleaved_output(result.output);
        turn.tool_calls = result.tool_calls;

        SessionState next = state;
        next.turns.push_back(std::move(turn));
        state = trim_history(std::move(next));

        if (obs) obs->on_turn_end(result);
        return result;
    } catch (const Error& e) {
        if (obs) obs->on_turn_error(e.what());
        throw;
    }
}

}  // namespace voxweave
