#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "voxweave/audio.hpp"
#include "voxweave/interleave.hpp"
#include "voxweave/tooling.hpp"

namespace voxweave {

enum class SegmentKind { SystemText, AudioFeatures, RetrievedInfo, InterleavedOutput, ThinkingText };

std::string_view to_string(SegmentKind kind);
SegmentKind segment_kind_from_string(std::string_view name);

/// One unit of decoder context. Audio features are held by reference
/// (`feature_ref`) and cost one budget unit per adaptor frame; every other
/// kind costs one unit per token.
struct Segment {
    SegmentKind kind = SegmentKind::SystemText;
    std::vector<Token> tokens;
    std::string feature_ref;
    std::size_t count = 0;

    std::size_t cost() const { return count; }

    static Segment system_text(std::string_view text);
    static Segment audio_features(std::string feature_ref, std::size_t frames);
    static Segment retrieved(const ToolResult& result);
    static Segment interleaved_output(const InterleavedSequence& seq);
    static Segment thinking(std::string_view text);

    friend bool operator==(const Segment&, const Segment&) = default;
};

struct Turn {
    std::vector<Segment> user;  // AudioFeatures, then one RetrievedInfo per tool call
    Segment assistant;          // InterleavedOutput
    std::vector<ToolResult> tool_calls;

    std::size_t cost() const;
    friend bool operator==(const Turn&, const Turn&) = default;
};

inline constexpr std::size_t kDefaultContextBudget = 8192;

struct SessionState {
    Segment system_prompt = Segment::system_text("");
    std::vector<Turn> turns;
    std::size_t budget = kDefaultContextBudget;

    std::size_t cost() const;
};

struct SessionConfig {
    std::string system_prompt = "You are a helpful voice assistant.";
    std::size_t budget = kDefaultContextBudget;
    InterleaveConfig interleave;
    FrameClock clock;
    VadConfig vad;
    std::size_t max_generated_tokens = 1 << 20;

    SessionState initial_state() const;
};

/// Decoder context for the current turn:
/// [system, (turn.user..., turn.assistant)*, current_audio, retrieved...].
/// History is the longest run of most recent whole turns that fits the
/// budget left after the system prompt and the current turn. Throws
/// ContextOverflow when the system prompt and current turn alone exceed it.
std::vector<Segment> assemble_context(const SessionState& state, const Segment& current_audio,
                                      std::span<const Segment> retrieved);

/// Drops oldest whole turns until the state fits its budget. Throws
/// ContextOverflow when the system prompt alone exceeds it.
SessionState trim_history(SessionState state);

/// Stable handle for a clip's features: hash of its PCM16 rendering.
std::string feature_ref_for(const PcmClip& clip);

// ---------------------------------------------------------------------------
// Backend and detokenizer interfaces

enum class EventType { TextToken, AudioToken, ThinkStart, ThinkEnd, ToolCallSpan, EndOfTurn };

std::string_view to_string(EventType type);

struct GenEvent {
    EventType type = EventType::EndOfTurn;
    std::uint32_t id = 0;  // token events
    std::string span;      // ToolCallSpan: raw `<tool_call>...</tool_call>` text

    static GenEvent text(std::uint32_t id) { return {EventType::TextToken, id, {}}; }
    static GenEvent audio(std::uint32_t id) { return {EventType::AudioToken, id, {}}; }
    static GenEvent think_start() { return {EventType::ThinkStart, 0, {}}; }
    static GenEvent think_end() { return {EventType::ThinkEnd, 0, {}}; }
    static GenEvent tool_call(std::string span) { return {EventType::ToolCallSpan, 0, std::move(span)}; }
    static GenEvent end_of_turn() { return {EventType::EndOfTurn, 0, {}}; }

    friend bool operator==(const GenEvent&, const GenEvent&) = default;
};

/// One in-flight generation. After a ToolCallSpan the caller resolves the
/// call and hands back the extended context through resume() before pulling
/// further events.
class Generation {
public:
    virtual ~Generation() = default;
    /// nullopt means the stream ended; a well-behaved backend ends with EndOfTurn first.
    virtual std::optional<GenEvent> next() = 0;
    virtual void resume(std::span<const Segment> context) = 0;
};

class GeneratorBackend {
public:
    virtual ~GeneratorBackend() = default;
    virtual std::unique_ptr<Generation> generate(std::span<const Segment> context) = 0;
};

class Detokenizer {
public:
    virtual ~Detokenizer() = default;
    virtual PcmClip synthesize(std::span<const std::uint32_t> audio_tokens) = 0;
    virtual std::uint32_t sample_rate() const = 0;
    virtual std::uint32_t token_rate() const = 0;
};

/// Maps token k to a fixed-length sine chunk whose pitch is keyed by k.
/// Produces exactly sample_rate / token_rate samples per token.
class StubDetokenizer : public Detokenizer {
public:
    explicit StubDetokenizer(std::uint32_t sample_rate = kDefaultSampleRate, std::uint32_t token_rate = 25);

    PcmClip synthesize(std::span<const std::uint32_t> audio_tokens) override;
    std::uint32_t sample_rate() const override { return sample_rate_; }
    std::uint32_t token_rate() const override { return token_rate_; }

    void render_token(std::uint32_t token, std::vector<float>& out) const;

private:
    std::uint32_t sample_rate_;
    std::uint32_t token_rate_;
};

class ToolDispatcher {
public:
    virtual ~ToolDispatcher() = default;
    /// Must not throw; failures are error results.
    virtual ToolResult resolve(std::string_view span) = 0;
};

/// Parses the span and routes it through a client set.
class ClientDispatcher : public ToolDispatcher {
public:
    explicit ClientDispatcher(ToolClients clients) : clients_(std::move(clients)) {}
    ToolResult resolve(std::string_view span) override { return dispatch_span(span, clients_); }
    ToolClients& clients() { return clients_; }

private:
    ToolClients clients_;
};

// ---------------------------------------------------------------------------
// Turn execution

struct TurnResult {
    std::string text;      // visible text: text channel minus tool-call spans
    std::string thinking;  // reasoning; never carried into history
    std::vector<std::uint32_t> audio_tokens;
    PcmClip pcm;
    std::vector<ToolResult> tool_calls;
    InterleavedSequence output;
    std::vector<std::vector<Segment>> contexts;  // every context the backend saw, in order
};

class TurnObserver {
public:
    virtual ~TurnObserver() = default;
    virtual void on_turn_begin(std::size_t /*turn_index*/, const Segment& /*current_audio*/) {}
    virtual void on_context(std::span<const Segment> /*context*/) {}
    virtual void on_event(const GenEvent& /*event*/) {}
    virtual void on_tool_result(const ToolResult& /*result*/) {}
    virtual void on_turn_end(const TurnResult& /*result*/) {}
    virtual void on_turn_error(const std::string& /*what*/) {}
};

struct TurnDeps {
    GeneratorBackend& backend;
    ToolDispatcher& tools;
    Detokenizer& detokenizer;
    const SessionConfig& config;
    TurnObserver* observer = nullptr;
};

/// Gates the clip with VAD (SilenceRejected when no speech), converts it to
/// an AudioFeatures segment and runs the turn.
TurnResult run_turn(SessionState& state, const PcmClip& clip, TurnDeps deps);

/// Runs one turn from precomputed features. On success the turn is appended
/// to `state` and history is trimmed; on error `state` is untouched.
TurnResult run_turn_features(SessionState& state, const Segment& current_audio, TurnDeps deps);

}  // namespace voxweave
