#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "voxweave/session.hpp"

namespace voxweave {

/// Pre-recorded assistant behaviour for one conversation: the event list of
/// every turn, EndOfTurn excluded.
struct ScriptedConversation {
    std::string id;
    std::vector<std::vector<GenEvent>> turns;
};

/// Script files are JSON lines, one conversation per line:
///
///   {"id": "c1", "turns": [[{"text": "hi"}, {"audio": [1, 2]}], ...]}
///
/// Turn items: {"text": s} emits one text token per UTF-8 byte,
/// {"audio": [ids]} audio tokens, {"think": s} a bracketed thinking span,
/// {"tool_call": {"name": ..., "arguments": {...}}} a canonical tool-call
/// span and {"tool_call_raw": s} a verbatim span.
std::vector<ScriptedConversation> load_script(const std::filesystem::path& path);
ScriptedConversation parse_script_line(std::string_view line);

/// Plays turn k of its conversation on the k-th generate() call.
/// Holds a cursor, so use one instance per session.
class ScriptedBackend : public GeneratorBackend {
public:
    explicit ScriptedBackend(ScriptedConversation conversation);
    std::unique_ptr<Generation> generate(std::span<const Segment> context) override;

    std::size_t turns_played() const { return cursor_; }

private:
    ScriptedConversation conversation_;
    std::size_t cursor_ = 0;
};

/// Replays a fixed event list once, appending EndOfTurn if missing.
class FixedEventsBackend : public GeneratorBackend {
public:
    explicit FixedEventsBackend(std::vector<GenEvent> events) : events_(std::move(events)) {}
    std::unique_ptr<Generation> generate(std::span<const Segment> context) override;

private:
    std::vector<GenEvent> events_;
};

/// Model-free backend: answers every turn with "ok" and one audio token per
/// input feature frame.
class StubBackend : public GeneratorBackend {
public:
    explicit StubBackend(InterleaveConfig cfg = {}) : cfg_(cfg) {}
    std::unique_ptr<Generation> generate(std::span<const Segment> context) override;

private:
    InterleaveConfig cfg_;
};

/// Builds backends from `scripted:<path>` or `stub:` specs. The script is
/// read once; each make() call yields an independent backend.
class BackendFactory {
public:
    explicit BackendFactory(std::string_view spec, InterleaveConfig cfg = {});

    /// `conversation` picks a scripted conversation by id; empty selects the first.
    std::unique_ptr<GeneratorBackend> make(std::string_view conversation = {}) const;

    bool scripted() const { return !script_.empty(); }
    const ScriptedConversation* find(std::string_view id) const;

private:
    std::vector<ScriptedConversation> script_;
    std::map<std::string, std::size_t, std::less<>> index_;
    InterleaveConfig cfg_;
};

}  // namespace voxweave
