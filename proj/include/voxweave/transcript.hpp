#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "voxweave/session.hpp"

namespace voxweave {

// Session transcripts are JSON lines. The first record describes the
// session; every turn then contributes, in order:
//
//   {"type":"turn_begin", "turn", "feature_ref", "frames"}
//   {"type":"context", "turn", "segments":[...]}        one per backend (re)start
//   {"type":"event", "turn", "event", ...}              one per generated event
//   {"type":"tool_result", "turn", ...}                 one per resolved call
//   {"type":"turn_end", "turn", ...}  or  {"type":"turn_error", "turn", "what"}

std::string serialize_context(std::size_t turn, std::span<const Segment> context);
std::string serialize_turn_result(std::size_t turn, const TurnResult& result);

/// Writes one record per observed event. Not thread-safe; one writer per session.
class TranscriptWriter : public TurnObserver {
public:
    TranscriptWriter(std::ostream& out, const SessionConfig& config, const Detokenizer& detokenizer);

    void on_turn_begin(std::size_t turn_index, const Segment& current_audio) override;
    void on_context(std::span<const Segment> context) override;
    void on_event(const GenEvent& event) override;
    void on_tool_result(const ToolResult& result) override;
    void on_turn_end(const TurnResult& result) override;
    void on_turn_error(const std::string& what) override;

private:
    void write(const std::string& line);

    std::ostream& out_;
    std::size_t turn_ = 0;
};

/// Forwards every callback to several observers in order.
class ObserverFanout : public TurnObserver {
public:
    explicit ObserverFanout(std::vector<TurnObserver*> observers) : observers_(std::move(observers)) {}
    void on_turn_begin(std::size_t i, const Segment& a) override;
    void on_context(std::span<const Segment> c) override;
    void on_event(const GenEvent& e) override;
    void on_tool_result(const ToolResult& r) override;
    void on_turn_end(const TurnResult& r) override;
    void on_turn_error(const std::string& w) override;

private:
    std::vector<TurnObserver*> observers_;
};

struct ReplayReport {
    std::size_t turns = 0;
    std::vector<std::string> turn_lines;  // re-derived turn_end / turn_error records
    std::vector<std::string> mismatches;  // human-readable divergences
    bool identical() const { return mismatches.empty(); }
};

/// Re-runs every recorded turn through the session runtime, feeding the
/// recorded backend events and tool results back in, and compares the
/// contexts and turn results it derives with the recorded ones.
ReplayReport replay_transcript(std::istream& in);

}  // namespace voxweave
