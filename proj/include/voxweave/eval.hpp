#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "voxweave/backends.hpp"
#include "voxweave/metrics.hpp"
#include "voxweave/session.hpp"

namespace voxweave {

inline constexpr std::array<std::string_view, 11> kParalinguisticTasks{
    "gender", "age", "timbre", "scenario", "event", "emotion", "pitch", "rhythm", "speed", "style", "vocal"};

bool is_paralinguistic_task(std::string_view task);

/// One benchmark item. Paralinguistic records carry a gold answer text;
/// tool-call records carry a gold outcome and a conversation length.
struct EvalRecord {
    std::string id;
    std::string task;  // paralinguistic dimension or tool name
    std::vector<std::string> audio;  // clip paths, relative to the manifest
    std::string gold;
    std::size_t turns = 1;
    bool gold_trigger = false;
    std::optional<std::string> gold_tool;
    std::optional<std::map<std::string, std::string>> gold_params;
    std::string split;
};

/// Manifest: JSON lines {id, task, audio: [paths], gold, turns, split}.
/// For tool-call records `gold` is an object {trigger, tool, arguments}.
std::vector<EvalRecord> load_manifest(const std::filesystem::path& path);
EvalRecord parse_manifest_line(std::string_view line);
std::string manifest_line(const EvalRecord& record);

enum class Verdict { Correct, Incorrect, Unscored };

std::string_view to_string(Verdict v);

struct JudgeVerdict {
    std::string record_id;
    Verdict verdict = Verdict::Unscored;
    std::string transcript;
    std::string rationale;

    bool correct() const { return verdict == Verdict::Correct; }
};

/// Turns a spoken answer into text. Live ASR adapters implement this too.
class Transcriber {
public:
    virtual ~Transcriber() = default;
    virtual std::string transcribe(const TurnResult& response) = 0;
};

/// Reads back the text channel the audio was generated alongside.
class EchoTranscriber : public Transcriber {
public:
    std::string transcribe(const TurnResult& response) override { return response.text; }
};

/// Sees only the transcript and the gold annotation, never audio.
class Judge {
public:
    virtual ~Judge() = default;
    virtual JudgeVerdict judge(const EvalRecord& record, std::string_view transcript) = 0;
};

/// Correct iff both texts are equal after normalize_text.
class ExactMatchJudge : public Judge {
public:
    explicit ExactMatchJudge(NormalizationProfile profile = NormalizationProfile::english_words())
        : profile_(profile) {}
    JudgeVerdict judge(const EvalRecord& record, std::string_view transcript) override;

private:
    NormalizationProfile profile_;
};

/// Text completion endpoint used by PromptJudge.
class TextCompleter {
public:
    virtual ~TextCompleter() = default;
    virtual std::string complete(const std::string& prompt) = 0;
};

/// Renders a versioned prompt template ({{task}}, {{gold}}, {{response}})
/// and reads the verdict from the first word of the completion:
/// CORRECT or INCORRECT. Anything else is Unscored.
class PromptJudge : public Judge {
public:
    PromptJudge(std::string prompt_template, TextCompleter& completer);
    static std::string load_template(const std::filesystem::path& path);

    std::string render(const EvalRecord& record, std::string_view transcript) const;
    JudgeVerdict judge(const EvalRecord& record, std::string_view transcript) override;

private:
    std::string template_;
    TextCompleter& completer_;
};

inline constexpr std::string_view kJudgePromptFile = "judge_prompt_v1.txt";

/// Produces one response per record by running session turns against a
/// backend built for that record (scripted backends are selected by record id).
class ModelPipeline {
public:
    ModelPipeline(const BackendFactory& factory, SessionConfig config, std::filesystem::path audio_root = {});

    /// Runs all record turns; returns every turn's result.
    std::vector<TurnResult> run(const EvalRecord& record) const;

private:
    PcmClip clip_for(const EvalRecord& record, std::size_t turn) const;

    const BackendFactory& factory_;
    SessionConfig config_;
    std::filesystem::path audio_root_;
};

/// Deterministic speech-like test clip: a one second tone with a pitch and
/// amplitude envelope derived from `key`.
PcmClip synthetic_clip(std::string_view key, double seconds = 1.0, std::uint32_t sample_rate = kDefaultSampleRate);

struct TaskScore {
    std::string task;
    std::size_t correct = 0;
    std::size_t incorrect = 0;
    std::size_t unscored = 0;

    std::size_t total() const { return correct + incorrect + unscored; }
    /// 100 * correct / scored; nullopt when nothing was scored.
    std::optional<double> accuracy() const;
};

struct ParalinguisticReport {
    std::vector<TaskScore> tasks;  // in kParalinguisticTasks order, present tasks only
    std::optional<double> average;  // mean_of_subsets over scored tasks
    std::size_t unscored = 0;
    std::vector<JudgeVerdict> verdicts;  // sorted by record id
};

ParalinguisticReport summarize_paralinguistic(std::span<const EvalRecord> records,
                                              std::span<const JudgeVerdict> verdicts);

struct EvalOptions {
    std::size_t workers = 4;
};

ParalinguisticReport run_paralinguistic(std::span<const EvalRecord> records, const ModelPipeline& model,
                                        Transcriber& asr, Judge& judge, EvalOptions options = {});

struct ToolReportRow {
    std::string tool;
    ToolCallMetrics metrics;
};

struct ToolcallReport {
    std::vector<ToolReportRow> rows;  // sorted by tool name
    std::size_t unscored = 0;
    std::vector<std::string> unscored_ids;
};

/// Buckets outcomes by record task and computes the funnel for each tool.
ToolcallReport summarize_toolcall(std::span<const EvalRecord> records,
                                  std::span<const std::optional<ToolCallOutcome>> outcomes);

/// Runs each conversation; the first call on the final turn is the prediction.
ToolcallReport run_toolcall(std::span<const EvalRecord> records, const ModelPipeline& model,
                            EvalOptions options = {});

std::string report_json(const ParalinguisticReport& report);
std::string report_table(const ParalinguisticReport& report);
std::string report_json(const ToolcallReport& report);
std::string report_table(const ToolcallReport& report);

enum class Placement { Before, After };  // where the speech goes relative to the audios
enum class MixMode { Concat, Mix };

/// Sample-wise sum, zero-padded to the longest clip. Throws RateMismatch.
PcmClip mix_clips(std::span<const PcmClip> clips);

/// Concatenates (speech placed before or after the audios) or mixes all
/// clips, then scales down so the peak is at most 1. Throws RateMismatch
/// and EmptyAudio when there is nothing to combine.
PcmClip build_mixture(std::span<const PcmClip> audios, const PcmClip& speech, Placement placement,
                      MixMode mode = MixMode::Concat);

struct ToolcallFixture {
    std::vector<EvalRecord> records;
    std::vector<ScriptedConversation> perfect;  // reproduces every gold label
};

/// Synthetic tool-call benchmark: per tool, `per_tool` positive and as many
/// negative conversations of 3-6 turns.
ToolcallFixture make_toolcall_fixture(std::size_t per_tool = 200, std::uint32_t seed = 7);

struct ParalinguisticFixture {
    std::vector<EvalRecord> records;
    std::vector<ScriptedConversation> perfect;
};

/// `per_task` records for each of the 11 tasks with gold answers.
ParalinguisticFixture make_paralinguistic_fixture(std::size_t per_task = 50, std::uint32_t seed = 11);

std::string script_line(const ScriptedConversation& conversation);

}  // namespace voxweave
