#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace voxweave {

inline constexpr std::string_view kToolCallOpen = "<tool_call>";
inline constexpr std::string_view kToolCallClose = "</tool_call>";

namespace tools {
inline constexpr std::string_view kAudioSearch = "audio_search";
inline constexpr std::string_view kDatetime = "datetime";
inline constexpr std::string_view kWeather = "weather";
inline constexpr std::string_view kWebSearch = "web_search";
}  // namespace tools

/// The four tool names in canonical order.
std::span<const std::string_view> known_tools();

/// Required argument names for a tool; throws UnknownTool.
std::span<const std::string_view> required_parameters(std::string_view tool);

struct ToolCall {
    std::string name;
    std::map<std::string, std::string> arguments;

    friend bool operator==(const ToolCall&, const ToolCall&) = default;
};

/// Lowercases and trims keys, trims values.
std::map<std::string, std::string> normalize_arguments(const std::map<std::string, std::string>& args);

/// Throws UnknownTool, MissingParameter or UnexpectedParameter.
void validate_tool_call(const ToolCall& call);

/// Parses `<tool_call>{"name":..., "arguments":{...}}</tool_call>`, normalizes
/// argument keys and validates the result. Surrounding whitespace is ignored.
ToolCall parse_tool_call(std::string_view span);

/// Canonical wire text: compact JSON, "name" before "arguments", arguments sorted.
std::string serialize_tool_call(const ToolCall& call);

// ---------------------------------------------------------------------------
// Embedding and voice library

inline constexpr std::size_t kEmbeddingDim = 256;

struct Embedding {
    std::vector<double> values;
    bool no_features = false;  // zero vector: nothing to hash
};

/// Feature-hashing embedder over character bigrams and trigrams of the
/// lowercased, whitespace-collapsed text. The result has unit L2 norm unless
/// `no_features` is set.
Embedding embed_text(std::string_view text, std::size_t dim = kEmbeddingDim);

double cosine(std::span<const double> a, std::span<const double> b);

struct VoiceLibraryEntry {
    std::string id;
    std::vector<std::uint32_t> audio_tokens;
    std::string transcription;
    std::string description;
    std::vector<double> embedding;

    friend bool operator==(const VoiceLibraryEntry&, const VoiceLibraryEntry&) = default;
};

struct SearchHit {
    const VoiceLibraryEntry* entry = nullptr;
    double similarity = 0.0;
};

/// Immutable in-memory index; exact cosine scan.
class VoiceLibrary {
public:
    VoiceLibrary() = default;

    /// Entries without an embedding get embed_text(description). Throws
    /// InvalidConfig on an empty description, a duplicate id, or a
    /// non-unit embedding.
    explicit VoiceLibrary(std::vector<VoiceLibraryEntry> entries);

    /// Reads `manifest.jsonl` from `dir`: one {id, wav_path | token_path,
    /// transcription, description} record per line. Uses the embedding
    /// sidecar when one is present.
    static VoiceLibrary load(const std::filesystem::path& dir);

    const std::vector<VoiceLibraryEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    /// Sorted by similarity descending then id ascending. Throws EmptyLibrary.
    std::vector<SearchHit> search(std::span<const double> query, std::size_t k) const;

private:
    std::vector<VoiceLibraryEntry> entries_;
};

std::vector<SearchHit> audio_search(std::string_view query, std::size_t k, const VoiceLibrary& library);

inline constexpr std::string_view kSidecarName = "embeddings.bin";

/// Sidecar layout: "VLE1", u32 dim, u32 count, then per entry u32 id length,
/// id bytes and dim little-endian float32 values.
void write_embedding_sidecar(const std::filesystem::path& path, const VoiceLibrary& library);
std::map<std::string, std::vector<double>> read_embedding_sidecar(const std::filesystem::path& path);

/// Computes embeddings for a library directory and writes the sidecar.
std::size_t build_library_sidecar(const std::filesystem::path& dir);

/// Placeholder tokenizer for library WAVs: one token per 40 ms chunk derived
/// from its level and zero-crossing count. Stands in for a real speech
/// tokenizer so entries loaded from audio still carry tokens.
std::vector<std::uint32_t> stub_audio_tokens(std::span<const float> samples, std::uint32_t sample_rate,
                                             std::uint32_t vocab_size = 6600);

// ---------------------------------------------------------------------------
// Clients and dispatch

class WeatherClient {
public:
    virtual ~WeatherClient() = default;
    virtual std::string forecast(const std::string& location) = 0;
};

class WebSearchClient {
public:
    virtual ~WebSearchClient() = default;
    virtual std::string search(const std::string& query) = 0;
};

/// Recorded answers keyed by normalized (lowercased, trimmed) argument.
/// Unknown keys throw, which the dispatcher reports as an error result.
class FixtureWeatherClient : public WeatherClient {
public:
    explicit FixtureWeatherClient(std::map<std::string, std::string> answers);
    std::string forecast(const std::string& location) override;

private:
    std::map<std::string, std::string> answers_;
};

class FixtureWebSearchClient : public WebSearchClient {
public:
    explicit FixtureWebSearchClient(std::map<std::string, std::string> answers);
    std::string search(const std::string& query) override;

private:
    std::map<std::string, std::string> answers_;
};

using Clock = std::function<std::chrono::system_clock::time_point()>;

/// `2025-01-01T00:00:00Z` style UTC timestamp.
std::string format_utc(std::chrono::system_clock::time_point t);

struct ToolClients {
    Clock clock = [] { return std::chrono::system_clock::now(); };
    std::shared_ptr<WeatherClient> weather;
    std::shared_ptr<WebSearchClient> web_search;
    std::shared_ptr<const VoiceLibrary> library;
    std::size_t audio_search_k = 1;
};

struct ToolResult {
    ToolCall call;
    bool ok = false;
    std::string payload;  // ok: textual result; error: reason
    std::vector<VoiceLibraryEntry> entries;  // audio_search hits

    const std::string& reason() const { return payload; }
    friend bool operator==(const ToolResult&, const ToolResult&) = default;
};

/// Routes a call to its client. Never throws: every failure becomes an error result.
ToolResult dispatch(const ToolCall& call, ToolClients& clients);

/// Parse, validate and dispatch a raw span; parse failures also become error results.
ToolResult dispatch_span(std::string_view span, ToolClients& clients);

}  // namespace voxweave
