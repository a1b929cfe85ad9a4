#include "voxweave/tooling.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "voxweave/audio.hpp"
#include "voxweave/error.hpp"
#include "voxweave/text.hpp"
#include "voxweave/wav.hpp"

namespace voxweave {

namespace {

constexpr std::array<std::string_view, 4> kTools{tools::kAudioSearch, tools::kDatetime,
                                                  tools::kWeather, tools::kWebSearch};
constexpr std::array<std::string_view, 1> kQueryParam{"query"};
constexpr std::array<std::string_view, 1> kLocationParam{"location"};

std::string lower_key(std::string_view key) { return ascii_lower(trim(key)); }

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::span<const std::string_view> known_tools() { return kTools; }

std::span<const std::string_view> required_parameters(std::string_view tool) {
    if (tool == tools::kAudioSearch || tool == tools::kWebSearch) return kQueryParam;
    if (tool == tools::kWeather) return kLocationParam;
    if (tool == tools::kDatetime) return {};
    throw UnknownTool(std::string(tool));
}

std::map<std::string, std::string> normalize_arguments(const std::map<std::string, std::string>& args) {
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : args) out[lower_key(k)] = std::string(trim(v));
    return out;
}

void validate_tool_call(const ToolCall& call) {
    const auto required = required_parameters(call.name);
    for (std::string_view p : required) {
        const auto it = call.arguments.find(std::string(p));
        if (it == call.arguments.end() || it->second.empty()) throw MissingParameter(std::string(p));
    }
    for (const auto& [k, v] : call.arguments)
        if (std::find(required.begin(), required.end(), k) == required.end()) throw UnexpectedParameter(k);
}

ToolCall parse_tool_call(std::string_view span) {
    const std::size_t lead = span.find_first_not_of(" \t\r\n");
    if (lead == std::string_view::npos) throw ParseError(0, "empty tool call span");
    const std::string_view body_and_tags = trim(span);
    if (!body_and_tags.starts_with(kToolCallOpen)) throw ParseError(lead, "missing <tool_call> marker");
    if (!body_and_tags.ends_with(kToolCallClose))
        throw ParseError(lead + body_and_tags.size(), "missing </tool_call> marker");

    const std::size_t body_offset = lead + kToolCallOpen.size();
    const std::string_view body = body_and_tags.substr(
        kToolCallOpen.size(), body_and_tags.size() - kToolCallOpen.size() - kToolCallClose.size());

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(body_offset + (e.byte > 0 ? e.byte - 1 : 0), "invalid JSON body");
    }
    if (!doc.is_object()) throw ParseError(body_offset, "body must be a JSON object");
    const auto name = doc.find("name");
    if (name == doc.end() || !name->is_string()) throw ParseError(body_offset, "missing string field \"name\"");

    ToolCall call;
    call.name = name->get<std::string>();
    if (const auto args = doc.find("arguments"); args != doc.end()) {
        if (!args->is_object()) throw ParseError(body_offset, "\"arguments\" must be an object");
        for (const auto& [k, v] : args->items()) {
            if (!v.is_string()) throw ParseError(body_offset, "argument \"" + k + "\" must be a string");
            call.arguments[lower_key(k)] = std::string(trim(v.get<std::string>()));
        }
    }
    validate_tool_call(call);
    return call;
}

std::string serialize_tool_call(const ToolCall& call) {
    nlohmann::ordered_json doc;
    doc["name"] = call.name;
    doc["arguments"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : call.arguments) doc["arguments"][k] = v;
    return std::string(kToolCallOpen) + doc.dump() + std::string(kToolCallClose);
}

// ---------------------------------------------------------------------------

Embedding embed_text(std::string_view text, std::size_t dim) {
    Embedding e;
    e.values.assign(dim, 0.0);
    const std::string norm = collapse_whitespace(ascii_lower(text));
    if (norm.empty() || dim == 0) {
        e.no_features = true;
        return e;
    }
    std::vector<std::string> chars;
    chars.emplace_back(" ");
    for (char32_t cp : utf8_decode(norm)) chars.push_back(utf8_encode(cp));
    chars.emplace_back(" ");

    for (std::size_t n = 2; n <= 3; ++n) {
        for (std::size_t i = 0; i + n <= chars.size(); ++i) {
            std::string gram;
            for (std::size_t j = 0; j < n; ++j) gram += chars[i + j];
            const std::uint64_t h = fnv1a(gram);
            const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
            e.values[h % dim] += sign;
        }
    }
    double norm2 = 0.0;
    for (double v : e.values) norm2 += v * v;
    if (norm2 == 0.0) {
        e.no_features = true;
        return e;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& v : e.values) v *= inv;
    return e;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidConfig("embedding dimensions differ");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

VoiceLibrary::VoiceLibrary(std::vector<VoiceLibraryEntry> entries) : entries_(std::move(entries)) {
    std::set<std::string> ids;
    for (VoiceLibraryEntry& e : entries_) {
        if (trim(e.description).empty()) throw InvalidConfig("library entry '" + e.id + "' has no description");
        if (!ids.insert(e.id).second) throw InvalidConfig("duplicate library id '" + e.id + "'");
        if (e.embedding.empty()) {
            Embedding emb = embed_text(e.description);
            if (emb.no_features) throw InvalidConfig("library entry '" + e.id + "' description has no features");
            e.embedding = std::move(emb.values);
        }
        double n2 = 0.0;
        for (double v : e.embedding) n2 += v * v;
        if (std::abs(std::sqrt(n2) - 1.0) > 1e-6)
            throw InvalidConfig("library entry '" + e.id + "' embedding is not unit length");
    }
}

std::vector<SearchHit> VoiceLibrary::search(std::span<const double> query, std::size_t k) const {
    if (entries_.empty()) throw EmptyLibrary();
    if (k == 0) throw InvalidConfig("k must be >= 1");
    std::vector<SearchHit> hits;
    hits.reserve(entries_.size());
    for (const VoiceLibraryEntry& e : entries_) hits.push_back({&e, cosine(query, e.embedding)});
    const auto better = [](const SearchHit& a, const SearchHit& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.entry->id < b.entry->id;
    };
    const std::size_t keep = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), better);
    hits.resize(keep);
    return hits;
}

std::vector<SearchHit> audio_search(std::string_view query, std::size_t k, const VoiceLibrary& library) {
    if (library.empty()) throw EmptyLibrary();
    const Embedding q = embed_text(query, library.entries().front().embedding.size());
    return library.search(q.values, k);
}

std::vector<std::uint32_t> stub_audio_tokens(std::span<const float> samples, std::uint32_t sample_rate,
                                             std::uint32_t vocab_size) {
    const std::size_t chunk = std::max<std::size_t>(1, sample_rate / 25);
    std::vector<std::uint32_t> ids;
    for (std::size_t begin = 0; begin < samples.size(); begin += chunk) {
        const auto piece = samples.subspan(begin, std::min(chunk, samples.size() - begin));
        const double db = power_dbfs(piece);
        const auto level = static_cast<std::uint32_t>(std::isfinite(db) ? std::clamp(-db, 0.0, 96.0) / 3.0 : 32.0);
        std::uint32_t crossings = 0;
        for (std::size_t i = 1; i < piece.size(); ++i)
            if ((piece[i - 1] < 0.0f) != (piece[i] < 0.0f)) ++crossings;
        ids.push_back((level * 200 + std::min<std::uint32_t>(crossings, 199)) % (vocab_size - 1));
    }
    return ids;
}

namespace {

std::vector<std::uint32_t> read_token_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint32_t> ids;
    std::uint64_t v = 0;
    while (in >> v) {
        if (v > UINT32_MAX) throw IoError(path.string() + ": token id out of range");
        ids.push_back(static_cast<std::uint32_t>(v));
    }
    if (!in.eof()) throw IoError(path.string() + ": expected whitespace-separated token ids");
    return ids;
}

void put_u32(std::ostream& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::istream& in) {
    std::array<unsigned char, 4> b{};
    if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw IoError("truncated embedding sidecar");
    return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
           (std::uint32_t{b[3]} << 24);
}

}  // namespace

VoiceLibrary VoiceLibrary::load(const std::filesystem::path& dir) {
    const auto manifest = dir / "manifest.jsonl";
    std::ifstream in(manifest);
    if (!in) throw IoError("cannot open " + manifest.string());

    std::map<std::string, std::vector<double>> cached;
    if (const auto sidecar = dir / kSidecarName; std::filesystem::exists(sidecar))
        cached = read_embedding_sidecar(sidecar);

    std::vector<VoiceLibraryEntry> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IoError(manifest.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        VoiceLibraryEntry e;
        e.id = rec.at("id").get<std::string>();
        e.transcription = rec.value("transcription", "");
        e.description = rec.value("description", "");
        if (rec.contains("token_path")) {
            e.audio_tokens = read_token_file(dir / rec["token_path"].get<std::string>());
        } else if (rec.contains("wav_path")) {
            const PcmClip clip = read_wav(dir / rec["wav_path"].get<std::string>());
            e.audio_tokens = stub_audio_tokens(clip.samples, clip.sample_rate);
        }
        if (const auto it = cached.find(e.id); it != cached.end()) e.embedding = it->second;
        entries.push_back(std::move(e));
    }
    return VoiceLibrary(std::move(entries));
}

void write_embedding_sidecar(const std::filesystem::path& path, const VoiceLibrary& library) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    const std::uint32_t dim =
        library.empty() ? static_cast<std::uint32_t>(kEmbeddingDim)
                        : static_cast<std::uint32_t>(library.entries().front().embedding.size());
    out.write("VLE1", 4);
    put_u32(out, dim);
    put_u32(out, static_cast<std::uint32_t>(library.size()));
    for (const VoiceLibraryEntry& e : library.entries()) {
        put_u32(out, static_cast<std::uint32_t>(e.id.size()));
        out.write(e.id.data(), static_cast<std::streamsize>(e.id.size()));
        for (double v : e.embedding) {
            const auto f = static_cast<float>(v);
            std::uint32_t raw;
            std::memcpy(&raw, &f, sizeof raw);
            put_u32(out, raw);
        }
    }
    if (!out) throw IoError("failed writing " + path.string());
}

std::map<std::string, std::vector<double>> read_embedding_sidecar(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), 4) || std::string_view(magic.data(), 4) != "VLE1")
        throw IoError(path.string() + " is not an embedding sidecar");
    const std::uint32_t dim = get_u32(in);
    const std::uint32_t count = get_u32(in);
    std::map<std::string, std::vector<double>> out;
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string id(get_u32(in), '\0');
        if (!in.read(id.data(), static_cast<std::streamsize>(id.size()))) throw IoError("truncated embedding sidecar");
        std::vector<double> values(dim);
        double n2 = 0.0;
        for (double& v : values) {
            const std::uint32_t raw = get_u32(in);
            float f;
            std::memcpy(&f, &raw, sizeof f);
            v = f;
            n2 += v * v;
        }
        // float32 storage loses a little precision; restore the unit norm.
        if (n2 > 0.0)
            for (double& v : values) v /= std::sqrt(n2);
        out.emplace(std::move(id), std::move(values));
    }
    return out;
}

std::size_t build_library_sidecar(const std::filesystem::path& dir) {
    const auto sidecar = dir / kSidecarName;
    std::filesystem::remove(sidecar);
    const VoiceLibrary library = VoiceLibrary::load(dir);
    write_embedding_sidecar(sidecar, library);
    return library.size();
}

// ---------------------------------------------------------------------------

FixtureWeatherClient::FixtureWeatherClient(std::map<std::string, std::string> answers) {
    for (auto& [k, v] : answers) answers_[lower_key(k)] = std::move(v);
}

std::string FixtureWeatherClient::forecast(const std::string& location) {
    const auto it = answers_.find(lower_key(location));
    if (it == answers_.end()) throw IoError("no forecast recorded for '" + location + "'");
    return it->second;
}

FixtureWebSearchClient::FixtureWebSearchClient(std::map<std::string, std::string> answers) {
    for (auto& [k, v] : answers) answers_[lower_key(k)] = std::move(v);
}

std::string FixtureWebSearchClient::search(const std::string& query) {
    const auto it = answers_.find(lower_key(query));
    if (it == answers_.end()) throw IoError("no search results recorded for '" + query + "'");
    return it->second;
}

std::string format_utc(std::chrono::system_clock::time_point t) {
    const std::time_t secs = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    std::array<char, 32> buf{};
    std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf.data();
}

ToolResult dispatch(const ToolCall& call, ToolClients& clients) {
    ToolResult result;
    result.call = call;
    try {
        validate_tool_call(call);
        if (call.name == tools::kDatetime) {
            result.payload = format_utc(clients.clock());
        } else if (call.name == tools::kWeather) {
            if (!clients.weather) throw InvalidConfig("no weather client configured");
            result.payload = clients.weather->forecast(call.arguments.at("location"));
        } else if (call.name == tools::kWebSearch) {
            if (!clients.web_search) throw InvalidConfig("no web search client configured");
            result.payload = clients.web_search->search(call.arguments.at("query"));
        } else {
            if (!clients.library) throw InvalidConfig("no voice library configured");
            const auto hits = audio_search(call.arguments.at("query"), clients.audio_search_k, *clients.library);
            if (hits.empty()) throw EmptyLibrary();
            std::ostringstream text;
            for (const SearchHit& h : hits) {
                result.entries.push_back(*h.entry);
                text << h.entry->id << ": " << h.entry->transcription << "\n";
            }
            result.payload = text.str();
        }
        result.ok = true;
    } catch (const std::exception& e) {
        result.ok = false;
        result.entries.clear();
        result.payload = e.what();
    }
    return result;
}

ToolResult dispatch_span(std::string_view span, ToolClients& clients) {
    try {
        return dispatch(parse_tool_call(span), clients);
    } catch (const std::exception& e) {
        ToolResult result;
        // Keep whatever name the span carried so the failure stays attributable.
        try {
            const std::string_view t = trim(span);
            if (t.starts_with(kToolCallOpen) && t.ends_with(kToolCallClose)) {
                const auto body = t.substr(kToolCallOpen.size(),
                                           t.size() - kToolCallOpen.size() - kToolCallClose.size());
                const auto doc = nlohmann::json::parse(body);
                if (doc.is_object() && doc.contains("name") && doc["name"].is_string())
                    result.call.name = doc["name"].get<std::string>();
            }
        } catch (const std::exception&) {
        }
        result.ok = false;
        result.payload = e.what();
        return result;
    }
}

}  // namespace voxweave
