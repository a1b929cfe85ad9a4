#include "voxweave/backends.hpp"

#include <deque>
#include <fstream>

#include <json.hpp>

#include "voxweave/error.hpp"
#include "voxweave/text.hpp"

namespace voxweave {

namespace {

class QueueGeneration : public Generation {
public:
    explicit QueueGeneration(std::vector<GenEvent> events) : events_(events.begin(), events.end()) {
        if (events_.empty() || events_.back().type != EventType::EndOfTurn)
            events_.push_back(GenEvent::end_of_turn());
    }

    std::optional<GenEvent> next() override {
        if (waiting_) throw BackendProtocolError("generation pulled before resume()");
        if (events_.empty()) return std::nullopt;
        GenEvent ev = std::move(events_.front());
        events_.pop_front();
        if (ev.type == EventType::ToolCallSpan) waiting_ = true;
        return ev;
    }

    void resume(std::span<const Segment>) override { waiting_ = false; }

private:
    std::deque<GenEvent> events_;
    bool waiting_ = false;
};

void append_text(std::vector<GenEvent>& out, std::string_view text) {
    for (std::uint32_t id : encode_text(text)) out.push_back(GenEvent::text(id));
}

std::vector<GenEvent> parse_turn(const nlohmann::json& items) {
    if (!items.is_array()) throw InvalidConfig("script turn must be an array");
    std::vector<GenEvent> events;
    for (const auto& item : items) {
        if (item.contains("text")) {
            append_text(events, item["text"].get<std::string>());
        } else if (item.contains("audio")) {
            for (const auto& id : item["audio"]) events.push_back(GenEvent::audio(id.get<std::uint32_t>()));
        } else if (item.contains("think")) {
            events.push_back(GenEvent::think_start());
            append_text(events, item["think"].get<std::string>());
            events.push_back(GenEvent::think_end());
        } else if (item.contains("tool_call")) {
            const auto& tc = item["tool_call"];
            ToolCall call;
            call.name = tc.at("name").get<std::string>();
            if (tc.contains("arguments"))
                for (const auto& [k, v] : tc["arguments"].items()) call.arguments[k] = v.get<std::string>();
            events.push_back(GenEvent::tool_call(serialize_tool_call(call)));
        } else if (item.contains("tool_call_raw")) {
            events.push_back(GenEvent::tool_call(item["tool_call_raw"].get<std::string>()));
        } else {
            throw InvalidConfig("unrecognised script item " + item.dump());
        }
    }
    return events;
}

}  // namespace

ScriptedConversation parse_script_line(std::string_view line) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfig(std::string("bad script line: ") + e.what());
    }
    ScriptedConversation conv;
    conv.id = doc.value("id", "");
    try {
        for (const auto& turn : doc.at("turns")) conv.turns.push_back(parse_turn(turn));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfig("script '" + conv.id + "': " + e.what());
    }
    return conv;
}

std::vector<ScriptedConversation> load_script(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open script " + path.string());
    std::vector<ScriptedConversation> out;
    std::string line;
    while (std::getline(in, line))
        if (!trim(line).empty()) out.push_back(parse_script_line(line));
    return out;
}

ScriptedBackend::ScriptedBackend(ScriptedConversation conversation) : conversation_(std::move(conversation)) {}

std::unique_ptr<Generation> ScriptedBackend::generate(std::span<const Segment>) {
    if (cursor_ >= conversation_.turns.size())
        throw BackendProtocolError("script '" + conversation_.id + "' has no turn " + std::to_string(cursor_ + 1));
    return std::make_unique<QueueGeneration>(conversation_.turns[cursor_++]);
}

std::unique_ptr<Generation> FixedEventsBackend::generate(std::span<const Segment>) {
    return std::make_unique<QueueGeneration>(events_);
}

std::unique_ptr<Generation> StubBackend::generate(std::span<const Segment> context) {
    std::size_t frames = 1;
    for (auto it = context.rbegin(); it != context.rend(); ++it)
        if (it->kind == SegmentKind::AudioFeatures) {
            frames = std::max<std::size_t>(1, it->count);
            break;
        }
    std::vector<GenEvent> events;
    append_text(events, "ok");
    const std::uint32_t usable = cfg_.audio_vocab_size > 1 ? cfg_.audio_vocab_size - 1 : 1;
    for (std::size_t i = 0; i < frames; ++i) {
        auto id = static_cast<std::uint32_t>((i * 7) % usable);
        if (id == cfg_.audio_pad) id = (id + 1) % usable;
        events.push_back(GenEvent::audio(id));
    }
    return std::make_unique<QueueGeneration>(std::move(events));
}

BackendFactory::BackendFactory(std::string_view spec, InterleaveConfig cfg) : cfg_(cfg) {
    if (spec.starts_with("scripted:")) {
        script_ = load_script(std::filesystem::path(std::string(spec.substr(9))));
        if (script_.empty()) throw InvalidConfig("script has no conversations");
        for (std::size_t i = 0; i < script_.size(); ++i) index_.emplace(script_[i].id, i);
    } else if (spec != "stub:" && spec != "stub") {
        throw InvalidConfig("unknown backend spec '" + std::string(spec) + "' (expected scripted:<path> or stub:)");
    }
}

const ScriptedConversation* BackendFactory::find(std::string_view id) const {
    if (script_.empty()) return nullptr;
    if (id.empty()) return &script_.front();
    const auto it = index_.find(id);
    return it == index_.end() ? nullptr : &script_[it->second];
}

std::unique_ptr<GeneratorBackend> BackendFactory::make(std::string_view conversation) const {
    if (script_.empty()) return std::make_unique<StubBackend>(cfg_);
    const ScriptedConversation* conv = find(conversation);
    if (!conv) throw InvalidConfig("script has no conversation '" + std::string(conversation) + "'");
    return std::make_unique<ScriptedBackend>(*conv);
}

}  // namespace voxweave
