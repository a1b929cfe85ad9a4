#include "voxweave/wire.hpp"

#include "voxweave/error.hpp"

namespace voxweave {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(const std::uint8_t* p, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

void check_payload(FrameType type, std::size_t size) {
    if (size > kMaxPayload) throw WireError("frame payload of " + std::to_string(size) + " bytes is too large");
    if (type == FrameType::AudioIn) {
        if (size > kMaxAudioInPayload)
            throw WireError("AudioIn payload of " + std::to_string(size) + " bytes exceeds 64 KiB");
        if (size % 2 != 0) throw WireError("AudioIn payload has an odd byte count");
    }
}

}  // namespace

std::string_view to_string(FrameType type) {
    switch (type) {
        case FrameType::Hello: return "Hello";
        case FrameType::AudioIn: return "AudioIn";
        case FrameType::TextPartial: return "TextPartial";
        case FrameType::AudioOut: return "AudioOut";
        case FrameType::ToolCallEvent: return "ToolCallEvent";
        case FrameType::ToolResultEvent: return "ToolResultEvent";
        case FrameType::TurnEnd: return "TurnEnd";
        case FrameType::Error: return "Error";
    }
    return "Unknown";
}

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
    check_payload(frame.type, frame.payload.size());
    std::vector<std::uint8_t> out;
    out.reserve(kFrameHeaderSize + kBodyPrefixSize + frame.payload.size());
    put_u32(out, static_cast<std::uint32_t>(kBodyPrefixSize + frame.payload.size()));
    out.push_back(static_cast<std::uint8_t>(frame.type));
    put_u64(out, frame.session_id);
    put_u64(out, frame.seq_no);
    out.insert(out.end(), frame.payload.begin(), frame.payload.end());
    return out;
}

void FrameDecoder::feed(std::span<const std::uint8_t> bytes) {
    if (offset_ > 0 && offset_ == buffer_.size()) {
        buffer_.clear();
        offset_ = 0;
    }
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<Frame> FrameDecoder::next() {
    if (buffered() < kFrameHeaderSize) return std::nullopt;
    const std::uint8_t* p = buffer_.data() + offset_;
    const auto length = static_cast<std::size_t>(get_le(p, 4));
    const std::uint8_t raw_type = p[4];
    if (raw_type > static_cast<std::uint8_t>(FrameType::Error))
        throw WireError("unknown frame type " + std::to_string(raw_type));
    const auto type = static_cast<FrameType>(raw_type);
    if (length < kBodyPrefixSize) throw WireError("frame body of " + std::to_string(length) + " bytes is too short");
    check_payload(type, length - kBodyPrefixSize);
    if (buffered() < kFrameHeaderSize + length) return std::nullopt;

    Frame f;
    f.type = type;
    f.session_id = get_le(p + 5, 8);
    f.seq_no = get_le(p + 13, 8);
    f.payload.assign(p + kFrameHeaderSize + kBodyPrefixSize, p + kFrameHeaderSize + length);
    offset_ += kFrameHeaderSize + length;
    if (offset_ > 1 << 16 && offset_ * 2 > buffer_.size()) {
        buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(offset_));
        offset_ = 0;
    }
    return f;
}

Frame make_frame(FrameType type, std::uint64_t session_id, std::uint64_t seq_no, std::string_view payload) {
    return {type, session_id, seq_no, std::vector<std::uint8_t>(payload.begin(), payload.end())};
}

std::vector<std::uint8_t> hello_payload(std::string_view conversation) {
    std::vector<std::uint8_t> out{kWireVersion};
    out.insert(out.end(), conversation.begin(), conversation.end());
    return out;
}

HelloInfo parse_hello(const Frame& frame) {
    if (frame.type != FrameType::Hello) throw WireError("expected Hello, got " + std::string(to_string(frame.type)));
    if (frame.payload.empty()) throw WireError("Hello frame without a version byte");
    HelloInfo info;
    info.version = frame.payload[0];
    info.conversation.assign(frame.payload.begin() + 1, frame.payload.end());
    return info;
}

std::vector<std::uint8_t> pcm16_payload(std::span<const std::int16_t> samples) {
    std::vector<std::uint8_t> out;
    out.reserve(samples.size() * 2);
    for (std::int16_t s : samples) {
        const auto u = static_cast<std::uint16_t>(s);
        out.push_back(static_cast<std::uint8_t>(u & 0xff));
        out.push_back(static_cast<std::uint8_t>(u >> 8));
    }
    return out;
}

std::vector<std::int16_t> parse_pcm16(std::span<const std::uint8_t> payload) {
    if (payload.size() % 2 != 0) throw WireError("PCM16 payload has an odd byte count");
    std::vector<std::int16_t> out(payload.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::int16_t>(static_cast<std::uint16_t>(payload[2 * i] | (payload[2 * i + 1] << 8)));
    return out;
}

std::vector<std::uint8_t> audio_out_payload(std::uint32_t token, std::span<const std::int16_t> samples) {
    std::vector<std::uint8_t> out;
    put_u32(out, token);
    const auto pcm = pcm16_payload(samples);
    out.insert(out.end(), pcm.begin(), pcm.end());
    return out;
}

AudioOutInfo parse_audio_out(const Frame& frame) {
    if (frame.type != FrameType::AudioOut) throw WireError("expected AudioOut");
    if (frame.payload.size() < 4) throw WireError("AudioOut frame without a token id");
    AudioOutInfo info;
    info.token = static_cast<std::uint32_t>(get_le(frame.payload.data(), 4));
    info.samples = parse_pcm16(std::span(frame.payload).subspan(4));
    return info;
}

}  // namespace voxweave
