#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace voxweave {

// Frame layout, all integers little-endian:
//
//   u32 length | u8 type | body[length]
//   body = u64 session_id | u64 seq_no | payload
//
// seq_no counts from 0 per session and direction.

inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kFrameHeaderSize = 5;
inline constexpr std::size_t kBodyPrefixSize = 16;
inline constexpr std::size_t kMaxAudioInPayload = 64 * 1024;
inline constexpr std::size_t kMaxPayload = 4 * 1024 * 1024;

enum class FrameType : std::uint8_t {
    Hello = 0,            // u8 version, then optional UTF-8 conversation id
    AudioIn = 1,          // PCM16 mono samples; an empty payload flushes the utterance
    TextPartial = 2,      // UTF-8 bytes of one text token
    AudioOut = 3,         // u32 audio token id, then its PCM16 rendering
    ToolCallEvent = 4,    // raw tool-call span
    ToolResultEvent = 5,  // JSON {name, ok, payload}
    TurnEnd = 6,          // JSON turn summary
    Error = 7,            // UTF-8 message
};

std::string_view to_string(FrameType type);

struct Frame {
    FrameType type = FrameType::Error;
    std::uint64_t session_id = 0;
    std::uint64_t seq_no = 0;
    std::vector<std::uint8_t> payload;

    std::string payload_text() const { return {payload.begin(), payload.end()}; }
    friend bool operator==(const Frame&, const Frame&) = default;
};

/// Throws WireError when the frame violates a size limit.
std::vector<std::uint8_t> encode_frame(const Frame& frame);

/// Incremental decoder for a byte stream. Throws WireError on a malformed
/// frame; the stream cannot be resynchronised afterwards.
class FrameDecoder {
public:
    void feed(std::span<const std::uint8_t> bytes);
    std::optional<Frame> next();
    std::size_t buffered() const { return buffer_.size() - offset_; }

private:
    std::vector<std::uint8_t> buffer_;
    std::size_t offset_ = 0;
};

Frame make_frame(FrameType type, std::uint64_t session_id, std::uint64_t seq_no, std::string_view payload);

std::vector<std::uint8_t> hello_payload(std::string_view conversation = {});
struct HelloInfo {
    std::uint8_t version = 0;
    std::string conversation;
};
HelloInfo parse_hello(const Frame& frame);

std::vector<std::uint8_t> pcm16_payload(std::span<const std::int16_t> samples);
std::vector<std::int16_t> parse_pcm16(std::span<const std::uint8_t> payload);

std::vector<std::uint8_t> audio_out_payload(std::uint32_t token, std::span<const std::int16_t> samples);
struct AudioOutInfo {
    std::uint32_t token = 0;
    std::vector<std::int16_t> samples;
};
AudioOutInfo parse_audio_out(const Frame& frame);

}  // namespace voxweave
