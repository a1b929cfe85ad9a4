#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace voxweave {

inline constexpr std::uint32_t kDefaultAudioVocabSize = 6600;

enum class Channel : std::uint8_t { Text = 0, Audio = 1 };

struct Token {
    Channel channel = Channel::Text;
    std::uint32_t id = 0;

    friend bool operator==(const Token&, const Token&) = default;
};

inline Token text_token(std::uint32_t id) { return {Channel::Text, id}; }
inline Token audio_token(std::uint32_t id) { return {Channel::Audio, id}; }

/// Block layout of the decoder output: every block holds `n_text` text slots
/// followed by `n_audio` audio slots. Pad ids are reserved; source streams
/// must not contain them or stripping cannot tell them apart.
struct InterleaveConfig {
    std::uint32_t n_text = 1;
    std::uint32_t n_audio = 3;
    std::uint32_t text_pad = 0;
    std::uint32_t audio_pad = kDefaultAudioVocabSize - 1;
    std::uint32_t audio_vocab_size = kDefaultAudioVocabSize;

    std::size_t block_size() const { return std::size_t{n_text} + n_audio; }

    /// Throws InvalidConfig when a field breaks the layout invariants.
    void validate() const;

    friend bool operator==(const InterleaveConfig&, const InterleaveConfig&) = default;
};

/// A tagged token stream whose block structure has been checked.
class InterleavedSequence {
public:
    InterleavedSequence() = default;

    /// Validates `tokens` against `config`; throws MalformedSequence on the
    /// first offending position.
    InterleavedSequence(std::vector<Token> tokens, InterleaveConfig config);

    const std::vector<Token>& tokens() const { return tokens_; }
    const InterleaveConfig& config() const { return config_; }
    std::size_t size() const { return tokens_.size(); }
    bool empty() const { return tokens_.empty(); }
    std::size_t blocks() const { return tokens_.size() / config_.block_size(); }

    friend bool operator==(const InterleavedSequence&, const InterleavedSequence&) = default;

private:
    std::vector<Token> tokens_;
    InterleaveConfig config_;
};

struct Channels {
    std::vector<std::uint32_t> text;
    std::vector<std::uint32_t> audio;

    friend bool operator==(const Channels&, const Channels&) = default;
};

InterleavedSequence mux(std::span<const std::uint32_t> text, std::span<const std::uint32_t> audio,
                        const InterleaveConfig& cfg);

Channels demux(const InterleavedSequence& seq, bool strip_padding);

/// Checks the block pattern of a raw tagged stream and splits it.
Channels demux(std::span<const Token> tokens, const InterleaveConfig& cfg, bool strip_padding);

/// Closed form of the mux block rule.
std::size_t interleaved_length(std::size_t text_len, std::size_t audio_len,
                               const InterleaveConfig& cfg);

// Flat id view: text ids occupy [0, text_vocab_size), audio ids follow.
std::uint64_t to_flat_id(const Token& token, std::uint32_t text_vocab_size);
Token from_flat_id(std::uint64_t flat, std::uint32_t text_vocab_size, std::uint32_t audio_vocab_size);

// Byte-level text codec used by the runtime's text channel: one token per
// UTF-8 byte. Id 0 never occurs in text, which keeps it free for padding.
std::vector<std::uint32_t> encode_text(std::string_view text);
std::string decode_text(std::span<const std::uint32_t> tokens);

// "ILV1" token-stream files. Header fields and ids are little-endian u32;
// each token is a tag byte (0 text, 1 audio) followed by its id.
void write_ilv(std::ostream& out, const InterleavedSequence& seq);
InterleavedSequence read_ilv(std::istream& in,
                             std::uint32_t audio_vocab_size = kDefaultAudioVocabSize);

}  // namespace voxweave
