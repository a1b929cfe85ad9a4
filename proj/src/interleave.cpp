#include "voxweave/interleave.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <ostream>

#include "voxweave/error.hpp"

namespace voxweave {

namespace {

std::size_t ceil_div(std::size_t num, std::size_t den) { return (num + den - 1) / den; }

void put_u32(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> bytes{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                    static_cast<char>((v >> 16) & 0xff),
                                    static_cast<char>((v >> 24) & 0xff)};
    out.write(bytes.data(), bytes.size());
}

bool get_u32(std::istream& in, std::uint32_t& v) {
    std::array<unsigned char, 4> b{};
    if (!in.read(reinterpret_cast<char*>(b.data()), b.size())) return false;
    v = std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
        (std::uint32_t{b[3]} << 24);
    return true;
}

void strip_trailing(std::vector<std::uint32_t>& ids, std::uint32_t pad) {
    while (!ids.empty() && ids.back() == pad) ids.pop_back();
}

}  // namespace

void InterleaveConfig::validate() const {
    if (n_text < 1 || n_audio < 1) throw InvalidConfig("interleave ratio parts must be >= 1");
    if (audio_vocab_size == 0) throw InvalidConfig("audio vocabulary must be non-empty");
    if (audio_pad >= audio_vocab_size)
        throw InvalidConfig("audio pad id " + std::to_string(audio_pad) +
                            " is outside the audio vocabulary");
}

InterleavedSequence::InterleavedSequence(std::vector<Token> tokens, InterleaveConfig config)
    : tokens_(std::move(tokens)), config_(config) {
    config_.validate();
    const std::size_t block = config_.block_size();
    if (tokens_.size() % block != 0)
        throw MalformedSequence(tokens_.size(), "length " + std::to_string(tokens_.size()) +
                                                    " is not a multiple of block size " +
                                                    std::to_string(block));

    // Once a pad shows up in a channel, every later slot of that channel is a pad.
    bool text_padding = false;
    bool audio_padding = false;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        const Token& t = tokens_[i];
        const Channel expected = (i % block) < config_.n_text ? Channel::Text : Channel::Audio;
        if (t.channel != expected)
            throw MalformedSequence(i, expected == Channel::Text ? "expected a text token"
                                                                 : "expected an audio token");
        if (t.channel == Channel::Audio && t.id >= config_.audio_vocab_size)
            throw MalformedSequence(i, "audio token out of vocabulary");
        bool& padding = t.channel == Channel::Text ? text_padding : audio_padding;
        const std::uint32_t pad = t.channel == Channel::Text ? config_.text_pad : config_.audio_pad;
        if (t.id == pad) {
            padding = true;
        } else if (padding) {
            throw MalformedSequence(i, "content token after padding");
        }
    }
}

std::size_t interleaved_length(std::size_t text_len, std::size_t audio_len,
                               const InterleaveConfig& cfg) {
    const std::size_t blocks = std::max(ceil_div(text_len, cfg.n_text), ceil_div(audio_len, cfg.n_audio));
    return blocks * cfg.block_size();
}

InterleavedSequence mux(std::span<const std::uint32_t> text, std::span<const std::uint32_t> audio,
                        const InterleaveConfig& cfg) {
    cfg.validate();
    for (std::size_t i = 0; i < audio.size(); ++i)
        if (audio[i] >= cfg.audio_vocab_size) throw InvalidToken(i, audio[i]);

    const std::size_t blocks =
        std::max(ceil_div(text.size(), cfg.n_text), ceil_div(audio.size(), cfg.n_audio));
    std::vector<Token> out;
    out.reserve(blocks * cfg.block_size());
    std::size_t ti = 0;
    std::size_t ai = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        for (std::uint32_t k = 0; k < cfg.n_text; ++k, ++ti)
            out.push_back(text_token(ti < text.size() ? text[ti] : cfg.text_pad));
        for (std::uint32_t k = 0; k < cfg.n_audio; ++k, ++ai)
            out.push_back(audio_token(ai < audio.size() ? audio[ai] : cfg.audio_pad));
    }
    return InterleavedSequence(std::move(out), cfg);
}

Channels demux(std::span<const Token> tokens, const InterleaveConfig& cfg, bool strip_padding) {
    const InterleavedSequence seq(std::vector<Token>(tokens.begin(), tokens.end()), cfg);
    return demux(seq, strip_padding);
}

Channels demux(const InterleavedSequence& seq, bool strip_padding) {
    const InterleaveConfig& cfg = seq.config();
    Channels ch;
    ch.text.reserve(seq.blocks() * cfg.n_text);
    ch.audio.reserve(seq.blocks() * cfg.n_audio);
    for (const Token& t : seq.tokens()) (t.channel == Channel::Text ? ch.text : ch.audio).push_back(t.id);
    if (strip_padding) {
        strip_trailing(ch.text, cfg.text_pad);
        strip_trailing(ch.audio, cfg.audio_pad);
    }
    return ch;
}

std::uint64_t to_flat_id(const Token& token, std::uint32_t text_vocab_size) {
    if (token.channel == Channel::Text) return token.id;
    return std::uint64_t{text_vocab_size} + token.id;
}

Token from_flat_id(std::uint64_t flat, std::uint32_t text_vocab_size, std::uint32_t audio_vocab_size) {
    if (flat < text_vocab_size) return text_token(static_cast<std::uint32_t>(flat));
    const std::uint64_t audio = flat - text_vocab_size;
    if (audio >= audio_vocab_size)
        throw InvalidToken(0, static_cast<std::uint32_t>(std::min<std::uint64_t>(audio, UINT32_MAX)));
    return audio_token(static_cast<std::uint32_t>(audio));
}

std::vector<std::uint32_t> encode_text(std::string_view text) {
    std::vector<std::uint32_t> ids;
    ids.reserve(text.size());
    for (unsigned char c : text) ids.push_back(c);
    return ids;
}

std::string decode_text(std::span<const std::uint32_t> tokens) {
    std::string s;
    s.reserve(tokens.size());
    for (std::uint32_t id : tokens)
        if (id != 0 && id < 256) s.push_back(static_cast<char>(id));
    return s;
}

void write_ilv(std::ostream& out, const InterleavedSequence& seq) {
    const InterleaveConfig& cfg = seq.config();
    out.write("ILV1", 4);
    put_u32(out, cfg.n_text);
    put_u32(out, cfg.n_audio);
    put_u32(out, cfg.text_pad);
    put_u32(out, cfg.audio_pad);
    for (const Token& t : seq.tokens()) {
        out.put(static_cast<char>(t.channel));
        put_u32(out, t.id);
    }
    if (!out) throw IoError("failed writing token stream");
}

InterleavedSequence read_ilv(std::istream& in, std::uint32_t audio_vocab_size) {
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), magic.size()) || std::string_view(magic.data(), 4) != "ILV1")
        throw IoError("not an ILV1 token stream");
    InterleaveConfig cfg;
    cfg.audio_vocab_size = audio_vocab_size;
    if (!get_u32(in, cfg.n_text) || !get_u32(in, cfg.n_audio) || !get_u32(in, cfg.text_pad) ||
        !get_u32(in, cfg.audio_pad))
        throw IoError("truncated ILV1 header");
    cfg.validate();

    std::vector<Token> tokens;
    for (;;) {
        const int tag = in.get();
        if (tag == std::char_traits<char>::eof()) break;
        if (tag != 0 && tag != 1)
            throw MalformedSequence(tokens.size(), "invalid channel tag " + std::to_string(tag));
        std::uint32_t id = 0;
        if (!get_u32(in, id)) throw IoError("truncated token record");
        tokens.push_back({static_cast<Channel>(tag), id});
    }
    return InterleavedSequence(std::move(tokens), cfg);
}

}  // namespace voxweave
