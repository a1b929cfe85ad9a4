#include <doctest.h>

#include <random>
#include <sstream>

#include "voxweave/error.hpp"
#include "voxweave/interleave.hpp"

using namespace voxweave;

namespace {

// Reference interleaver: fills block after block slot by slot.
std::vector<Token> naive_mux(const std::vector<std::uint32_t>& text, const std::vector<std::uint32_t>& audio,
                             const InterleaveConfig& cfg) {
    std::vector<Token> out;
    std::size_t ti = 0, ai = 0;
    while (ti < text.size() || ai < audio.size()) {
        for (std::uint32_t k = 0; k < cfg.n_text; ++k)
            out.push_back(text_token(ti < text.size() ? text[ti++] : cfg.text_pad));
        for (std::uint32_t k = 0; k < cfg.n_audio; ++k)
            out.push_back(audio_token(ai < audio.size() ? audio[ai++] : cfg.audio_pad));
    }
    return out;
}

InterleaveConfig ratio(std::uint32_t t, std::uint32_t a) {
    InterleaveConfig c;
    c.n_text = t;
    c.n_audio = a;
    return c;
}

std::vector<std::uint32_t> random_ids(std::mt19937& rng, std::size_t n, std::uint32_t lo, std::uint32_t hi) {
    std::uniform_int_distribution<std::uint32_t> d(lo, hi);
    std::vector<std::uint32_t> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

constexpr std::uint32_t PT = 0;
constexpr std::uint32_t PA = 6599;

}  // namespace

TEST_CASE("default config is 1:3 with a 6600-token audio vocabulary") {
    const InterleaveConfig c;
    CHECK(c.n_text == 1);
    CHECK(c.n_audio == 3);
    CHECK(c.audio_vocab_size == 6600);
    CHECK(c.audio_pad == 6599);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(ratio(0, 1).validate(), InvalidConfig);
    CHECK_THROWS_AS(ratio(1, 0).validate(), InvalidConfig);
    InterleaveConfig c;
    c.audio_pad = c.audio_vocab_size;
    CHECK_THROWS_AS(c.validate(), InvalidConfig);
}

TEST_CASE("mux examples") {
    const auto cfg = ratio(1, 2);
    CHECK(mux({}, {}, cfg).empty());

    const std::vector<std::uint32_t> t{11, 12};
    const std::vector<std::uint32_t> a{1, 2, 3, 4, 5};
    const auto seq = mux(t, a, cfg);
    const std::vector<Token> want{text_token(11), audio_token(1), audio_token(2), text_token(12), audio_token(3),
                                  audio_token(4), text_token(PT),  audio_token(5), audio_token(PA)};
    CHECK(seq.tokens() == want);
    CHECK(seq.tokens() == naive_mux(t, a, cfg));

    const std::vector<std::uint32_t> t3{11, 12, 13};
    const auto seq3 = mux(t3, {}, cfg);
    const std::vector<Token> want3{text_token(11), audio_token(PA), audio_token(PA), text_token(12), audio_token(PA),
                                   audio_token(PA), text_token(13), audio_token(PA), audio_token(PA)};
    CHECK(seq3.tokens() == want3);
}

TEST_CASE("mux rejects out-of-vocabulary audio and names the index") {
    const std::vector<std::uint32_t> a{1, 6600, 2};
    try {
        mux({}, a, InterleaveConfig{});
        FAIL("expected InvalidToken");
    } catch (const InvalidToken& e) {
        CHECK(e.index() == 1);
    }
}

TEST_CASE("demux examples") {
    const auto cfg = ratio(1, 2);
    const std::vector<Token> tokens{text_token(11), audio_token(1), audio_token(2),
                                    text_token(PT), audio_token(3), audio_token(PA)};
    const Channels ch = demux(tokens, cfg, true);
    CHECK(ch.text == std::vector<std::uint32_t>{11});
    CHECK(ch.audio == std::vector<std::uint32_t>{1, 2, 3});

    const std::vector<Token> bad{text_token(11), audio_token(1), audio_token(2), text_token(12)};
    try {
        demux(bad, ratio(1, 1), true);
        FAIL("expected MalformedSequence");
    } catch (const MalformedSequence& e) {
        CHECK(e.position() == 2);
    }

    const std::vector<Token> short_seq{text_token(11), audio_token(1)};
    CHECK_THROWS_AS(demux(short_seq, cfg, false), MalformedSequence);
}

TEST_CASE("pads must form a suffix of their channel") {
    const auto cfg = ratio(1, 1);
    const std::vector<Token> tokens{text_token(PT), audio_token(1), text_token(12), audio_token(2)};
    CHECK_THROWS_AS(InterleavedSequence(tokens, cfg), MalformedSequence);
}

TEST_CASE("interleaved_length examples") {
    const auto cfg = ratio(1, 2);
    CHECK(interleaved_length(0, 0, cfg) == 0);
    CHECK(interleaved_length(2, 5, cfg) == 9);
    CHECK(interleaved_length(3, 0, cfg) == 9);
}

TEST_CASE("round trip, padding minimality and length law on random inputs") {
    std::mt19937 rng(1234);
    std::uniform_int_distribution<std::size_t> len(0, 200);
    std::uniform_int_distribution<std::uint32_t> r(1, 8);
    for (int iter = 0; iter < 2000; ++iter) {
        const auto cfg = ratio(r(rng), r(rng));
        const auto text = random_ids(rng, len(rng), 1, 255);
        const auto audio = random_ids(rng, len(rng), 0, 6598);
        const auto seq = mux(text, audio, cfg);

        const std::size_t blocks = std::max((text.size() + cfg.n_text - 1) / cfg.n_text,
                                            (audio.size() + cfg.n_audio - 1) / cfg.n_audio);
        REQUIRE(seq.size() == blocks * cfg.block_size());
        REQUIRE(seq.size() == interleaved_length(text.size(), audio.size(), cfg));
        REQUIRE(seq.tokens() == naive_mux(text, audio, cfg));

        const Channels raw = demux(seq, false);
        REQUIRE(raw.text.size() == blocks * cfg.n_text);
        REQUIRE(raw.audio.size() == blocks * cfg.n_audio);
        REQUIRE(std::count(raw.text.begin(), raw.text.end(), cfg.text_pad) ==
                static_cast<std::ptrdiff_t>(blocks * cfg.n_text - text.size()));
        REQUIRE(std::count(raw.audio.begin(), raw.audio.end(), cfg.audio_pad) ==
                static_cast<std::ptrdiff_t>(blocks * cfg.n_audio - audio.size()));

        const Channels ch = demux(seq, true);
        REQUIRE(ch.text == text);
        REQUIRE(ch.audio == audio);
    }
}

TEST_CASE("flat id view") {
    CHECK(to_flat_id(text_token(5), 256) == 5);
    CHECK(to_flat_id(audio_token(5), 256) == 261);
    CHECK(from_flat_id(261, 256, 6600) == audio_token(5));
    CHECK(from_flat_id(5, 256, 6600) == text_token(5));
    CHECK_THROWS_AS(from_flat_id(256 + 6600, 256, 6600), InvalidToken);
}

TEST_CASE("byte text codec") {
    const std::string s = "héllo 你好";
    const auto ids = encode_text(s);
    CHECK(ids.size() == s.size());
    CHECK(decode_text(ids) == s);
    const std::vector<std::uint32_t> with_pad{104, 0, 105};
    CHECK(decode_text(with_pad) == "hi");
}

TEST_CASE("ILV1 file round trip and header layout") {
    const std::vector<std::uint32_t> t{11, 12};
    const std::vector<std::uint32_t> a{1, 2, 3, 4, 5};
    const auto seq = mux(t, a, ratio(1, 2));
    std::stringstream ss;
    write_ilv(ss, seq);
    const std::string bytes = ss.str();
    REQUIRE(bytes.size() == 4 + 16 + 9 * 5);
    CHECK(bytes.substr(0, 4) == "ILV1");
    CHECK(static_cast<unsigned char>(bytes[4]) == 1);  // n_text LE
    CHECK(static_cast<unsigned char>(bytes[8]) == 2);  // n_audio LE
    CHECK(static_cast<unsigned char>(bytes[20]) == 0);  // first tag: text
    CHECK(static_cast<unsigned char>(bytes[21]) == 11);
    CHECK(static_cast<unsigned char>(bytes[25]) == 1);  // second tag: audio

    ss.seekg(0);
    CHECK(read_ilv(ss) == seq);

    std::stringstream bad("ILV0xxxxxxxxxxxxxxxx");
    CHECK_THROWS_AS(read_ilv(bad), IoError);
    std::stringstream truncated(bytes.substr(0, bytes.size() - 2));
    CHECK_THROWS(read_ilv(truncated));
}
