#include <doctest.h>

#include <random>

#include "voxweave/error.hpp"
#include "voxweave/wire.hpp"

using namespace voxweave;

TEST_CASE("frame layout") {
    const Frame f = make_frame(FrameType::TextPartial, 0x0102, 3, "h");
    const auto bytes = encode_frame(f);
    REQUIRE(bytes.size() == kFrameHeaderSize + kBodyPrefixSize + 1);
    CHECK(bytes[0] == 17);  // body length, little-endian
    CHECK(bytes[1] == 0);
    CHECK(bytes[4] == 2);  // TextPartial
    CHECK(bytes[5] == 0x02);
    CHECK(bytes[6] == 0x01);
    CHECK(bytes[13] == 3);
    CHECK(bytes[21] == 'h');
}

TEST_CASE("decoder reassembles frames from arbitrary chunks") {
    std::vector<Frame> frames;
    std::vector<std::uint8_t> stream;
    for (std::uint64_t i = 0; i < 20; ++i) {
        frames.push_back(make_frame(static_cast<FrameType>(i % 8), 7, i, std::string(i * 4, 'x')));
        const auto b = encode_frame(frames.back());
        stream.insert(stream.end(), b.begin(), b.end());
    }
    std::mt19937 rng(2);
    std::uniform_int_distribution<std::size_t> chunk(1, 40);
    FrameDecoder dec;
    std::vector<Frame> out;
    for (std::size_t pos = 0; pos < stream.size();) {
        const std::size_t n = std::min(chunk(rng), stream.size() - pos);
        dec.feed(std::span(stream).subspan(pos, n));
        pos += n;
        while (auto f = dec.next()) out.push_back(*f);
    }
    CHECK(out == frames);
    CHECK(dec.buffered() == 0);
}

TEST_CASE("decoder rejects malformed frames") {
    {
        FrameDecoder dec;
        const std::vector<std::uint8_t> bad{16, 0, 0, 0, 42};
        dec.feed(bad);
        CHECK_THROWS_AS(dec.next(), WireError);
    }
    {
        FrameDecoder dec;
        const std::vector<std::uint8_t> short_body{3, 0, 0, 0, 1, 0, 0, 0};
        dec.feed(short_body);
        CHECK_THROWS_AS(dec.next(), WireError);
    }
    {
        FrameDecoder dec;
        const std::uint32_t huge = kMaxPayload + kBodyPrefixSize + 1;
        const std::vector<std::uint8_t> big{static_cast<std::uint8_t>(huge), static_cast<std::uint8_t>(huge >> 8),
                                            static_cast<std::uint8_t>(huge >> 16), static_cast<std::uint8_t>(huge >> 24), 2};
        dec.feed(big);
        CHECK_THROWS_AS(dec.next(), WireError);
    }
    {
        FrameDecoder dec;
        const std::vector<std::uint8_t> partial{20, 0, 0};
        dec.feed(partial);
        CHECK_FALSE(dec.next().has_value());
    }
}

TEST_CASE("encoder enforces AudioIn limits") {
    Frame odd = make_frame(FrameType::AudioIn, 1, 0, "abc");
    CHECK_THROWS_AS(encode_frame(odd), WireError);
    Frame big;
    big.type = FrameType::AudioIn;
    big.payload.assign(kMaxAudioInPayload + 2, 0);
    CHECK_THROWS_AS(encode_frame(big), WireError);
    big.payload.resize(kMaxAudioInPayload);
    CHECK_NOTHROW(encode_frame(big));
}

TEST_CASE("payload helpers") {
    Frame h;
    h.type = FrameType::Hello;
    h.payload = hello_payload("conv-1");
    const auto info = parse_hello(h);
    CHECK(info.version == kWireVersion);
    CHECK(info.conversation == "conv-1");
    h.payload.clear();
    CHECK_THROWS_AS(parse_hello(h), WireError);

    const std::vector<std::int16_t> pcm{0, -1, 32767, -32768};
    CHECK(parse_pcm16(pcm16_payload(pcm)) == pcm);
    const std::vector<std::uint8_t> odd{1, 2, 3};
    CHECK_THROWS_AS(parse_pcm16(odd), WireError);

    Frame a;
    a.type = FrameType::AudioOut;
    a.payload = audio_out_payload(6598, pcm);
    const auto ao = parse_audio_out(a);
    CHECK(ao.token == 6598);
    CHECK(ao.samples == pcm);
    CHECK(to_string(FrameType::TurnEnd) == "TurnEnd");
}
