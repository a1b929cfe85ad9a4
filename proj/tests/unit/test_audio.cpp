#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "support.hpp"
#include "voxweave/audio.hpp"
#include "voxweave/error.hpp"
#include "voxweave/wav.hpp"

using namespace voxweave;
using testsupport::concat;
using testsupport::constant;
using testsupport::tone;

TEST_CASE("encoder and adaptor frame counts") {
    CHECK(encoder_frames(constant(0.f, 2.0)) == 50);
    CHECK(encoder_frames(constant(0.f, 0.04)) == 1);
    CHECK(encoder_frames(constant(0.f, 1.01)) == 26);
    CHECK(encoder_frames(constant(0.f, 1.0)) == 25);
    CHECK(adaptor_frames(25) == 13);
    CHECK(adaptor_frames(50) == 25);
    CHECK(adaptor_frames(encoder_frames(constant(0.f, 1.0))) == 13);
    CHECK(encoder_frames(constant(0.f, 1.0, 16000)) == 25);
    CHECK_THROWS_AS(encoder_frames(PcmClip{}), EmptyAudio);
}

TEST_CASE("frame count is the ceiling of duration times rate") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<std::size_t> n(1, 200000);
    for (int i = 0; i < 500; ++i) {
        PcmClip c;
        c.samples.resize(n(rng));
        const std::size_t frames = encoder_frames(c);
        // 960 samples per frame at 24 kHz and 25 Hz.
        REQUIRE(frames == (c.samples.size() + 959) / 960);
        REQUIRE(adaptor_frames(frames) == (frames + 1) / 2);
    }
}

TEST_CASE("vad on silence and constant signals") {
    CHECK(vad_segments(constant(0.f, 1.0)).empty());
    const auto spans = vad_segments(constant(0.5f, 1.0));
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].begin_sample == 0);
    CHECK(spans[0].end_sample == 24000);
    CHECK(spans[0].start_ms == doctest::Approx(0.0));
    CHECK(spans[0].end_ms == doctest::Approx(1000.0));
    CHECK_THROWS_AS(vad_segments(PcmClip{}), EmptyAudio);
}

TEST_CASE("vad finds a tone between silences") {
    const auto clip = concat({constant(0.f, 0.3), tone(0.5), constant(0.f, 0.3)});
    const auto spans = vad_segments(clip);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].start_ms == doctest::Approx(300.0).epsilon(0.07));
    CHECK(spans[0].end_ms == doctest::Approx(800.0).epsilon(0.03));
}

TEST_CASE("vad merges close spans and drops short ones") {
    VadConfig cfg;
    const auto close = concat({tone(0.3), constant(0.f, 0.1), tone(0.3)});
    CHECK(vad_segments(close, cfg).size() == 1);

    const auto far = concat({tone(0.3), constant(0.f, 0.5), tone(0.3)});
    CHECK(vad_segments(far, cfg).size() == 2);

    const auto blip = concat({constant(0.f, 0.5), tone(0.04), constant(0.f, 0.5)});
    CHECK(vad_segments(blip, cfg).empty());
}

TEST_CASE("vad spans are ordered, disjoint and inside the clip") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> len(0.02, 0.6);
    std::bernoulli_distribution on(0.5);
    for (int i = 0; i < 50; ++i) {
        PcmClip clip;
        for (int k = 0; k < 8; ++k) {
            const auto part = on(rng) ? tone(len(rng)) : constant(0.f, len(rng));
            clip.samples.insert(clip.samples.end(), part.samples.begin(), part.samples.end());
        }
        if (clip.empty()) continue;
        const auto spans = vad_segments(clip);
        for (std::size_t s = 0; s < spans.size(); ++s) {
            REQUIRE(spans[s].begin_sample < spans[s].end_sample);
            REQUIRE(spans[s].end_sample <= clip.samples.size());
            if (s > 0) REQUIRE(spans[s - 1].end_sample <= spans[s].begin_sample);
        }
    }
}

TEST_CASE("vad config validation") {
    VadConfig cfg;
    cfg.window_ms = 0;
    CHECK_THROWS_AS(vad_segments(constant(0.5f, 1.0), cfg), InvalidConfig);
}

TEST_CASE("power in dBFS") {
    const std::vector<float> full(100, 1.0f);
    CHECK(power_dbfs(full) == doctest::Approx(0.0));
    const std::vector<float> half(100, 0.5f);
    CHECK(power_dbfs(half) == doctest::Approx(20.0 * std::log10(0.5)));
    const std::vector<float> zero(100, 0.0f);
    CHECK(std::isinf(power_dbfs(zero)));
}

TEST_CASE("resampling") {
    const auto clip = tone(1.0);
    CHECK(resample(clip, 24000) == clip);
    const auto down = resample(tone(1.0, 0.5, 220, 48000), 24000);
    CHECK(down.sample_rate == 24000);
    CHECK(down.samples.size() == 24000);
    const auto flat = resample(constant(0.25f, 0.5, 16000), 24000);
    CHECK(flat.samples.size() == 12000);
    for (float s : flat.samples) REQUIRE(s == doctest::Approx(0.25f));
    CHECK_THROWS_AS(resample(clip, 0), InvalidConfig);
}

TEST_CASE("normalize clamps and rejects non-finite input") {
    PcmClip c;
    c.samples = {2.0f, -3.0f, 0.5f};
    c.normalize();
    CHECK(c.samples == std::vector<float>{1.0f, -1.0f, 0.5f});
    c.samples.push_back(NAN);
    CHECK_THROWS_AS(c.normalize(), InvalidConfig);
    c.samples = {0.1f};
    c.sample_rate = 0;
    CHECK_THROWS_AS(c.normalize(), InvalidConfig);
}

TEST_CASE("pcm16 conversion") {
    const std::vector<std::int16_t> pcm{0, 16384, -32768, 32767};
    const auto clip = PcmClip::from_pcm16(pcm, 24000);
    CHECK(clip.samples[1] == doctest::Approx(0.5f));
    CHECK(clip.samples[2] == doctest::Approx(-1.0f));
    CHECK(clip.to_pcm16() == pcm);
}

TEST_CASE("wav round trip") {
    testsupport::TempDir dir("wav");
    const auto clip = tone(0.25, 0.5, 440, 16000);

    write_wav(dir / "a.wav", clip);
    const auto back = read_wav(dir / "a.wav");
    CHECK(back.sample_rate == 16000);
    REQUIRE(back.samples.size() == clip.samples.size());
    for (std::size_t i = 0; i < clip.samples.size(); ++i) REQUIRE(std::abs(back.samples[i] - clip.samples[i]) < 1e-4f);

    write_wav(dir / "f.wav", clip, WavFormat::Float32);
    CHECK(read_wav(dir / "f.wav") == clip);

    CHECK_THROWS_AS(read_wav(dir / "missing.wav"), IoError);
    {
        std::ofstream junk(dir / "junk.wav", std::ios::binary);
        junk << "not a wave file at all";
    }
    CHECK_THROWS_AS(read_wav(dir / "junk.wav"), IoError);
}
