#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace voxweave {

inline constexpr std::uint32_t kDefaultSampleRate = 24000;

/// Mono PCM with amplitudes in [-1, 1].
struct PcmClip {
    std::vector<float> samples;
    std::uint32_t sample_rate = kDefaultSampleRate;

    bool empty() const { return samples.empty(); }
    double duration_seconds() const {
        return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
    }

    /// 16-bit input is scaled by 1/32768.
    static PcmClip from_pcm16(std::span<const std::int16_t> pcm, std::uint32_t sample_rate);
    std::vector<std::int16_t> to_pcm16() const;

    /// Throws InvalidConfig on a zero rate or non-finite samples; clamps the rest into [-1, 1].
    void normalize();

    friend bool operator==(const PcmClip&, const PcmClip&) = default;
};

/// Encoder output rate and adaptor downsampling; the adaptor runs at
/// encoder_rate / adaptor_downsample.
struct FrameClock {
    double encoder_rate = 25.0;
    std::uint32_t adaptor_downsample = 2;

    double adaptor_rate() const { return encoder_rate / adaptor_downsample; }
    void validate() const;
};

struct VadConfig {
    double window_ms = 20.0;
    double energy_threshold_dbfs = -40.0;
    double hangover_ms = 200.0;
    double min_segment_ms = 100.0;

    void validate() const;
};

/// Half-open span [begin_sample, end_sample) of detected speech.
struct SpeechSpan {
    std::size_t begin_sample = 0;
    std::size_t end_sample = 0;
    double start_ms = 0.0;
    double end_ms = 0.0;

    friend bool operator==(const SpeechSpan&, const SpeechSpan&) = default;
};

// Frame counts round partial windows up at both stages.
std::size_t encoder_frames(const PcmClip& clip, const FrameClock& clock = {});
std::size_t adaptor_frames(std::size_t encoder_frame_count, const FrameClock& clock = {});

/// Energy-gated voice activity detection over fixed windows.
///
/// A window is active when its mean power exceeds the threshold. Runs of
/// active windows become spans; neighbouring spans separated by less than the
/// hangover are merged as long as the merged span keeps a mean power above
/// the threshold; spans shorter than min_segment are dropped.
std::vector<SpeechSpan> vad_segments(const PcmClip& clip, const VadConfig& cfg = {});

/// Mean power of samples in dBFS (-inf for silence).
double power_dbfs(std::span<const float> samples);

/// Linear-interpolation resampler. Output length is round(n * target / source).
PcmClip resample(const PcmClip& clip, std::uint32_t target_rate);

}  // namespace voxweave
