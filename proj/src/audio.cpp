#include "voxweave/audio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "voxweave/error.hpp"

namespace voxweave {

PcmClip PcmClip::from_pcm16(std::span<const std::int16_t> pcm, std::uint32_t sample_rate) {
    PcmClip clip;
    clip.sample_rate = sample_rate;
    clip.samples.reserve(pcm.size());
    for (std::int16_t s : pcm) clip.samples.push_back(static_cast<float>(s) / 32768.0f);
    return clip;
}

std::vector<std::int16_t> PcmClip::to_pcm16() const {
    std::vector<std::int16_t> out;
    out.reserve(samples.size());
    for (float s : samples) {
        const float scaled = std::round(std::clamp(s, -1.0f, 1.0f) * 32768.0f);
        out.push_back(static_cast<std::int16_t>(std::clamp(scaled, -32768.0f, 32767.0f)));
    }
    return out;
}

void PcmClip::normalize() {
    if (sample_rate == 0) throw InvalidConfig("sample rate must be positive");
    for (float& s : samples) {
        if (!std::isfinite(s)) throw InvalidConfig("non-finite sample in clip");
        s = std::clamp(s, -1.0f, 1.0f);
    }
}

void FrameClock::validate() const {
    if (!(encoder_rate > 0.0)) throw InvalidConfig("encoder rate must be positive");
    if (adaptor_downsample < 1) throw InvalidConfig("adaptor downsample must be >= 1");
}

void VadConfig::validate() const {
    if (!(window_ms > 0.0)) throw InvalidConfig("VAD window must be positive");
    if (hangover_ms < 0.0) throw InvalidConfig("VAD hangover must be >= 0");
    if (min_segment_ms < 0.0) throw InvalidConfig("VAD min segment must be >= 0");
}

std::size_t encoder_frames(const PcmClip& clip, const FrameClock& clock) {
    clock.validate();
    if (clip.empty()) throw EmptyAudio();
    const double exact = static_cast<double>(clip.samples.size()) * clock.encoder_rate /
                         static_cast<double>(clip.sample_rate);
    // Snap values that are integral up to rounding noise so 2.000 s at 25 Hz is 50, not 51.
    const double nearest = std::round(exact);
    if (std::abs(exact - nearest) < 1e-9 * std::max(1.0, nearest))
        return static_cast<std::size_t>(nearest);
    return static_cast<std::size_t>(std::ceil(exact));
}

std::size_t adaptor_frames(std::size_t encoder_frame_count, const FrameClock& clock) {
    clock.validate();
    return (encoder_frame_count + clock.adaptor_downsample - 1) / clock.adaptor_downsample;
}

double power_dbfs(std::span<const float> samples) {
    if (samples.empty()) return -std::numeric_limits<double>::infinity();
    double acc = 0.0;
    for (float s : samples) acc += static_cast<double>(s) * s;
    const double mean = acc / static_cast<double>(samples.size());
    if (mean <= 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(mean);
}

std::vector<SpeechSpan> vad_segments(const PcmClip& clip, const VadConfig& cfg) {
    cfg.validate();
    if (clip.empty()) throw EmptyAudio();
    if (clip.sample_rate == 0) throw InvalidConfig("sample rate must be positive");

    const double rate = clip.sample_rate;
    const std::size_t n = clip.samples.size();
    const auto window =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.window_ms * rate / 1000.0)));
    const auto hangover = static_cast<std::size_t>(std::llround(cfg.hangover_ms * rate / 1000.0));
    const auto min_len = static_cast<std::size_t>(std::llround(cfg.min_segment_ms * rate / 1000.0));
    const double threshold_power = std::pow(10.0, cfg.energy_threshold_dbfs / 10.0);

    // Sum of squares per span, kept so merges can re-check the mean power.
    struct Run {
        std::size_t begin;
        std::size_t end;
        double energy;
    };
    std::vector<Run> runs;
    const std::span<const float> all(clip.samples);
    for (std::size_t begin = 0; begin < n; begin += window) {
        const std::size_t end = std::min(n, begin + window);
        double energy = 0.0;
        for (float s : all.subspan(begin, end - begin)) energy += static_cast<double>(s) * s;
        if (energy / static_cast<double>(end - begin) <= threshold_power) continue;
        if (!runs.empty() && runs.back().end == begin) {
            runs.back().end = end;
            runs.back().energy += energy;
        } else {
            runs.push_back({begin, end, energy});
        }
    }

    std::vector<Run> merged;
    for (const Run& r : runs) {
        if (!merged.empty()) {
            Run& last = merged.back();
            const std::size_t gap = r.begin - last.end;
            const double energy = last.energy + r.energy;
            const double mean = energy / static_cast<double>(r.end - last.begin);
            if (gap < hangover && mean > threshold_power) {
                last.end = r.end;
                last.energy = energy;
                continue;
            }
        }
        merged.push_back(r);
    }

    std::vector<SpeechSpan> spans;
    for (const Run& r : merged) {
        if (r.end - r.begin < min_len) continue;
        spans.push_back({r.begin, r.end, 1000.0 * static_cast<double>(r.begin) / rate,
                         1000.0 * static_cast<double>(r.end) / rate});
    }
    return spans;
}

PcmClip resample(const PcmClip& clip, std::uint32_t target_rate) {
    if (target_rate == 0) throw InvalidConfig("target rate must be positive");
    if (clip.sample_rate == 0) throw InvalidConfig("sample rate must be positive");
    if (clip.sample_rate == target_rate || clip.empty()) {
        PcmClip out = clip;
        out.sample_rate = target_rate;
        return out;
    }
    const std::size_t n = clip.samples.size();
    const auto out_len = static_cast<std::size_t>(std::llround(
        static_cast<double>(n) * target_rate / static_cast<double>(clip.sample_rate)));
    const double step = static_cast<double>(clip.sample_rate) / target_rate;

    PcmClip out;
    out.sample_rate = target_rate;
    out.samples.resize(out_len);
    for (std::size_t i = 0; i < out_len; ++i) {
        const double pos = static_cast<double>(i) * step;
        const auto left = std::min(static_cast<std::size_t>(pos), n - 1);
        const std::size_t right = std::min(left + 1, n - 1);
        const double frac = std::clamp(pos - static_cast<double>(left), 0.0, 1.0);
        const float a = clip.samples[left];
        const float b = clip.samples[right];
        out.samples[i] = a + static_cast<float>(frac) * (b - a);
    }
    return out;
}

}  // namespace voxweave
