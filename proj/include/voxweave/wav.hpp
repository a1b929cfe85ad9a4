#pragma once

#include <filesystem>

#include "voxweave/audio.hpp"

namespace voxweave {

enum class WavFormat { Pcm16, Float32 };

// Mono RIFF/WAVE only. Multi-channel input is rejected rather than downmixed.
PcmClip read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const PcmClip& clip,
               WavFormat format = WavFormat::Pcm16);

}  // namespace voxweave
