#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include "voxweave/audio.hpp"

namespace testsupport {

inline voxweave::PcmClip constant(float value, double seconds, std::uint32_t rate = 24000) {
    voxweave::PcmClip c;
    c.sample_rate = rate;
    c.samples.assign(static_cast<std::size_t>(std::llround(seconds * rate)), value);
    return c;
}

inline voxweave::PcmClip tone(double seconds, double amplitude = 0.5, double freq = 220.0, std::uint32_t rate = 24000) {
    voxweave::PcmClip c;
    c.sample_rate = rate;
    const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
    for (std::size_t i = 0; i < n; ++i)
        c.samples.push_back(static_cast<float>(amplitude * std::sin(2.0 * std::numbers::pi * freq * i / rate)));
    return c;
}

inline voxweave::PcmClip concat(std::initializer_list<voxweave::PcmClip> parts) {
    voxweave::PcmClip out;
    out.sample_rate = parts.begin()->sample_rate;
    for (const auto& p : parts) out.samples.insert(out.samples.end(), p.samples.begin(), p.samples.end());
    return out;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("voxweave-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace testsupport
