#include "voxweave/wav.hpp"

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "voxweave/error.hpp"

namespace voxweave {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t le32(const unsigned char* p) {
    return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
           (std::uint32_t{p[3]} << 24);
}
std::uint16_t le16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void append32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void append16(std::string& s, std::uint16_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>(v >> 8));
}

}  // namespace

PcmClip read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                          std::istreambuf_iterator<char>());
    if (data.size() < 12 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
        std::memcmp(data.data() + 8, "WAVE", 4) != 0)
        throw IoError(path.string() + " is not a RIFF/WAVE file");

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    const unsigned char* payload = nullptr;
    std::size_t payload_size = 0;
    std::size_t pos = 12;
    while (pos + 8 <= data.size()) {
        const unsigned char* chunk = data.data() + pos;
        const std::uint32_t size = le32(chunk + 4);
        const std::size_t body = pos + 8;
        if (body + size > data.size()) throw IoError(path.string() + ": truncated chunk");
        if (std::memcmp(chunk, "fmt ", 4) == 0 && size >= 16) {
            format = le16(chunk + 8);
            channels = le16(chunk + 10);
            rate = le32(chunk + 12);
            bits = le16(chunk + 22);
            if (format == kFormatExtensible && size >= 26) format = le16(chunk + 8 + 24);
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            payload = chunk + 8;
            payload_size = size;
        }
        pos = body + size + (size & 1);
    }
    if (payload == nullptr || rate == 0) throw IoError(path.string() + ": missing fmt or data chunk");
    if (channels != 1) throw IoError(path.string() + ": only mono WAV is supported");

    PcmClip clip;
    clip.sample_rate = rate;
    if (format == kFormatPcm && bits == 16) {
        clip.samples.reserve(payload_size / 2);
        for (std::size_t i = 0; i + 1 < payload_size; i += 2)
            clip.samples.push_back(static_cast<float>(static_cast<std::int16_t>(le16(payload + i))) /
                                   32768.0f);
    } else if (format == kFormatFloat && bits == 32) {
        clip.samples.reserve(payload_size / 4);
        for (std::size_t i = 0; i + 3 < payload_size; i += 4) {
            const std::uint32_t raw = le32(payload + i);
            float f;
            std::memcpy(&f, &raw, sizeof f);
            clip.samples.push_back(f);
        }
    } else {
        throw IoError(path.string() + ": unsupported sample format");
    }
    clip.normalize();
    return clip;
}

void write_wav(const std::filesystem::path& path, const PcmClip& clip, WavFormat format) {
    const bool is_float = format == WavFormat::Float32;
    const std::uint16_t bits = is_float ? 32 : 16;
    const std::uint32_t data_size = static_cast<std::uint32_t>(clip.samples.size() * (bits / 8));

    std::string out;
    out.reserve(44 + data_size);
    out += "RIFF";
    append32(out, 36 + data_size);
    out += "WAVEfmt ";
    append32(out, 16);
    append16(out, is_float ? kFormatFloat : kFormatPcm);
    append16(out, 1);
    append32(out, clip.sample_rate);
    append32(out, clip.sample_rate * (bits / 8));
    append16(out, bits / 8);
    append16(out, bits);
    out += "data";
    append32(out, data_size);
    if (is_float) {
        for (float f : clip.samples) {
            std::uint32_t raw;
            std::memcpy(&raw, &f, sizeof raw);
            append32(out, raw);
        }
    } else {
        for (std::int16_t s : clip.to_pcm16()) append16(out, static_cast<std::uint16_t>(s));
    }

    std::ofstream file(path, std::ios::binary);
    if (!file.write(out.data(), static_cast<std::streamsize>(out.size())))
        throw IoError("cannot write " + path.string());
}

}  // namespace voxweave
