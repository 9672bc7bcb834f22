// Minimal PCM WAV reader/writer for the 3-channel capture format.
// Supported encodings: 16- and 32-bit signed integer and 32-bit IEEE float,
// plus the WAVE_FORMAT_EXTENSIBLE wrappers around them. Integer samples are
// normalized by their full scale, so -32768 maps to exactly -1.0.
#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace tridoa {

struct IoError : std::runtime_error {
    enum class Kind { kFile, kFormat, kSchema };
    Kind kind;
    IoError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

struct WavData {
    double sample_rate = 0.0;
    std::vector<std::vector<float>> channels;
};

/// Reads any channel count; throws IoError with kind kFile (unreadable),
/// kFormat (unsupported encoding or truncated payload).
WavData read_wav(const std::string& path);

/// Reads a file that must contain exactly three channels.
struct TriAudio {
    double sample_rate = 0.0;
    std::array<std::vector<float>, 3> ch;
};

TriAudio read_audio3(const std::string& path);

enum class WavEncoding { kPcm16, kFloat32 };

void write_wav(const std::string& path, const std::vector<std::vector<float>>& channels,
               double sample_rate, WavEncoding encoding = WavEncoding::kFloat32);

}  // namespace tridoa
