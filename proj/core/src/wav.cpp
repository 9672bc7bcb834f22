#include "tridoa/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace tridoa {

namespace {

constexpr uint16_t kFormatPcm = 0x0001;
constexpr uint16_t kFormatFloat = 0x0003;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint32_t rd_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}
uint16_t rd_u16(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void wr_u32(std::string& s, uint32_t v) {
    s.push_back(static_cast<char>(v & 0xFF));
    s.push_back(static_cast<char>((v >> 8) & 0xFF));
    s.push_back(static_cast<char>((v >> 16) & 0xFF));
    s.push_back(static_cast<char>((v >> 24) & 0xFF));
}
void wr_u16(std::string& s, uint16_t v) {
    s.push_back(static_cast<char>(v & 0xFF));
    s.push_back(static_cast<char>((v >> 8) & 0xFF));
}

}  // namespace

WavData read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(IoError::Kind::kFile, "cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());

    if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw IoError(IoError::Kind::kFormat, path + ": not a RIFF/WAVE file");

    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t sample_rate = 0;
    size_t data_off = 0, data_len = 0;
    bool have_fmt = false;

    size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        uint32_t chunk_len = rd_u32(bytes.data() + pos + 4);
        const uint8_t* chunk = bytes.data() + pos + 8;
        if (pos + 8 + chunk_len > bytes.size()) {
            if (std::memcmp(bytes.data() + pos, "data", 4) == 0)
                throw IoError(IoError::Kind::kFormat, path + ": truncated data chunk");
            throw IoError(IoError::Kind::kFormat, path + ": truncated chunk");
        }
        if (std::memcmp(bytes.data() + pos, "fmt ", 4) == 0) {
            if (chunk_len < 16) throw IoError(IoError::Kind::kFormat, path + ": short fmt chunk");
            format = rd_u16(chunk);
            channels = rd_u16(chunk + 2);
            sample_rate = rd_u32(chunk + 4);
            bits = rd_u16(chunk + 14);
            if (format == kFormatExtensible) {
                if (chunk_len < 40)
                    throw IoError(IoError::Kind::kFormat, path + ": short extensible fmt chunk");
                format = rd_u16(chunk + 24);  // first two bytes of the SubFormat GUID
            }
            have_fmt = true;
        } else if (std::memcmp(bytes.data() + pos, "data", 4) == 0) {
            data_off = pos + 8;
            data_len = chunk_len;
        }
        pos += 8 + chunk_len + (chunk_len & 1);  // chunks are word-aligned
    }
    if (!have_fmt || data_off == 0)
        throw IoError(IoError::Kind::kFormat, path + ": missing fmt or data chunk");
    if (channels == 0) throw IoError(IoError::Kind::kFormat, path + ": zero channels");

    bool ok_encoding = (format == kFormatPcm && (bits == 16 || bits == 32)) ||
                       (format == kFormatFloat && bits == 32);
    if (!ok_encoding)
        throw IoError(IoError::Kind::kFormat,
                      path + ": unsupported encoding (format " + std::to_string(format) + ", " +
                          std::to_string(bits) + " bits); need 16/32-bit PCM or 32-bit float");

    size_t bytes_per_sample = bits / 8;
    size_t frame_bytes = bytes_per_sample * channels;
    size_t frames = data_len / frame_bytes;

    WavData out;
    out.sample_rate = sample_rate;
    out.channels.assign(channels, std::vector<float>(frames));
    const uint8_t* d = bytes.data() + data_off;
    for (size_t f = 0; f < frames; ++f) {
        for (size_t c = 0; c < channels; ++c) {
            const uint8_t* p = d + f * frame_bytes + c * bytes_per_sample;
            float v;
            if (format == kFormatFloat) {
                uint32_t u = rd_u32(p);
                std::memcpy(&v, &u, 4);
            } else if (bits == 16) {
                int16_t s = static_cast<int16_t>(rd_u16(p));
                v = static_cast<float>(s) / 32768.0f;
            } else {
                int32_t s = static_cast<int32_t>(rd_u32(p));
                v = static_cast<float>(static_cast<double>(s) / 2147483648.0);
            }
            out.channels[c][f] = v;
        }
    }
    return out;
}

TriAudio read_audio3(const std::string& path) {
    WavData w = read_wav(path);
    if (w.channels.size() != 3)
        throw IoError(IoError::Kind::kFormat, path + ": expected 3 channels, found " +
                                                   std::to_string(w.channels.size()));
    TriAudio out;
    out.sample_rate = w.sample_rate;
    for (size_t c = 0; c < 3; ++c) out.ch[c] = std::move(w.channels[c]);
    return out;
}

void write_wav(const std::string& path, const std::vector<std::vector<float>>& channels,
               double sample_rate, WavEncoding encoding) {
    if (channels.empty()) throw IoError(IoError::Kind::kSchema, "write_wav: no channels");
    size_t frames = channels[0].size();
    for (const auto& c : channels)
        if (c.size() != frames)
            throw IoError(IoError::Kind::kSchema, "write_wav: channel length mismatch");

    uint16_t nch = static_cast<uint16_t>(channels.size());
    uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : 32;
    uint16_t fmt = encoding == WavEncoding::kPcm16 ? kFormatPcm : kFormatFloat;
    uint32_t byte_rate = static_cast<uint32_t>(sample_rate) * nch * bits / 8;
    uint32_t data_len = static_cast<uint32_t>(frames * nch * bits / 8);

    std::string s;
    s.reserve(44 + data_len);
    s += "RIFF";
    wr_u32(s, 36 + data_len);
    s += "WAVEfmt ";
    wr_u32(s, 16);
    wr_u16(s, fmt);
    wr_u16(s, nch);
    wr_u32(s, static_cast<uint32_t>(sample_rate));
    wr_u32(s, byte_rate);
    wr_u16(s, static_cast<uint16_t>(nch * bits / 8));
    wr_u16(s, bits);
    s += "data";
    wr_u32(s, data_len);
    for (size_t f = 0; f < frames; ++f) {
        for (size_t c = 0; c < nch; ++c) {
            float v = channels[c][f];
            if (encoding == WavEncoding::kPcm16) {
                double scaled = std::clamp(static_cast<double>(v) * 32768.0, -32768.0, 32767.0);
                wr_u16(s, static_cast<uint16_t>(static_cast<int16_t>(std::lrint(scaled))));
            } else {
                uint32_t u;
                std::memcpy(&u, &v, 4);
                wr_u32(s, u);
            }
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(IoError::Kind::kFile, "cannot write " + path);
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
    if (!out) throw IoError(IoError::Kind::kFile, "short write to " + path);
}

}  // namespace tridoa
