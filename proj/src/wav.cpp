#include "crestcap/wav.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace crestcap {

namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

// first 4 bytes of the KSDATAFORMAT_SUBTYPE GUIDs; the remaining 12 are shared
constexpr std::array<std::uint8_t, 12> kGuidTail = {0x00, 0x00, 0x10, 0x00, 0x80, 0x00,
                                                    0x00, 0xAA, 0x00, 0x38, 0x9B, 0x71};

std::uint32_t read_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error("wav: " + path + ": " + what);
}

}  // namespace

Signal load_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(path, "cannot open file");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    if (bytes.size() < 12) fail(path, "truncated RIFF header");
    if (std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        fail(path, "not a RIFF/WAVE file");

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    const std::uint8_t* data = nullptr;
    std::uint32_t data_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
        const std::uint32_t chunk_size = read_u32(bytes.data() + pos + 4);
        const std::size_t body = pos + 8;
        if (body + chunk_size > bytes.size()) {
            if (std::memcmp(id, "data", 4) == 0) fail(path, "truncated data chunk");
            fail(path, "truncated chunk");
        }
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (chunk_size < 16) fail(path, "fmt chunk too small");
            const std::uint8_t* p = bytes.data() + body;
            format = read_u16(p);
            channels = read_u16(p + 2);
            rate = read_u32(p + 4);
            bits = read_u16(p + 14);
            if (format == kFormatExtensible) {
                if (chunk_size < 40) fail(path, "extensible fmt chunk too small");
                const std::uint8_t* guid = p + 24;
                if (std::memcmp(guid + 4, kGuidTail.data(), kGuidTail.size()) != 0)
                    fail(path, "unsupported extensible subformat");
                format = read_u16(guid);
            }
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            data = bytes.data() + body;
            data_size = chunk_size;
        }
        pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
    }

    if (!have_fmt) fail(path, "missing fmt chunk");
    if (data == nullptr) fail(path, "missing data chunk");
    if (channels == 0) fail(path, "zero channels");
    if (rate == 0) fail(path, "zero sample rate");

    std::size_t bytes_per_sample;
    if (format == kFormatPcm && bits == 16) {
        bytes_per_sample = 2;
    } else if (format == kFormatPcm && bits == 24) {
        bytes_per_sample = 3;
    } else if (format == kFormatFloat && bits == 32) {
        bytes_per_sample = 4;
    } else {
        fail(path, "unsupported encoding (format tag " + std::to_string(format) + ", " +
                       std::to_string(bits) + " bits); expected PCM 16/24 or float32");
    }

    const std::size_t frame_bytes = bytes_per_sample * channels;
    const std::size_t n_frames = data_size / frame_bytes;
    if (n_frames == 0) fail(path, "no audio frames");

    std::vector<double> mono(n_frames, 0.0);
    for (std::size_t fr = 0; fr < n_frames; ++fr) {
        double acc = 0.0;
        for (std::size_t ch = 0; ch < channels; ++ch) {
            const std::uint8_t* p = data + fr * frame_bytes + ch * bytes_per_sample;
            double v;
            if (format == kFormatPcm && bits == 16) {
                const std::int16_t s = static_cast<std::int16_t>(p[0] | (p[1] << 8));
                v = static_cast<double>(s) / 32768.0;
            } else if (format == kFormatPcm && bits == 24) {
                std::int32_t s = p[0] | (p[1] << 8) | (p[2] << 16);
                if (s & 0x800000) s -= 0x1000000;
                v = static_cast<double>(s) / 8388608.0;
            } else {
                float fv;
                std::memcpy(&fv, p, 4);
                if (!std::isfinite(fv)) fail(path, "non-finite float sample");
                v = static_cast<double>(fv);
            }
            acc += v;
        }
        mono[fr] = acc / static_cast<double>(channels);
    }
    return Signal(std::move(mono), static_cast<double>(rate));
}

void save_wav(const Signal& x, const std::string& path, WavDepth depth) {
    const std::size_t n = x.samples.size();
    std::uint16_t format, bits;
    switch (depth) {
        case WavDepth::pcm16: format = kFormatPcm; bits = 16; break;
        case WavDepth::pcm24: format = kFormatPcm; bits = 24; break;
        case WavDepth::float32: format = kFormatFloat; bits = 32; break;
        default: throw std::invalid_argument("save_wav: bad depth");
    }
    if (format == kFormatPcm) {
        for (double v : x.samples)
            if (std::abs(v) > 1.0)
                fail(path, "sample magnitude exceeds full scale; integer depths cannot represent it");
    }

    const std::uint16_t block_align = static_cast<std::uint16_t>(bits / 8);
    const std::uint32_t rate = static_cast<std::uint32_t>(std::llround(x.sample_rate_hz));
    const std::uint32_t data_size = static_cast<std::uint32_t>(n * block_align);

    std::vector<std::uint8_t> out;
    out.reserve(44 + data_size);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    put_u32(out, 36 + data_size);
    out.insert(out.end(), {'W', 'A', 'V', 'E'});
    out.insert(out.end(), {'f', 'm', 't', ' '});
    put_u32(out, 16);
    put_u16(out, format);
    put_u16(out, 1);  // mono
    put_u32(out, rate);
    put_u32(out, rate * block_align);
    put_u16(out, block_align);
    put_u16(out, bits);
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    put_u32(out, data_size);

    for (double v : x.samples) {
        if (depth == WavDepth::pcm16) {
            long s = std::lround(v * 32768.0);
            if (s > 32767) s = 32767;
            if (s < -32768) s = -32768;
            const auto u = static_cast<std::uint16_t>(static_cast<std::int16_t>(s));
            put_u16(out, u);
        } else if (depth == WavDepth::pcm24) {
            long s = std::lround(v * 8388608.0);
            if (s > 8388607) s = 8388607;
            if (s < -8388608) s = -8388608;
            const auto u = static_cast<std::uint32_t>(static_cast<std::int32_t>(s));
            out.push_back(static_cast<std::uint8_t>(u & 0xFF));
            out.push_back(static_cast<std::uint8_t>((u >> 8) & 0xFF));
            out.push_back(static_cast<std::uint8_t>((u >> 16) & 0xFF));
        } else {
            const float fv = static_cast<float>(v);
            std::uint32_t u;
            std::memcpy(&u, &fv, 4);
            put_u32(out, u);
        }
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) fail(path, "cannot open file for writing");
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) fail(path, "write failed");
}

}  // namespace crestcap
