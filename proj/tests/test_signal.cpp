#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>

#include "crestcap/resample.hpp"
#include "crestcap/signal.hpp"
#include "crestcap/wav.hpp"
#include "test_util.hpp"

using namespace crestcap;

TEST_CASE("Signal rejects invalid construction") {
    CHECK_THROWS(Signal({}, 48000.0));
    CHECK_THROWS(Signal({0.0, std::numeric_limits<double>::quiet_NaN()}, 48000.0));
    CHECK_THROWS(Signal({0.0, std::numeric_limits<double>::infinity()}, 48000.0));
    CHECK_THROWS(Signal({0.0}, 0.0));
    CHECK_THROWS(Signal({0.0}, -1.0));
    CHECK_NOTHROW(Signal({0.0}, 1.0));
}

TEST_CASE("replicate_truncate tiles the input periodically") {
    const Signal x({1.0, 2.0, 3.0}, 3.0);
    const Signal two_s = replicate_truncate(x, 2.0);
    REQUIRE(two_s.samples == std::vector<double>{1.0, 2.0, 3.0, 1.0, 2.0, 3.0});

    const Signal same = replicate_truncate(x, 1.0);
    CHECK(same.samples == x.samples);

    const Signal single({5.0}, 1.0);
    CHECK(replicate_truncate(single, 3.0).samples == std::vector<double>{5.0, 5.0, 5.0});
}

TEST_CASE("replicate_truncate is idempotent at its own duration") {
    const Signal x({0.3, -0.7, 0.2, 0.9, -0.1}, 7.0);
    const Signal a = replicate_truncate(x, 1.3);
    const Signal b = replicate_truncate(a, a.duration_s());
    CHECK(a.samples == b.samples);
}

TEST_CASE("reamplify_to_peak hits the target exactly") {
    Signal x = testutil::sine(1000.0, 0.5, 40.0, 0.5);
    const Signal up = reamplify_to_peak(x, 1.0);
    CHECK(peak_abs(up) == 1.0);

    const double p = peak_abs(x);
    const Signal same = reamplify_to_peak(x, p);
    CHECK(peak_abs(same) == p);

    CHECK_THROWS(reamplify_to_peak(Signal(std::vector<double>(10, 0.0), 1000.0), 1.0));
}

TEST_CASE("wav float32 round trip is bit exact") {
    const auto dir = testutil::temp_dir("wav_f32");
    Signal x = testutil::sine(48000.0, 0.05, 440.0, 0.8);
    for (double& v : x.samples) v = static_cast<double>(static_cast<float>(v));
    const auto path = (dir / "f32.wav").string();
    save_wav(x, path, WavDepth::float32);
    const Signal back = load_wav(path);
    REQUIRE(back.samples.size() == x.samples.size());
    CHECK(back.sample_rate_hz == 48000.0);
    CHECK(back.samples == x.samples);
}

TEST_CASE("wav pcm16 round trip stays within one quantization step") {
    const auto dir = testutil::temp_dir("wav_p16");
    const Signal x({0.5, -0.25, 0.125, 1.0, -1.0}, 8000.0);
    const auto path = (dir / "p16.wav").string();
    save_wav(x, path, WavDepth::pcm16);
    const Signal back = load_wav(path);
    REQUIRE(back.samples.size() == x.samples.size());
    for (std::size_t i = 0; i < x.samples.size(); ++i)
        CHECK(std::abs(back.samples[i] - x.samples[i]) <= std::pow(2.0, -15.0));
}

TEST_CASE("wav pcm24 round trip stays within one quantization step") {
    const auto dir = testutil::temp_dir("wav_p24");
    const Signal x({0.3, -0.9, 0.0001}, 44100.0);
    const auto path = (dir / "p24.wav").string();
    save_wav(x, path, WavDepth::pcm24);
    const Signal back = load_wav(path);
    for (std::size_t i = 0; i < x.samples.size(); ++i)
        CHECK(std::abs(back.samples[i] - x.samples[i]) <= std::pow(2.0, -23.0));
}

TEST_CASE("wav integer depths reject out-of-range samples") {
    const auto dir = testutil::temp_dir("wav_range");
    const Signal x({1.2}, 48000.0);
    CHECK_THROWS(save_wav(x, (dir / "bad.wav").string(), WavDepth::pcm16));
    CHECK_THROWS(save_wav(x, (dir / "bad.wav").string(), WavDepth::pcm24));
    CHECK_NOTHROW(save_wav(x, (dir / "ok.wav").string(), WavDepth::float32));
}

namespace {

void write_pcm16_frames(const std::string& path, const std::vector<std::int16_t>& interleaved,
                        std::uint16_t channels, std::uint32_t rate) {
    std::ofstream f(path, std::ios::binary);
    const std::uint32_t data_size = static_cast<std::uint32_t>(interleaved.size() * 2);
    auto u32 = [&](std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
    auto u16 = [&](std::uint16_t v) { f.write(reinterpret_cast<const char*>(&v), 2); };
    f.write("RIFF", 4);
    u32(36 + data_size);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    u32(16);
    u16(1);
    u16(channels);
    u32(rate);
    u32(rate * 2u * channels);
    u16(static_cast<std::uint16_t>(2 * channels));
    u16(16);
    f.write("data", 4);
    u32(data_size);
    for (std::int16_t s : interleaved) f.write(reinterpret_cast<const char*>(&s), 2);
}

}  // namespace

TEST_CASE("wav pcm16 scaling: code 16384 loads as 0.5") {
    const auto dir = testutil::temp_dir("wav_scale");
    const auto path = (dir / "half.wav").string();
    write_pcm16_frames(path, {16384, -16384, 0}, 1, 48000);
    const Signal x = load_wav(path);
    CHECK(x.samples[0] == 0.5);
    CHECK(x.samples[1] == -0.5);
    CHECK(x.samples[2] == 0.0);
}

TEST_CASE("wav stereo downmix averages the channels") {
    const auto dir = testutil::temp_dir("wav_stereo");
    const auto path = (dir / "st.wav").string();
    // frame (0.4, 0.8) in 16-bit codes
    const std::int16_t l = static_cast<std::int16_t>(std::lround(0.4 * 32768.0));
    const std::int16_t r = static_cast<std::int16_t>(std::lround(0.8 * 32768.0));
    write_pcm16_frames(path, {l, r, 0, 0}, 2, 44100);
    const Signal x = load_wav(path);
    REQUIRE(x.samples.size() == 2);
    CHECK(x.samples[0] == doctest::Approx(0.6).epsilon(1e-4));
    CHECK(x.sample_rate_hz == 44100.0);
}

TEST_CASE("wav loader rejects truncated and unsupported files") {
    const auto dir = testutil::temp_dir("wav_bad");
    const auto trunc = (dir / "trunc.wav").string();
    {
        std::ofstream f(trunc, std::ios::binary);
        f.write("RIFF\x10\x00\x00\x00WAV", 11);
    }
    CHECK_THROWS(load_wav(trunc));
    CHECK_THROWS(load_wav((dir / "missing.wav").string()));

    // PCM8 is not a supported encoding
    const auto pcm8 = (dir / "pcm8.wav").string();
    {
        std::ofstream f(pcm8, std::ios::binary);
        auto u32 = [&](std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
        auto u16 = [&](std::uint16_t v) { f.write(reinterpret_cast<const char*>(&v), 2); };
        f.write("RIFF", 4);
        u32(36 + 4);
        f.write("WAVE", 4);
        f.write("fmt ", 4);
        u32(16);
        u16(1);
        u16(1);
        u32(8000);
        u32(8000);
        u16(1);
        u16(8);
        f.write("data", 4);
        u32(4);
        u32(0x80808080);
    }
    CHECK_THROWS(load_wav(pcm8));

    // header claims more data than the file holds
    const auto short_data = (dir / "short.wav").string();
    {
        std::ofstream f(short_data, std::ios::binary);
        auto u32 = [&](std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
        auto u16 = [&](std::uint16_t v) { f.write(reinterpret_cast<const char*>(&v), 2); };
        f.write("RIFF", 4);
        u32(36 + 1000);
        f.write("WAVE", 4);
        f.write("fmt ", 4);
        u32(16);
        u16(1);
        u16(1);
        u32(8000);
        u32(16000);
        u16(2);
        u16(16);
        f.write("data", 4);
        u32(1000);
        u16(0);
    }
    CHECK_THROWS(load_wav(short_data));
}

TEST_CASE("wav loader handles extensible headers, extra chunks and odd padding") {
    const auto dir = testutil::temp_dir("wav_ext");
    const auto path = (dir / "ext.wav").string();
    {
        std::ofstream f(path, std::ios::binary);
        auto u32 = [&](std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
        auto u16 = [&](std::uint16_t v) { f.write(reinterpret_cast<const char*>(&v), 2); };
        const std::uint32_t fmt_size = 40, junk_size = 3, data_size = 8;
        u32(0x46464952);  // "RIFF"
        u32(4 + 8 + fmt_size + 8 + junk_size + 1 + 8 + data_size);
        u32(0x45564157);  // "WAVE"
        f.write("fmt ", 4);
        u32(fmt_size);
        u16(0xFFFE);  // WAVE_FORMAT_EXTENSIBLE
        u16(1);
        u32(48000);
        u32(48000 * 4);
        u16(4);
        u16(32);
        u16(22);          // cbSize
        u16(32);          // valid bits
        u32(0x4);         // channel mask
        u16(3);           // subformat: IEEE float
        u16(0);
        const std::uint8_t tail[12] = {0x00, 0x00, 0x10, 0x00, 0x80, 0x00,
                                       0x00, 0xAA, 0x00, 0x38, 0x9B, 0x71};
        f.write(reinterpret_cast<const char*>(tail), 12);
        f.write("junk", 4);  // odd-sized chunk before data, needs pad byte
        u32(junk_size);
        f.write("abc", 3);
        f.put('\0');
        f.write("data", 4);
        u32(data_size);
        const float a = 0.25f, b = -0.5f;
        f.write(reinterpret_cast<const char*>(&a), 4);
        f.write(reinterpret_cast<const char*>(&b), 4);
    }
    const Signal x = load_wav(path);
    REQUIRE(x.samples.size() == 2);
    CHECK(x.samples[0] == 0.25);
    CHECK(x.samples[1] == -0.5);
    CHECK(x.sample_rate_hz == 48000.0);
}

TEST_CASE("resample preserves DC away from the edges") {
    const Signal x(std::vector<double>(48000, 0.7), 48000.0);
    for (double target : {44100.0, 1000.0, 96000.0}) {
        const Signal y = resample(x, target);
        CHECK(y.samples.size() ==
              static_cast<std::size_t>(std::llround(48000.0 * target / 48000.0)));
        const std::size_t margin = y.samples.size() / 5;
        for (std::size_t i = margin; i + margin < y.samples.size(); ++i)
            CHECK(std::abs(y.samples[i] - 0.7) <= 1e-3);
    }
}

TEST_CASE("resample of a 100 Hz sine to 1 kHz matches direct synthesis") {
    const Signal x = testutil::sine(48000.0, 2.0, 100.0, 1.0);
    const Signal y = resample(x, 1000.0);
    REQUIRE(y.samples.size() == 2000);
    const std::size_t margin = 200;
    double max_err = 0.0;
    for (std::size_t m = margin; m + margin < y.samples.size(); ++m) {
        const double expected = std::sin(2.0 * M_PI * 100.0 * static_cast<double>(m) / 1000.0);
        max_err = std::max(max_err, std::abs(y.samples[m] - expected));
    }
    CHECK(max_err <= 0.01);
}

TEST_CASE("resample keeps 400 Hz and rejects 600 Hz when targeting 1 kHz") {
    auto interior_rms = [](const Signal& s, std::size_t margin) {
        double acc = 0.0;
        std::size_t n = 0;
        for (std::size_t i = margin; i + margin < s.samples.size(); ++i) {
            acc += s.samples[i] * s.samples[i];
            ++n;
        }
        return std::sqrt(acc / static_cast<double>(n));
    };
    const double in_rms = 1.0 / std::sqrt(2.0);

    const Signal pass = resample(testutil::sine(48000.0, 4.0, 400.0, 1.0), 1000.0);
    CHECK(interior_rms(pass, 400) == doctest::Approx(in_rms).epsilon(0.01));

    const Signal stop = resample(testutil::sine(48000.0, 4.0, 600.0, 1.0), 1000.0);
    CHECK(interior_rms(stop, 400) <= in_rms * 1e-3);  // >= 60 dB down
}

TEST_CASE("resample at the same rate is the identity") {
    const Signal x = testutil::sine(1000.0, 1.0, 60.0, 0.9);
    const Signal y = resample(x, 1000.0);
    CHECK(y.samples == x.samples);
}

TEST_CASE("resample output length contract") {
    const Signal x(std::vector<double>(1000, 0.1), 1000.0);
    CHECK(resample(x, 48000.0).samples.size() == 48000);
    CHECK(resample(x, 44100.0).samples.size() == 44100);
    CHECK(resample(Signal(std::vector<double>(110250, 0.1), 44100.0), 1000.0).samples.size() ==
          2500);
}
