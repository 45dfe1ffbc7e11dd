#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "crestcap/drc.hpp"
#include "test_util.hpp"

using namespace crestcap;

namespace {

DrcParams params(double t, double r, double w, double attack = 0.0, double release = 0.5) {
    DrcParams p;
    p.threshold_db = t;
    p.ratio = r;
    p.knee_db = w;
    p.attack_s = attack;
    p.release_s = release;
    return p;
}

// the three-branch static characteristic, written out independently
double reference_curve(double x, double t, double r, double w) {
    if (w > 0.0 && 2.0 * (x - t) < -w) return x;
    if (w > 0.0 && 2.0 * (x - t) <= w) {
        const double e = x - t + w / 2.0;
        return x + (1.0 / r - 1.0) * e * e / (2.0 * w);
    }
    if (w <= 0.0 && x <= t) return x;
    return t + (x - t) / r;
}

}  // namespace

TEST_CASE("gain curve hard-knee spot values") {
    const auto p = params(-10.0, 8.0, 0.0);
    CHECK(drc_gain_curve(-2.0, p) == doctest::Approx(-9.0).epsilon(1e-12));
    CHECK(drc_gain_curve(-20.0, p) == -20.0);
    CHECK(drc_gain_curve(-10.0, p) == -10.0);

    const auto unity = params(-10.0, 1.0, 0.0);
    for (double x = -40.0; x <= 5.0; x += 1.3) CHECK(drc_gain_curve(x, unity) == doctest::Approx(x));
    const auto unity_knee = params(-10.0, 1.0, 12.0);
    for (double x = -40.0; x <= 5.0; x += 1.3)
        CHECK(drc_gain_curve(x, unity_knee) == doctest::Approx(x));
}

TEST_CASE("gain curve matches the closed form on a dense grid") {
    for (auto [t, r, w] : {std::tuple<double, double, double>{-10.0, 8.0, 0.0},
                           {-20.0, 50.0, 20.0},
                           {-14.0, 3.0, 6.0}}) {
        const auto p = params(t, r, w);
        for (int i = 0; i <= 1000; ++i) {
            const double x = -60.0 + 63.0 * i / 1000.0;
            CHECK(std::abs(drc_gain_curve(x, p) - reference_curve(x, t, r, w)) <= 1e-9);
        }
    }
}

TEST_CASE("gain curve is continuous and monotone") {
    const auto p = params(-20.0, 50.0, 20.0);
    // knee edges
    for (double edge : {-30.0, -10.0}) {
        const double below = drc_gain_curve(edge - 1e-9, p);
        const double above = drc_gain_curve(edge + 1e-9, p);
        CHECK(std::abs(above - below) <= 1e-6);
    }
    double prev = drc_gain_curve(-80.0, p);
    for (double x = -79.9; x <= 20.0; x += 0.1) {
        const double y = drc_gain_curve(x, p);
        CHECK(y >= prev - 1e-12);
        prev = y;
    }
}

TEST_CASE("gain curve rejects bad parameters") {
    CHECK_THROWS(drc_gain_curve(0.0, params(-10.0, 0.5, 0.0)));
    CHECK_THROWS(drc_gain_curve(0.0, params(-10.0, 8.0, -1.0)));
    DrcParams neg_attack = params(-10.0, 8.0, 0.0);
    neg_attack.attack_s = -0.1;
    CHECK_THROWS(drc_process(Signal({0.1}, 100.0), neg_attack));
}

TEST_CASE("drc passes sub-threshold signals through bit-exactly") {
    const Signal x = testutil::sine(8000.0, 0.25, 100.0, 0.2);  // -14 dBFS peak
    const Signal y = drc_process(x, params(-6.0, 8.0, 0.0));
    CHECK(y.samples == x.samples);

    // knee reaches down to T - W/2; stay below it
    const Signal z = drc_process(x, params(-3.0, 50.0, 20.0));
    CHECK(z.samples == x.samples);
}

TEST_CASE("drc steady state on a full-scale constant matches the static curve") {
    const Signal x(std::vector<double>(2000, 1.0), 8000.0);
    const Signal y = drc_process(x, params(-10.0, 8.0, 0.0, 0.0, 0.5));
    const double expected = std::pow(10.0, -8.75 / 20.0);  // T + (0-T)/R at 0 dBFS input
    for (double v : y.samples) CHECK(v == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("drc release follows a one-pole with the configured time constant") {
    const double fs = 48000.0;
    const std::size_t loud_len = 4800;
    const std::size_t tail_len = 48000;
    std::vector<double> in(loud_len + tail_len);
    for (std::size_t i = 0; i < loud_len; ++i) in[i] = 1.0;
    const double quiet = std::pow(10.0, -60.0 / 20.0);
    for (std::size_t i = loud_len; i < in.size(); ++i) in[i] = quiet;

    const Signal y = drc_process(Signal(in, fs), params(-10.0, 8.0, 0.0, 0.0, 0.5));
    auto gain_db_at = [&](std::size_t idx) {
        return 20.0 * std::log10(y.samples[idx] / in[idx]);
    };
    CHECK(gain_db_at(loud_len - 1) == doctest::Approx(-8.75).epsilon(1e-9));
    // after 0.5 s of release the remaining reduction is 1/e of the initial
    const std::size_t idx = loud_len + 24000;
    CHECK(gain_db_at(idx) == doctest::Approx(-8.75 / M_E).epsilon(0.01));
}

TEST_CASE("drc with zero attack and release is memoryless") {
    testutil::Rng rng(21);
    std::vector<double> in(500);
    for (double& v : in) v = rng.uniform(-1.0, 1.0);
    const auto p = params(-12.0, 8.0, 6.0, 0.0, 0.0);
    const Signal fwd = drc_process(Signal(in, 8000.0), p);
    std::vector<double> rev(in.rbegin(), in.rend());
    const Signal bwd = drc_process(Signal(rev, 8000.0), p);
    for (std::size_t i = 0; i < in.size(); ++i)
        CHECK(fwd.samples[i] == bwd.samples[in.size() - 1 - i]);
}

TEST_CASE("drc only attenuates before makeup") {
    testutil::Rng rng(22);
    std::vector<double> in(2000);
    for (double& v : in) v = rng.uniform(-1.0, 1.0);
    const Signal y = drc_process(Signal(in, 8000.0), params(-15.0, 4.0, 10.0, 0.002, 0.1));
    for (std::size_t i = 0; i < in.size(); ++i)
        CHECK(std::abs(y.samples[i]) <= std::abs(in[i]) * (1.0 + 1e-12));
}

TEST_CASE("soft_clip matches its fixed compressor parameterization") {
    const Signal x = testutil::sine(8000.0, 0.2, 80.0, 1.0);
    const Signal a = soft_clip(x, -12.0);
    const Signal b = drc_process(x, params(-12.0, 50.0, 20.0, 0.0, 0.0));
    CHECK(a.samples == b.samples);
}

TEST_CASE("soft_clip static curve approaches slope 1/50 far above threshold") {
    const auto p = params(-20.0, 50.0, 20.0, 0.0, 0.0);
    const double y1 = drc_gain_curve(10.0, p);
    const double y2 = drc_gain_curve(20.0, p);
    CHECK((y2 - y1) / 10.0 == doctest::Approx(1.0 / 50.0).epsilon(1e-9));

    // once-differentiable at the knee edges: slopes agree across each edge
    auto slope = [&](double x) {
        return (drc_gain_curve(x + 1e-6, p) - drc_gain_curve(x - 1e-6, p)) / 2e-6;
    };
    CHECK(slope(-30.0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(slope(-10.0) == doctest::Approx(1.0 / 50.0).epsilon(2e-2));
}
