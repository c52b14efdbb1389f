#include <cmath>
#include <numeric>

#include "doctest.h"
#include "dsa/rf_env.hpp"
#include "oracles.hpp"

using namespace dsa;

namespace {

Environment quiet(double noise = 0.0)
{
    Environment env;
    env.frontend.tune_delay = 0.0;
    env.frontend.noise_floor_power = noise;
    env.rng_seed = 7;
    return env;
}

Emitter tone(std::string id, double f, double a)
{
    Emitter e;
    e.id = std::move(id);
    e.kind = EmitterKind::Tone;
    e.center_freq = f;
    e.power = a;
    return e;
}

Emitter noise_band(std::string id, double f, double bw, double a)
{
    Emitter e;
    e.id = std::move(id);
    e.kind = EmitterKind::BandNoise;
    e.center_freq = f;
    e.bandwidth = bw;
    e.power = a;
    return e;
}

double mean_power(const IqBuffer& b)
{
    double s = 0.0;
    for (const auto& x : b.samples) s += std::norm(x);
    return s / static_cast<double>(b.samples.size());
}

}  // namespace

TEST_CASE("silent environment captures zeros")
{
    const auto b = capture(quiet(), 2.44e9, 1e-3, 0.0);
    REQUIRE(b.samples.size() == 4000);
    for (const auto& x : b.samples) CHECK(x == std::complex<double>{});
}

TEST_CASE("DC tone has constant magnitude")
{
    auto env = quiet();
    env.emitters.push_back(tone("t", 2.44e9, 0.7));
    const auto b = capture(env, 2.44e9, 1e-4, 0.0);
    for (const auto& x : b.samples) CHECK(std::abs(x) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("1 MHz tone at 4 MS/s lands in one DFT bin")
{
    auto env = quiet();
    env.emitters.push_back(tone("t", 2.441e9, 1.0));
    const auto b = capture(env, 2.44e9, 100e-6, 0.0);
    REQUIRE(b.samples.size() == 400);
    // One cycle per four samples.
    CHECK(b.samples[1].real() == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(b.samples[1].imag() == doctest::Approx(1.0));
    const auto X = oracle::dft(b.samples);
    double total = 0.0;
    for (const auto& x : X) total += std::norm(x);
    CHECK(std::norm(X[100]) / total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("tune delay is dropped and start time advanced")
{
    auto env = quiet();
    env.frontend.tune_delay = 5e-3;
    const auto b = capture(env, 2.44e9, 6e-3, 1.0);
    CHECK(b.samples.size() == 4000);
    CHECK(b.start_time == doctest::Approx(1.005));
    CHECK_THROWS_WITH(capture(env, 2.44e9, 5e-3, 0.0), "empty capture");
    CHECK_THROWS_WITH(capture(env, 2.44e9, 4e-3, 0.0), "empty capture");
}

TEST_CASE("capture outside every emitter is noise only, not an error")
{
    auto env = quiet(1e-6);
    env.emitters.push_back(noise_band("pu", 2.44e9, 1e6, 1.0));
    const auto b = capture(env, 868e6, 2e-3, 0.0);
    CHECK(mean_power(b) == doctest::Approx(1e-6).epsilon(0.05));
}

TEST_CASE("emitter activity and sweep stepping")
{
    Emitter t = tone("t", 1e6, 1.0);
    t.active = {0.0, 10.0};
    CHECK(emitter_active(t, 5.0));
    CHECK_FALSE(emitter_active(t, 11.0));

    Emitter s = noise_band("s", 2479e6, 5e5, 1.0);
    s.kind = EmitterKind::SweepingBandNoise;
    s.sweep = SweepPlan{2479e6, 2481e6, 0.1e6, 1.0};
    CHECK(current_center(s, 0.0) == doctest::Approx(2479e6));
    CHECK(current_center(s, 1.5) == doctest::Approx(2479.1e6));
    CHECK(current_center(s, 100.0) == doctest::Approx(2481e6));
}

TEST_CASE("capture is deterministic")
{
    auto env = quiet(1e-6);
    env.emitters.push_back(noise_band("a", 2.4405e9, 5e5, 1.0));
    const auto a = capture(env, 2.44e9, 2e-3, 3.0);
    const auto b = capture(env, 2.44e9, 2e-3, 3.0);
    CHECK(a.samples == b.samples);
    env.rng_seed = 8;
    CHECK(capture(env, 2.44e9, 2e-3, 3.0).samples != a.samples);
}

TEST_CASE("linearity across emitters")
{
    auto env_a = quiet();
    env_a.emitters.push_back(noise_band("a", 2.4405e9, 5e5, 1.0));
    auto env_b = quiet();
    env_b.emitters.push_back(tone("b", 2.4393e9, 0.3));
    auto env_ab = quiet();
    env_ab.emitters = {env_a.emitters[0], env_b.emitters[0]};
    const auto a = capture(env_a, 2.44e9, 1e-3, 0.5);
    const auto b = capture(env_b, 2.44e9, 1e-3, 0.5);
    const auto ab = capture(env_ab, 2.44e9, 1e-3, 0.5);
    REQUIRE(ab.samples.size() == a.samples.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < ab.samples.size(); ++i)
        worst = std::max(worst, std::abs(ab.samples[i] - (a.samples[i] + b.samples[i])));
    CHECK(worst <= 1e-12);
}

TEST_CASE("Parseval: unit tone power")
{
    for (double off : {0.0, 0.37e6, -1.2e6}) {
        auto env = quiet();
        env.emitters.push_back(tone("t", 2.44e9 + off, 1.0));
        const auto b = capture(env, 2.44e9, 1e-3, 0.0);
        CHECK(mean_power(b) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("band noise carries its power and rejects out-of-window emitters exactly")
{
    auto env = quiet();
    env.emitters.push_back(noise_band("in", 2.44e9 + 0.5e6, 5e5, 2.0));
    CHECK(mean_power(capture(env, 2.44e9, 20e-3, 0.0)) == doctest::Approx(4.0).epsilon(0.03));

    // Window is +-2 MHz; an emitter starting just beyond contributes nothing.
    env.emitters = {noise_band("out", 2.44e9 + 2.0e6 + 0.25e6 + 1.0, 5e5, 5.0),
                    tone("far", 2.44e9 - 2.5e6, 5.0)};
    for (const auto& x : capture(env, 2.44e9, 2e-3, 0.0).samples) CHECK(x == std::complex<double>{});
}

TEST_CASE("band noise is confined to its band")
{
    auto env = quiet();
    env.emitters.push_back(noise_band("pu", 2.44e9 + 1e6, 5e5, 1.0));
    const auto b = capture(env, 2.44e9, 1e-3, 0.0);
    // Spectrum on the capture's own grid: power only within [0.75, 1.25] MHz.
    std::vector<std::complex<double>> x(b.samples.begin(), b.samples.end());
    const auto X = oracle::dft(x);
    const double df = 4e6 / static_cast<double>(x.size());
    double inside = 0.0, outside = 0.0;
    for (std::size_t m = 0; m < X.size(); ++m) {
        double f = static_cast<double>(m) * df;
        if (f >= 2e6) f -= 4e6;
        (f >= 0.75e6 - 1.0 && f <= 1.25e6 + 1.0 ? inside : outside) += std::norm(X[m]);
    }
    CHECK(outside <= 1e-18 * inside);
}

TEST_CASE("inactive emitters contribute only while active")
{
    auto env = quiet();
    Emitter t = tone("t", 2.44e9, 1.0);
    t.active = {0.0, 0.5e-3};
    env.emitters.push_back(t);
    const auto b = capture(env, 2.44e9, 1e-3, 0.0);
    CHECK(std::abs(b.samples[0]) == doctest::Approx(1.0));
    CHECK(std::abs(b.samples[1999]) == doctest::Approx(1.0));
    CHECK(b.samples[2001] == std::complex<double>{});
}

TEST_CASE("validation")
{
    auto env = quiet();
    env.emitters = {tone("a", 1e9, 1.0), tone("a", 2e9, 1.0)};
    CHECK_THROWS_AS(validate(env), Error);
    CHECK_THROWS_AS(validate(noise_band("n", 1e9, 0.0, 1.0)), Error);
    CHECK_THROWS_AS(validate(tone("n", 1e9, -1.0)), Error);
    Emitter s = noise_band("s", 1e9, 1e5, 1.0);
    s.kind = EmitterKind::SweepingBandNoise;
    CHECK_THROWS_AS(validate(s), Error);
    s.sweep = SweepPlan{2e9, 1e9, 1e5, 1.0};
    CHECK_THROWS_AS(validate(s), Error);
    FrontEndConfig fe;
    fe.max_instantaneous_bw = 8e6;
    CHECK_THROWS_AS(validate(fe), Error);
}
