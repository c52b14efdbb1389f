#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "dsa/energy_sensor.hpp"
#include "oracles.hpp"

using namespace dsa;

namespace {

SensorConfig reference_sensor()
{
    return SensorConfig{};
}

IqBuffer buffer(std::vector<std::complex<double>> s, double center = 2.44e9, double fs = 4e6)
{
    IqBuffer b;
    b.samples = std::move(s);
    b.center_freq = center;
    b.sample_rate = fs;
    return b;
}

std::vector<std::complex<double>> tone_samples(std::size_t n, double offset, double fs, double a = 1.0)
{
    std::vector<std::complex<double>> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ph = 2.0 * std::numbers::pi * offset * static_cast<double>(i) / fs;
        s[i] = a * std::complex<double>(std::cos(ph), std::sin(ph));
    }
    return s;
}

}  // namespace

TEST_CASE("FFT layout follows the sizing rules")
{
    const auto l = fft_layout(reference_sensor());
    CHECK(l.fft_size == 640);
    CHECK(l.bin_start == 80);
    CHECK(l.bin_stop == 560);
    CHECK(l.usable_bins == 480);
    CHECK(chunk_bandwidth(reference_sensor()) == 3e6);

    const auto small = fft_layout({8.0, 1.0, 1});
    CHECK(small.fft_size == 8);
    CHECK(small.bin_start == 1);
    CHECK(small.bin_stop == 7);
    CHECK(small.usable_bins == 6);

    CHECK(fft_layout({10.0, 3.0, 1}).fft_size == 4);  // ceil
    CHECK_THROWS_WITH(fft_layout({4e6, 5e6, 1}), "fewer than one bin");
    CHECK_THROWS_AS(fft_layout({4e6, 6250.0, 0}), Error);
}

TEST_CASE("Blackman-Harris window")
{
    CHECK(blackman_harris(1) == std::vector<double>{1.0});
    CHECK_THROWS_AS(blackman_harris(0), Error);
    const auto w = blackman_harris(64);
    CHECK(w[0] == doctest::Approx(0.00006).epsilon(1e-9));
    for (std::size_t n : {2u, 5u, 64u, 640u, 641u}) {
        const auto v = blackman_harris(n);
        for (std::size_t k = 0; k < n; ++k) {
            CHECK(v[k] == v[n - 1 - k]);
            CHECK(v[k] >= 0.0);
            CHECK(v[k] <= 1.0);
            CHECK(v[k] == doctest::Approx(oracle::bh(k, n)).epsilon(1e-12));
        }
    }
}

TEST_CASE("dwell time and count")
{
    FrontEndConfig fe;
    fe.tune_delay = 5e-3;
    CHECK(dwell_time(reference_sensor(), fe) == doctest::Approx(5e-3 + 512.0 * 640.0 / 4e6));
    CHECK(dwell_count(reference_sensor(), {2405e6, 2480e6}) == 25);
    CHECK(dwell_count(reference_sensor(), {2405e6, 2408e6}) == 1);
    CHECK(dwell_count(reference_sensor(), {2405e6, 2408.1e6}) == 2);
    CHECK_THROWS_AS(dwell_count(reference_sensor(), {2405e6, 2405e6}), Error);
}

TEST_CASE("all-zero buffer yields zero energy")
{
    const auto m = sense_dwell(buffer(std::vector<std::complex<double>>(640 * 512)), reference_sensor());
    REQUIRE(m.entries.size() == 480);
    for (const auto& e : m.entries) {
        CHECK(e.energy == 0.0);
        CHECK(e.energy_db == doctest::Approx(-300.0));
    }
}

TEST_CASE("insufficient dwell and rate mismatch")
{
    CHECK_THROWS_WITH(sense_dwell(buffer(std::vector<std::complex<double>>(640 * 512 - 1)), reference_sensor()),
                      "insufficient dwell");
    CHECK_THROWS_AS(sense_dwell(buffer(std::vector<std::complex<double>>(640 * 512), 0.0, 2e6), reference_sensor()), Error);
}

TEST_CASE("carrier mapping is DC-centered and evenly spaced")
{
    const auto m = sense_dwell(buffer(std::vector<std::complex<double>>(640 * 512), 2.44e9), reference_sensor());
    CHECK(m.entries.front().carrier_freq == doctest::Approx(2.44e9 - 240 * 6250.0));
    CHECK(m.entries.back().carrier_freq == doctest::Approx(2.44e9 + 239 * 6250.0));
    for (std::size_t i = 1; i < m.entries.size(); ++i)
        CHECK(m.entries[i].carrier_freq - m.entries[i - 1].carrier_freq == doctest::Approx(6250.0));
    CHECK(m.band.low == doctest::Approx(2.44e9 - 1.5e6));
    CHECK(m.band.high == doctest::Approx(2.44e9 + 1.5e6));
}

TEST_CASE("matches the brute-force windowed DFT")
{
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 1.0);
    const SensorConfig cfg{64e3, 1e3, 6};  // 64-point FFT, 6 vectors
    std::vector<std::complex<double>> s(64 * 6);
    for (auto& x : s) x = {g(rng), g(rng)};
    const auto m = sense_dwell(buffer(s, 0.0, 64e3), cfg);
    const auto ref = oracle::windowed_energy(s, 64, 6);
    const auto l = fft_layout(cfg);
    REQUIRE(m.entries.size() == l.usable_bins);
    for (std::size_t j = 0; j < l.usable_bins; ++j)
        CHECK(m.entries[j].energy == doctest::Approx(ref[j + l.bin_start]).epsilon(1e-9));
}

TEST_CASE("tone on a retained bin center")
{
    // Oracle shows the window's main lobe spreads a bin-centered tone over
    // the neighbours: the peak bin keeps about half, +-3 bins keep > 99%.
    const SensorConfig cfg{64e3, 1e3, 4};
    const double offset = 10 * 1e3;
    const auto s = tone_samples(64 * 4, offset, 64e3);
    const auto m = sense_dwell(buffer(s, 0.0, 64e3), cfg);
    const auto ref = oracle::windowed_energy(s, 64, 4);
    const auto l = fft_layout(cfg);

    double total = 0.0, lobe = 0.0;
    std::size_t peak = 0;
    for (std::size_t j = 0; j < m.entries.size(); ++j) {
        total += m.entries[j].energy;
        if (m.entries[j].energy > m.entries[peak].energy) peak = j;
        if (std::abs(m.entries[j].carrier_freq - offset) <= 3e3 + 1.0) lobe += m.entries[j].energy;
    }
    CHECK(m.entries[peak].carrier_freq == doctest::Approx(offset));
    const std::size_t jp = peak + l.bin_start;
    double ref_total = 0.0;
    for (std::size_t j = l.bin_start; j < l.bin_stop; ++j) ref_total += ref[j];
    CHECK(m.entries[peak].energy / total == doctest::Approx(ref[jp] / ref_total).epsilon(1e-9));
    CHECK(lobe / total >= 0.99);
}

TEST_CASE("energy scales linearly with band-noise power")
{
    Environment env;
    env.frontend.tune_delay = 0.0;
    env.frontend.noise_floor_power = 0.0;
    env.rng_seed = 3;
    Emitter e;
    e.id = "pu";
    e.kind = EmitterKind::BandNoise;
    e.center_freq = 2.4403e9;
    e.bandwidth = 5e5;
    e.power = 1.0;
    env.emitters = {e};
    SensorConfig cfg;
    cfg.avg_vectors = 100;
    const double dur = 640.0 * 100 / 4e6;
    auto total = [&](double amp) {
        env.emitters[0].power = amp;
        double t = 0.0;
        for (const auto& x : sense_dwell(capture(env, 2.44e9, dur, 0.0), cfg).entries) t += x.energy;
        return t;
    };
    // Same substream for both runs, so doubling power^2 doubles energy.
    CHECK(total(std::sqrt(2.0)) / total(1.0) == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("averaging consistency")
{
    Environment env;
    env.frontend.tune_delay = 0.0;
    env.rng_seed = 5;
    Emitter e;
    e.id = "pu";
    e.kind = EmitterKind::BandNoise;
    e.center_freq = 2.44e9;
    e.bandwidth = 2e6;
    e.power = 1.0;
    env.emitters = {e};
    SensorConfig full, half;
    full.avg_vectors = 100;
    half.avg_vectors = 50;
    const double tf = 640.0 * 100 / 4e6, th = 640.0 * 50 / 4e6;
    const auto a = sense_dwell(capture(env, 2.44e9, tf, 0.0), full);
    const auto b1 = sense_dwell(capture(env, 2.44e9, th, 1.0), half);
    const auto b2 = sense_dwell(capture(env, 2.44e9, th, 2.0), half);
    double sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        sa += a.entries[i].energy;
        sb += 0.5 * (b1.entries[i].energy + b2.entries[i].energy);
    }
    CHECK(std::abs(sa - sb) / sa < 0.05);
}

TEST_CASE("sweep covers the band without gaps or duplicates")
{
    Environment env;
    env.frontend.noise_floor_power = 1e-6;
    env.rng_seed = 1;
    SensorConfig cfg;
    cfg.avg_vectors = 4;
    const Band band{2405e6, 2420e6};
    const auto m = sweep(env, band, cfg, 10.0);
    REQUIRE(m.entries.size() == 2400);
    CHECK(m.entries.front().carrier_freq == doctest::Approx(2405e6));
    CHECK(m.entries.back().carrier_freq == doctest::Approx(2420e6 - 6250.0));
    std::set<double> seen;
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        CHECK(seen.insert(m.entries[i].carrier_freq).second);
        if (i > 0) CHECK(m.entries[i].carrier_freq - m.entries[i - 1].carrier_freq == doctest::Approx(6250.0));
        CHECK(m.entries[i].energy >= 0.0);
    }
    CHECK(m.sensing_time == doctest::Approx(5 * dwell_time(cfg, env.frontend)));
    CHECK(m.sensed_at == 10.0);

    // Partial last chunk is trimmed at the band edge.
    const auto p = sweep(env, {2405e6, 2409e6}, cfg, 0.0);
    CHECK(p.entries.size() == 640);
    CHECK(p.sensing_time == doctest::Approx(2 * dwell_time(cfg, env.frontend)));
}

TEST_CASE("sweep locates a primary user")
{
    Environment env;
    env.rng_seed = 2;
    Emitter pu;
    pu.id = "pu";
    pu.kind = EmitterKind::BandNoise;
    pu.center_freq = 2440e6;
    pu.bandwidth = 5e5;
    pu.power = 1.0;
    env.emitters = {pu};
    SensorConfig cfg;
    cfg.avg_vectors = 32;
    const auto m = sweep(env, {2405e6, 2480e6}, cfg, 0.0);
    const auto peak = std::max_element(m.entries.begin(), m.entries.end(),
                                       [](const auto& a, const auto& b) { return a.energy < b.energy; });
    CHECK(std::abs(peak->carrier_freq - 2440e6) <= 2.5e5 + cfg.channel_bandwidth);
    const auto best = min_energy_frequency(m);
    CHECK(std::abs(best.carrier_freq - 2440e6) > 2.5e5);
}

TEST_CASE("minimum energy selection")
{
    EnergyMap m;
    m.entries = {{1.0, 5.0, 0.0}};
    CHECK(min_energy_frequency(m).carrier_freq == 1.0);
    m.entries = {{1.0, 5.0, 0.0}, {2.0, 1.0, 0.0}, {3.0, 1.0, 0.0}};
    CHECK(min_energy_frequency(m).carrier_freq == 2.0);
    const std::vector<double> ex{2.0};
    CHECK(min_energy_frequency(m, ex).carrier_freq == 3.0);
    const std::vector<double> all{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(min_energy_frequency(m, all), Error);
}

TEST_CASE("energy map CSV")
{
    EnergyMap m;
    m.entries = {{2405000000.0, 0.25, to_db(0.25)}};
    std::ostringstream os;
    write_csv(os, m);
    CHECK(os.str().rfind("carrier_hz,energy,energy_db\n2405000000,0.25,", 0) == 0);
}
