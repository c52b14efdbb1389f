#include "dsa/rf_env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include "fft.hpp"

namespace dsa {
namespace {

using cplx = std::complex<double>;
// Gaussian draws dominate capture cost; the Boost engine and ziggurat sampler
// are several times faster than their libstdc++ counterparts.
using Gauss = boost::random::normal_distribution<double>;
using Engine = boost::random::mt19937_64;

struct Segment {
    std::int64_t begin = 0;  // first sample index
    std::int64_t end = 0;    // one past last
    double center = 0.0;
};

// Splits the active part of [t0, t0 + n/fs) into runs of constant emitter center.
std::vector<Segment> active_segments(const Emitter& e, double t0, double fs, std::int64_t n)
{
    std::vector<Segment> out;
    const double rel_start = (e.active.start - t0) * fs;
    const double rel_stop = (e.active.stop - t0) * fs;
    if (rel_stop < 0.0 || rel_start > static_cast<double>(n - 1)) return out;
    std::int64_t lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(rel_start)));
    const std::int64_t hi =
        std::min<std::int64_t>(n - 1, static_cast<std::int64_t>(std::floor(std::min(rel_stop, 9e18))));

    while (lo <= hi) {
        const double t = t0 + static_cast<double>(lo) / fs;
        const double center = current_center(e, t);
        std::int64_t next = hi + 1;
        if (e.sweep && center < e.sweep->stop_freq) {
            const double steps = std::floor((t - e.active.start) / e.sweep->dwell);
            const double t_change = e.active.start + (steps + 1.0) * e.sweep->dwell;
            const auto n_change = static_cast<std::int64_t>(std::ceil((t_change - t0) * fs));
            next = std::clamp<std::int64_t>(n_change, lo + 1, hi + 1);
        }
        out.push_back({lo, next, center});
        lo = next;
    }
    return out;
}

void add_tone(std::vector<cplx>& s, const Segment& seg, double offset, double amplitude, double fs)
{
    const double w = 2.0 * std::numbers::pi * offset / fs;
    for (std::int64_t n = seg.begin; n < seg.end; ++n) {
        const double ph = w * static_cast<double>(n);
        s[static_cast<std::size_t>(n)] += amplitude * cplx(std::cos(ph), std::sin(ph));
    }
}

void add_band_noise(std::vector<cplx>& s, const Segment& seg, double offset, double bandwidth,
                    double amplitude, double fs, double window, Engine rng)
{
    const std::int64_t len = seg.end - seg.begin;
    const double df = fs / static_cast<double>(len);
    const std::int64_t k_min = -(len / 2);
    const std::int64_t k_max = len - 1 - len / 2;

    const double lo = offset - bandwidth / 2.0;
    const double hi = offset + bandwidth / 2.0;
    const double lo_c = std::max(lo, -window / 2.0);
    const double hi_c = std::min(hi, window / 2.0);
    if (lo_c > hi_c) return;

    auto first = static_cast<std::int64_t>(std::ceil(lo / df));
    auto last = static_cast<std::int64_t>(std::floor(hi / df));
    std::int64_t full = last - first + 1;
    std::int64_t k_lo = static_cast<std::int64_t>(std::ceil(lo_c / df));
    std::int64_t k_hi = static_cast<std::int64_t>(std::floor(hi_c / df));
    if (full <= 0) {
        // Band narrower than one grid bin: all power lands in the nearest bin.
        const auto k = static_cast<std::int64_t>(std::llround(offset / df));
        if (static_cast<double>(k) * df < -window / 2.0 || static_cast<double>(k) * df > window / 2.0) return;
        full = 1;
        k_lo = k_hi = k;
    }
    k_lo = std::max(k_lo, k_min);
    k_hi = std::min(k_hi, k_max);
    if (k_lo > k_hi) return;

    const double sigma = std::sqrt(amplitude * amplitude / static_cast<double>(full) / 2.0);
    Gauss gauss(0.0, sigma);
    std::vector<cplx> spec(static_cast<std::size_t>(len));
    for (std::int64_t k = k_lo; k <= k_hi; ++k) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        spec[static_cast<std::size_t>((k + len) % len)] = cplx(re, im);
    }
    detail::fft_inplace(spec, detail::FftDirection::Backward);
    for (std::int64_t n = 0; n < len; ++n)
        s[static_cast<std::size_t>(seg.begin + n)] += spec[static_cast<std::size_t>(n)];
}

}  // namespace

void validate(const Emitter& e)
{
    if (e.power < 0.0) throw Error("emitter '" + e.id + "': power must be >= 0");
    if (e.kind == EmitterKind::Tone) {
        if (e.bandwidth < 0.0) throw Error("emitter '" + e.id + "': bandwidth must be >= 0");
    } else if (!(e.bandwidth > 0.0)) {
        throw Error("emitter '" + e.id + "': band noise requires bandwidth > 0");
    }
    if (e.kind == EmitterKind::SweepingBandNoise && !e.sweep)
        throw Error("emitter '" + e.id + "': sweeping emitter requires a sweep plan");
    if (e.sweep) {
        if (e.sweep->start_freq > e.sweep->stop_freq)
            throw Error("emitter '" + e.id + "': sweep start above stop");
        if (!(e.sweep->step > 0.0)) throw Error("emitter '" + e.id + "': sweep step must be > 0");
        if (!(e.sweep->dwell > 0.0)) throw Error("emitter '" + e.id + "': sweep dwell must be > 0");
    }
    if (e.active.stop < e.active.start) throw Error("emitter '" + e.id + "': empty active interval");
}

void validate(const FrontEndConfig& fe)
{
    if (!(fe.sample_rate > 0.0)) throw Error("front end: sample_rate must be > 0");
    if (!(fe.max_instantaneous_bw > 0.0) || fe.max_instantaneous_bw > fe.sample_rate)
        throw Error("front end: max_instantaneous_bw must be in (0, sample_rate]");
    if (fe.tune_delay < 0.0) throw Error("front end: tune_delay must be >= 0");
    if (fe.noise_floor_power < 0.0) throw Error("front end: noise_floor_power must be >= 0");
}

void validate(const Environment& env)
{
    validate(env.frontend);
    std::set<std::string> ids;
    for (const auto& e : env.emitters) {
        validate(e);
        if (!ids.insert(e.id).second) throw Error("duplicate emitter id '" + e.id + "'");
    }
}

bool emitter_active(const Emitter& e, double t)
{
    return t >= e.active.start && t <= e.active.stop;
}

double current_center(const Emitter& e, double t)
{
    if (!e.sweep) return e.center_freq;
    const auto& sw = *e.sweep;
    const double elapsed = std::max(0.0, t - e.active.start);
    const double steps = std::floor(elapsed / sw.dwell);
    return std::min(sw.start_freq + steps * sw.step, sw.stop_freq);
}

IqBuffer capture(const Environment& env, double center_freq, double duration, double at_time)
{
    validate(env);
    const auto& fe = env.frontend;
    if (!(duration > 0.0)) throw Error("capture: duration must be > 0");
    if (duration <= fe.tune_delay) throw Error("empty capture");
    const double fs = fe.sample_rate;
    const auto total = static_cast<std::int64_t>(std::llround(duration * fs));
    const auto dropped = static_cast<std::int64_t>(std::llround(fe.tune_delay * fs));
    const std::int64_t n = total - dropped;
    if (n < 1) throw Error("empty capture");

    IqBuffer buf;
    buf.center_freq = center_freq;
    buf.sample_rate = fs;
    buf.start_time = at_time + static_cast<double>(dropped) / fs;
    buf.samples.assign(static_cast<std::size_t>(n), cplx{});

    for (const auto& e : env.emitters) {
        if (e.power == 0.0) continue;
        const auto segments = active_segments(e, buf.start_time, fs, n);
        for (std::size_t i = 0; i < segments.size(); ++i) {
            const auto& seg = segments[i];
            const double offset = seg.center - center_freq;
            if (e.kind == EmitterKind::Tone) {
                if (std::abs(offset) <= fe.max_instantaneous_bw / 2.0) add_tone(buf.samples, seg, offset, e.power, fs);
                continue;
            }
            auto rng = SeedMixer(env.rng_seed)
                           .add(e.id)
                           .add(center_freq)
                           .add(at_time)
                           .add(duration)
                           .add(static_cast<std::uint64_t>(i))
                           .engine_as<Engine>();
            add_band_noise(buf.samples, seg, offset, e.bandwidth, e.power, fs, fe.max_instantaneous_bw,
                           std::move(rng));
        }
    }

    if (fe.noise_floor_power > 0.0) {
        auto rng = SeedMixer(env.rng_seed).add("front-end noise").add(center_freq).add(at_time).add(duration).engine_as<Engine>();
        Gauss gauss(0.0, std::sqrt(fe.noise_floor_power / 2.0));
        for (auto& x : buf.samples) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            x += cplx(re, im);
        }
    }
    return buf;
}

}  // namespace dsa
