#include "dsa/energy_sensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "fft.hpp"

namespace dsa {
namespace {

// ceil(x) that ignores representation noise just above an integer.
std::size_t ceil_ratio(double num, double den)
{
    const double r = num / den;
    const double nearest = std::round(r);
    if (std::abs(r - nearest) <= 1e-9 * std::max(1.0, nearest)) return static_cast<std::size_t>(nearest);
    return static_cast<std::size_t>(std::ceil(r));
}

}  // namespace

void validate(const SensorConfig& cfg)
{
    if (!(cfg.usrp_rate > 0.0)) throw Error("sensor: usrp_rate must be > 0");
    if (!(cfg.channel_bandwidth > 0.0)) throw Error("sensor: channel_bandwidth must be > 0");
    if (cfg.avg_vectors < 1) throw Error("sensor: avg_vectors must be >= 1");
}

FftLayout fft_layout(const SensorConfig& cfg)
{
    validate(cfg);
    if (cfg.channel_bandwidth > cfg.usrp_rate) throw Error("fewer than one bin");
    FftLayout l;
    l.fft_size = ceil_ratio(cfg.usrp_rate, cfg.channel_bandwidth);
    l.bin_start = (l.fft_size + 7) / 8;
    if (l.fft_size <= 2 * l.bin_start) throw Error("fft layout leaves no usable bins");
    l.bin_stop = l.fft_size - l.bin_start;
    l.usable_bins = l.bin_stop - l.bin_start;
    return l;
}

double chunk_bandwidth(const SensorConfig& cfg)
{
    return static_cast<double>(fft_layout(cfg).usable_bins) * cfg.channel_bandwidth;
}

double dwell_time(const SensorConfig& cfg, const FrontEndConfig& fe)
{
    const auto layout = fft_layout(cfg);
    return fe.tune_delay + static_cast<double>(cfg.avg_vectors * layout.fft_size) / cfg.usrp_rate;
}

std::size_t dwell_count(const SensorConfig& cfg, const Band& band)
{
    if (!(band.high > band.low)) throw Error("sweep: band high must exceed low");
    return ceil_ratio(band.width(), chunk_bandwidth(cfg));
}

std::vector<double> blackman_harris(std::size_t n)
{
    if (n == 0) throw Error("blackman_harris: window length must be >= 1");
    if (n == 1) return {1.0};
    constexpr double a0 = 0.35875, a1 = 0.48829, a2 = 0.14128, a3 = 0.01168;
    std::vector<double> w(n);
    const double denom = static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
        const double x = 2.0 * std::numbers::pi * static_cast<double>(k) / denom;
        w[k] = a0 - a1 * std::cos(x) + a2 * std::cos(2.0 * x) - a3 * std::cos(3.0 * x);
    }
    // Exact mirror so symmetry holds bit for bit.
    for (std::size_t k = 0; k < n / 2; ++k) w[n - 1 - k] = w[k];
    return w;
}

double to_db(double energy)
{
    return 10.0 * std::log10(energy + 1e-30);
}

EnergyMap sense_dwell(const IqBuffer& buf, const SensorConfig& cfg)
{
    const auto layout = fft_layout(cfg);
    if (buf.sample_rate != cfg.usrp_rate) throw Error("sense_dwell: buffer sample rate does not match sensor");
    const std::size_t n = layout.fft_size;
    if (buf.samples.size() < cfg.avg_vectors * n) throw Error("insufficient dwell");

    const auto window = blackman_harris(n);
    std::vector<double> acc(n, 0.0);
    std::vector<std::complex<double>> vec(n);
    for (std::size_t v = 0; v < cfg.avg_vectors; ++v) {
        const auto* src = buf.samples.data() + v * n;
        for (std::size_t k = 0; k < n; ++k) vec[k] = src[k] * window[k];
        detail::fft_inplace(vec, detail::FftDirection::Forward);
        for (std::size_t k = 0; k < n; ++k) acc[k] += std::norm(vec[k]);
    }

    const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(cfg.avg_vectors));
    const std::size_t half = n / 2;
    EnergyMap map;
    map.entries.reserve(layout.usable_bins);
    for (std::size_t j = layout.bin_start; j < layout.bin_stop; ++j) {
        // j indexes the DC-centered spectrum; map back to natural FFT order.
        const std::size_t k = (j + n - half) % n;
        const double e = acc[k] * scale;
        const double f = buf.center_freq + (static_cast<double>(j) - static_cast<double>(half)) * cfg.channel_bandwidth;
        map.entries.push_back({f, e, to_db(e)});
    }
    map.band = {buf.center_freq - static_cast<double>(half - layout.bin_start) * cfg.channel_bandwidth,
                buf.center_freq + static_cast<double>(layout.bin_stop - half) * cfg.channel_bandwidth};
    map.sensed_at = buf.start_time;
    map.sensing_time = static_cast<double>(cfg.avg_vectors * n) / cfg.usrp_rate;
    return map;
}

EnergyMap sweep(const Environment& env, const Band& band, const SensorConfig& cfg, double at_time)
{
    const auto layout = fft_layout(cfg);
    const std::size_t dwells = dwell_count(cfg, band);
    const double chunk = chunk_bandwidth(cfg);
    const double fs = env.frontend.sample_rate;
    if (fs != cfg.usrp_rate) throw Error("sweep: front-end sample rate does not match sensor");
    const double per_dwell = dwell_time(cfg, env.frontend);
    const double dropped = std::round(env.frontend.tune_delay * fs);
    const double duration = (dropped + static_cast<double>(cfg.avg_vectors * layout.fft_size)) / fs;
    const double lead = static_cast<double>(layout.fft_size / 2 - layout.bin_start) * cfg.channel_bandwidth;

    EnergyMap out;
    out.band = band;
    out.sensed_at = at_time;
    out.entries.reserve(dwells * layout.usable_bins);
    for (std::size_t i = 0; i < dwells; ++i) {
        const double center = band.low + static_cast<double>(i) * chunk + lead;
        const auto buf = capture(env, center, duration, at_time + static_cast<double>(i) * per_dwell);
        const auto part = sense_dwell(buf, cfg);
        for (const auto& e : part.entries) {
            if (e.carrier_freq >= band.high) break;
            out.entries.push_back(e);
        }
    }
    out.sensing_time = static_cast<double>(dwells) * per_dwell;
    return out;
}

EnergyEntry min_energy_frequency(const EnergyMap& map, std::span<const double> exclude)
{
    std::vector<double> ex(exclude.begin(), exclude.end());
    std::sort(ex.begin(), ex.end());
    const EnergyEntry* best = nullptr;
    for (const auto& e : map.entries) {
        if (!ex.empty() && std::binary_search(ex.begin(), ex.end(), e.carrier_freq)) continue;
        if (best == nullptr || e.energy < best->energy ||
            (e.energy == best->energy && e.carrier_freq < best->carrier_freq)) {
            best = &e;
        }
    }
    if (best == nullptr) throw Error("min_energy_frequency: empty map after exclusion");
    return *best;
}

void write_csv(std::ostream& os, const EnergyMap& map)
{
    os << "carrier_hz,energy,energy_db\n";
    for (const auto& e : map.entries)
        os << format_number(e.carrier_freq) << ',' << format_number(e.energy) << ',' << format_number(e.energy_db)
           << '\n';
}

}  // namespace dsa
