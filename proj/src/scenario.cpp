#include "dsa/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <thread>

namespace dsa {
namespace {

std::uint64_t derive(std::uint64_t seed, std::string_view tag, std::uint64_t a = 0, double b = 0.0)
{
    return SeedMixer(seed).add(tag).add(a).add(b).engine()();
}

// Runs fn(i) for i in [0, n), results land at index i regardless of which
// worker finished first.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, Fn fn)
{
    std::vector<T> out(n);
    const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n && !failed; i = next++) {
                    try {
                        out[i] = fn(i);
                    } catch (...) {
                        if (!failed.exchange(true)) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

Emitter make_pu(const PuConfig& pu, std::string id, double center, double start)
{
    Emitter e;
    e.id = std::move(id);
    e.kind = EmitterKind::BandNoise;
    e.center_freq = center;
    e.bandwidth = pu.bandwidth;
    e.power = pu.power;
    e.active = {start, 1e30};
    return e;
}

struct GridPoint {
    std::optional<double> offset;  // empty: no primary user
};

std::vector<GridPoint> grid(const ScenarioConfig& cfg)
{
    std::vector<GridPoint> pts;
    if (!cfg.pu_sweep) {
        pts.push_back({std::nullopt});
        return pts;
    }
    for (double off : cfg.pu_sweep->offsets()) pts.push_back({off});
    return pts;
}

std::int64_t packets_per_point(const ScenarioConfig& cfg)
{
    return cfg.pu_sweep ? cfg.pu_sweep->packets_per_point : cfg.link.total_packets;
}

SweepRow make_row(std::uint64_t seed, const GridPoint& p, const LinkStats& s)
{
    SweepRow r;
    r.seed = seed;
    r.pu_offset = p.offset.value_or(std::numeric_limits<double>::infinity());
    r.spectral_distance = std::abs(r.pu_offset);
    r.psr = s.psr;
    r.prr = s.prr;
    r.dropped_sensing = static_cast<double>(s.dropped_sensing);
    return r;
}

std::vector<SweepRow> average_rows(const std::vector<SweepRow>& per_seed, std::size_t points, std::size_t seeds)
{
    std::vector<SweepRow> avg(points);
    for (std::size_t p = 0; p < points; ++p) {
        auto& a = avg[p];
        a.pu_offset = per_seed[p].pu_offset;
        a.spectral_distance = per_seed[p].spectral_distance;
        for (std::size_t s = 0; s < seeds; ++s) {
            const auto& r = per_seed[s * points + p];
            a.psr += r.psr;
            a.prr += r.prr;
            a.dropped_sensing += r.dropped_sensing;
            a.sensing_time += r.sensing_time;
            a.rendezvous += r.rendezvous;
            a.rendezvous_failures += r.rendezvous_failures;
        }
        const double n = static_cast<double>(seeds);
        a.psr /= n;
        a.prr /= n;
        a.dropped_sensing /= n;
        a.sensing_time /= n;
        a.rendezvous /= n;
        a.rendezvous_failures /= n;
    }
    return avg;
}

Environment environment_for(const ScenarioConfig& cfg, std::uint64_t seed)
{
    Environment env = cfg.environment;
    env.rng_seed = derive(seed, "environment");
    return env;
}

std::vector<Band> sensing_bands(const ScenarioConfig& cfg)
{
    if (const auto* d = std::get_if<DsaMode>(&cfg.mode)) return d->bands;
    return cfg.dsa_mode.bands;
}

// Band around `f` one chunk wide, clipped to the configured band holding f.
Band local_band(const ScenarioConfig& cfg, double f)
{
    const double half = chunk_bandwidth(cfg.sensor) / 2.0;
    Band b{f - half, f + half};
    for (const auto& band : sensing_bands(cfg)) {
        if (!band.contains(f)) continue;
        Band clipped{std::max(b.low, band.low), std::min(b.high, band.high)};
        if (clipped.width() >= cfg.sensor.channel_bandwidth) return clipped;
        return band;
    }
    return b;
}

ControlChannel channel_for(const ScenarioConfig& cfg, std::uint64_t seed, std::uint64_t round)
{
    ControlChannel ch = cfg.channel;
    ch.rng_seed = derive(seed, "control", round);
    return ch;
}

RendezvousReport initial_round(const ScenarioConfig& cfg, std::uint64_t seed)
{
    const Environment env = environment_for(cfg, seed);
    const auto sensor = make_sweep_sensor(env, sensing_bands(cfg), cfg.sensor);
    RxState rx;
    rx.timing = cfg.protocol.timing;
    TxState tx;
    tx.timing = cfg.protocol.timing;
    return rendezvous(rx, tx, sensor, channel_for(cfg, seed, 0), SimTime::zero());
}

std::size_t dwells_per_sweep(const ScenarioConfig& cfg, const std::vector<Band>& bands)
{
    std::size_t n = 0;
    for (const auto& b : bands) n += dwell_count(cfg.sensor, b);
    return n;
}

DsaSession run_session(const ScenarioConfig& cfg, std::uint64_t seed, std::optional<double> pu_offset,
                       std::int64_t packets, const RendezvousReport& first)
{
    DsaSession out;
    const Environment background = environment_for(cfg, seed);
    const auto& timing = cfg.protocol.timing;
    const SimTime period = from_seconds(cfg.protocol.resense_period);
    const SimTime latency = from_seconds(cfg.reaction_latency());
    const SimTime spacing = from_seconds(cfg.link.inter_packet_time);
    const double su_half = cfg.link.su_channel_bandwidth / 2.0;

    ++out.rendezvous;
    out.sensing_time += to_seconds(first.sensing_time);
    out.dwells += first.sweeps * dwells_per_sweep(cfg, sensing_bands(cfg));
    if (cfg.trace) out.trace = first.trace;

    if (!first.converged) {
        ++out.rendezvous_failures;
        for (std::int64_t k = 0; k < packets; ++k)
            out.link.records.push_back({k, k * spacing, PacketOutcome::NotReceived});
        out.link.stats = summarize(out.link.records);
        return out;
    }

    // Data starts when the transmitter starts; until the receiver listens the
    // packets are lost to the rendezvous window.
    const SimTime start = first.tx_done;
    const SimTime end = start + packets * spacing;
    double freq = first.result.freq;
    out.su_freq.changes.push_back({start, freq});
    if (first.rx_done > start) out.sensing_windows.push_back({start, first.rx_done});

    auto retarget_pu = [&](SimTime converged_at) {
        if (!pu_offset || !cfg.pu.enabled) return;
        const SimTime on = converged_at + latency;
        if (!out.pu_segments.empty()) out.pu_segments.back().active.stop = to_seconds(on - SimTime{1});
        out.pu_segments.push_back(
            make_pu(cfg.pu, "pu-" + std::to_string(out.pu_segments.size()), freq + *pu_offset, to_seconds(on)));
    };
    retarget_pu(std::max(first.rx_done, first.tx_done));

    std::uint64_t rx_seq = first.rx.next_seq;
    std::uint64_t tx_seq = first.tx.next_seq;
    std::uint64_t round = 1;
    SimTime monitor = first.rx_done + period;
    while (monitor < end) {
        Environment env = background;
        env.emitters.insert(env.emitters.end(), out.pu_segments.begin(), out.pu_segments.end());

        const double half_chunk = chunk_bandwidth(cfg.sensor) / 2.0;
        const auto map = sweep(env, {freq - half_chunk, freq + half_chunk}, cfg.sensor, to_seconds(monitor));
        const SimTime sensed = monitor + from_seconds(map.sensing_time);
        out.sensing_time += map.sensing_time;
        out.dwells += 1;

        const bool occupied = std::any_of(map.entries.begin(), map.entries.end(), [&](const EnergyEntry& e) {
            return std::abs(e.carrier_freq - freq) <= su_half && e.energy > timing.threshold;
        });
        if (!occupied) {
            out.sensing_windows.push_back({monitor, sensed});
            monitor += period;
            continue;
        }

        const Band local = local_band(cfg, freq);
        const auto sensor = make_sweep_sensor(env, {local}, cfg.sensor);
        RxState rx{RxPhase::Sensing, freq, rx_seq, timing};
        TxState tx{TxPhase::AwaitingFreq, freq, tx_seq, false, timing};
        const auto rep = rendezvous(rx, tx, sensor, channel_for(cfg, seed, round++), sensed);
        rx_seq = rep.rx.next_seq;
        tx_seq = rep.tx.next_seq;
        ++out.rendezvous;
        out.sensing_time += to_seconds(rep.sensing_time);
        out.dwells += rep.sweeps * dwell_count(cfg.sensor, local);
        if (cfg.trace) out.trace.insert(out.trace.end(), rep.trace.begin(), rep.trace.end());

        const SimTime settled = std::max(rep.rx_done, rep.tx_done);
        out.sensing_windows.push_back({monitor, settled});
        if (rep.converged) {
            freq = rep.result.freq;
            out.su_freq.changes.push_back({rep.tx_done, freq});
            retarget_pu(settled);
        } else {
            // The pair falls back to the carrier it already shares.
            ++out.rendezvous_failures;
        }
        monitor = settled + period;
    }

    std::vector<Emitter> emitters = background.emitters;
    emitters.insert(emitters.end(), out.pu_segments.begin(), out.pu_segments.end());
    auto rng = SeedMixer(seed).add("link").add(pu_offset.value_or(-1.0)).engine();
    out.link = run_link({start, spacing, packets}, out.su_freq, out.sensing_windows, emitters, cfg.link, rng);
    return out;
}

}  // namespace

std::vector<double> PuSweep::offsets() const
{
    if (!(step > 0.0)) throw Error("pu_sweep: step must be > 0");
    if (stop_offset < start_offset) throw Error("pu_sweep: stop below start");
    const auto n = static_cast<std::int64_t>(std::floor((stop_offset - start_offset) / step + 1e-9));
    std::vector<double> out;
    for (std::int64_t i = 0; i <= n; ++i) out.push_back(std::round(start_offset + static_cast<double>(i) * step));
    return out;
}

double ScenarioConfig::reaction_latency() const
{
    return pu.reaction_latency.value_or(2.0 * protocol.resense_period);
}

void validate(const ScenarioConfig& cfg)
{
    validate(cfg.environment);
    fft_layout(cfg.sensor);
    if (cfg.sensor.usrp_rate != cfg.environment.frontend.sample_rate)
        throw Error("config: sensor usrp_rate must equal the front-end sample rate");
    validate(cfg.protocol.timing);
    if (!(cfg.protocol.resense_period > 0.0)) throw Error("config: resense_period must be > 0");
    validate(cfg.channel);
    validate(cfg.link);
    if (!(cfg.pu.bandwidth > 0.0) || cfg.pu.power < 0.0) throw Error("config: invalid primary user");
    if (cfg.reaction_latency() < 0.0) throw Error("config: reaction latency must be >= 0");
    if (const auto* d = std::get_if<DsaMode>(&cfg.mode); d && d->bands.empty())
        throw Error("config: dsa mode requires at least one band");
    for (const auto& b : cfg.dsa_mode.bands)
        if (!(b.high > b.low)) throw Error("config: band high must exceed low");
    for (const auto& b : cfg.scan_bands)
        if (!(b.high > b.low)) throw Error("config: band high must exceed low");
    if (cfg.pu_sweep) {
        cfg.pu_sweep->offsets();
        if (cfg.pu_sweep->packets_per_point < 0) throw Error("config: packets_per_point must be >= 0");
    }
    if (cfg.seeds.empty()) throw Error("config: seeds must be nonempty");
}

ScenarioConfig default_config()
{
    ScenarioConfig cfg;
    // Office background: two wideband occupants in the 2.4 GHz band.
    Emitter wifi_a;
    wifi_a.id = "wlan-2440";
    wifi_a.kind = EmitterKind::BandNoise;
    wifi_a.center_freq = 2440e6;
    wifi_a.bandwidth = 20e6;
    wifi_a.power = 0.3;
    Emitter wifi_b = wifi_a;
    wifi_b.id = "wlan-2482";
    wifi_b.center_freq = 2482.5e6;
    wifi_b.bandwidth = 15e6;
    cfg.environment.emitters = {wifi_a, wifi_b};

    cfg.protocol.timing.exclusion_halfwidth = cfg.link.su_channel_bandwidth / 2.0;
    cfg.channel.delay = SimTime{2'000'000};
    cfg.dsa_mode.bands = {{2400e6, 2480e6}, {866.5e6, 869.5e6}};
    cfg.mode = cfg.dsa_mode;
    cfg.scan_bands = {{2400e6, 2500e6}, {850e6, 950e6}};
    cfg.pu_sweep = PuSweep{};
    for (std::uint64_t s = 1; s <= 20; ++s) cfg.seeds.push_back(s);
    return cfg;
}

DsaSession simulate_dsa_session(const ScenarioConfig& cfg, std::uint64_t seed, std::optional<double> pu_offset,
                                std::int64_t packets)
{
    validate(cfg);
    return run_session(cfg, seed, pu_offset, packets, initial_round(cfg, seed));
}

LinkRun simulate_static_session(const ScenarioConfig& cfg, std::uint64_t seed, std::optional<double> pu_offset,
                                std::int64_t packets)
{
    const double carrier = std::holds_alternative<StaticMode>(cfg.mode) ? std::get<StaticMode>(cfg.mode).carrier_freq
                                                                         : cfg.static_mode.carrier_freq;
    std::vector<Emitter> emitters = cfg.environment.emitters;
    if (pu_offset && cfg.pu.enabled) emitters.push_back(make_pu(cfg.pu, "pu-0", carrier + *pu_offset, 0.0));
    FrequencyTrace trace;
    trace.changes.push_back({SimTime::zero(), carrier});
    auto rng = SeedMixer(seed).add("link").add(pu_offset.value_or(-1.0)).engine();
    return run_link({SimTime::zero(), from_seconds(cfg.link.inter_packet_time), packets}, trace, {}, emitters,
                    cfg.link, rng);
}

std::vector<std::filesystem::path> run_scan(const ScenarioConfig& cfg, const std::filesystem::path& out_dir)
{
    validate(cfg);
    std::filesystem::create_directories(out_dir);
    const Environment env = environment_for(cfg, cfg.seeds.front());
    std::vector<std::filesystem::path> files;
    for (const auto& band : cfg.scan_bands) {
        const auto map = sweep(env, band, cfg.sensor, 0.0);
        const auto path =
            out_dir / ("scan_" + format_number(band.low) + "_" + format_number(band.high) + ".csv");
        std::ofstream os(path, std::ios::binary);
        if (!os) throw Error("scan: cannot write " + path.string());
        write_csv(os, map);
        if (!os) throw Error("scan: write failed for " + path.string());
        files.push_back(path);
    }
    return files;
}

SweepResult run_static(const ScenarioConfig& cfg)
{
    validate(cfg);
    const auto pts = grid(cfg);
    const auto packets = packets_per_point(cfg);
    const std::size_t n = pts.size() * cfg.seeds.size();
    SweepResult res;
    res.per_seed = parallel_map<SweepRow>(n, [&](std::size_t i) {
        const auto seed = cfg.seeds[i / pts.size()];
        const auto& p = pts[i % pts.size()];
        return make_row(seed, p, simulate_static_session(cfg, seed, p.offset, packets).stats);
    });
    res.averaged = average_rows(res.per_seed, pts.size(), cfg.seeds.size());
    return res;
}

SweepResult run_dsa(const ScenarioConfig& cfg)
{
    validate(cfg);
    const auto pts = grid(cfg);
    const auto packets = packets_per_point(cfg);
    // The environment before the PU reacts does not depend on the grid point.
    const auto firsts = parallel_map<RendezvousReport>(cfg.seeds.size(),
                                                       [&](std::size_t s) { return initial_round(cfg, cfg.seeds[s]); });
    const std::size_t n = pts.size() * cfg.seeds.size();
    auto sessions = parallel_map<std::pair<SweepRow, RunTrace>>(n, [&](std::size_t i) {
        const std::size_t s = i / pts.size();
        const auto& p = pts[i % pts.size()];
        auto sess = run_session(cfg, cfg.seeds[s], p.offset, packets, firsts[s]);
        SweepRow row = make_row(cfg.seeds[s], p, sess.link.stats);
        row.sensing_time = sess.sensing_time;
        row.rendezvous = static_cast<double>(sess.rendezvous);
        row.rendezvous_failures = static_cast<double>(sess.rendezvous_failures);
        return std::make_pair(row, RunTrace{cfg.seeds[s], row.pu_offset, std::move(sess.trace)});
    });
    SweepResult res;
    for (auto& [row, tr] : sessions) {
        res.per_seed.push_back(row);
        if (cfg.trace) res.traces.push_back(std::move(tr));
    }
    res.averaged = average_rows(res.per_seed, pts.size(), cfg.seeds.size());
    return res;
}

void write_summary_csv(std::ostream& os, const std::vector<SweepRow>& rows)
{
    os << "spectral_distance_hz,psr,prr,dropped_sensing\n";
    for (const auto& r : rows)
        os << format_number(r.spectral_distance) << ',' << format_number(r.psr) << ',' << format_number(r.prr) << ','
           << format_number(r.dropped_sensing) << '\n';
}

void write_per_seed_csv(std::ostream& os, const std::vector<SweepRow>& rows)
{
    os << "seed,pu_offset_hz,spectral_distance_hz,psr,prr,dropped_sensing,sensing_time_s,rendezvous,"
          "rendezvous_failures\n";
    for (const auto& r : rows)
        os << r.seed << ',' << format_number(r.pu_offset) << ',' << format_number(r.spectral_distance) << ','
           << format_number(r.psr) << ',' << format_number(r.prr) << ',' << format_number(r.dropped_sensing) << ','
           << format_number(r.sensing_time) << ',' << format_number(r.rendezvous) << ','
           << format_number(r.rendezvous_failures) << '\n';
}

void print_table(std::ostream& os, std::string_view title, const std::vector<SweepRow>& rows)
{
    os << title << '\n';
    os << "  offset_MHz  distance_MHz     PSR     PRR  dropped\n";
    const auto flags = os.flags();
    os << std::fixed;
    for (const auto& r : rows) {
        os << std::setprecision(2) << std::setw(12) << r.pu_offset / 1e6 << std::setw(14) << r.spectral_distance / 1e6
           << std::setprecision(3) << std::setw(8) << r.psr << std::setw(8) << r.prr << std::setprecision(1)
           << std::setw(9) << r.dropped_sensing << '\n';
    }
    os.flags(flags);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("report: cannot write " + path.string());
    return os;
}

}  // namespace

void emit_report(const SweepResult& result, const std::filesystem::path& out_dir, std::string_view name,
                 std::ostream& table)
{
    std::filesystem::create_directories(out_dir);
    {
        auto os = open_out(out_dir / (std::string(name) + "_summary.csv"));
        write_summary_csv(os, result.averaged);
    }
    {
        auto os = open_out(out_dir / (std::string(name) + "_per_seed.csv"));
        write_per_seed_csv(os, result.per_seed);
    }
    if (!result.traces.empty()) {
        std::filesystem::create_directories(out_dir / "traces");
        for (const auto& tr : result.traces) {
            auto os = open_out(out_dir / "traces" /
                               (std::string(name) + "_seed" + std::to_string(tr.seed) + "_offset" +
                                format_number(tr.pu_offset) + ".csv"));
            write_trace(os, tr.records);
        }
    }
    print_table(table, std::string(name) + " (seed-averaged)", result.averaged);
}

void emit_comparison(const SweepResult& static_result, const SweepResult& dsa_result,
                     const std::filesystem::path& out_dir, std::ostream& table)
{
    if (static_result.averaged.size() != dsa_result.averaged.size())
        throw Error("compare: static and dsa grids differ");
    std::filesystem::create_directories(out_dir);
    auto os = open_out(out_dir / "compare.csv");
    os << "pu_offset_hz,spectral_distance_hz,static_psr,dsa_psr,improvement\n";
    table << "static vs dsa (seed-averaged PSR)\n";
    table << "  offset_MHz  distance_MHz  static     dsa  improvement\n";
    const auto flags = table.flags();
    table << std::fixed;
    for (std::size_t i = 0; i < static_result.averaged.size(); ++i) {
        const auto& s = static_result.averaged[i];
        const auto& d = dsa_result.averaged[i];
        os << format_number(s.pu_offset) << ',' << format_number(s.spectral_distance) << ',' << format_number(s.psr)
           << ',' << format_number(d.psr) << ',' << format_number(d.psr - s.psr) << '\n';
        table << std::setprecision(2) << std::setw(12) << s.pu_offset / 1e6 << std::setw(14)
              << s.spectral_distance / 1e6 << std::setprecision(3) << std::setw(8) << s.psr << std::setw(8) << d.psr
              << std::setw(13) << d.psr - s.psr << '\n';
    }
    table.flags(flags);
}

}  // namespace dsa
