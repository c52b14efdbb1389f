#include "dsa/link_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace dsa {

void validate(const LinkConfig& cfg)
{
    if (cfg.packet_size <= 0) throw Error("link: packet_size must be > 0");
    if (!(cfg.data_rate > 0.0) || !(cfg.fallback_data_rate > 0.0)) throw Error("link: data rates must be > 0");
    if (cfg.total_packets < 0) throw Error("link: total_packets must be >= 0");
    if (cfg.inter_packet_time < airtime(cfg, 0.0)) throw Error("link: inter_packet_time shorter than airtime");
    if (!(cfg.su_channel_bandwidth > 0.0)) throw Error("link: su_channel_bandwidth must be > 0");
    if (!(cfg.sinr_capture_db > -cfg.detect_margin_db))
        throw Error("link: sinr_capture_db must exceed -detect_margin_db");
    if (!(cfg.logistic_slope_db > 0.0)) throw Error("link: logistic slope must be > 0");
    if (cfg.su_signal_power < 0.0 || cfg.noise_power < 0.0) throw Error("link: powers must be >= 0");
}

double airtime(const LinkConfig& cfg, double su_freq)
{
    const double rate = cfg.fallback_band.contains(su_freq) ? cfg.fallback_data_rate : cfg.data_rate;
    return cfg.packet_size * 8.0 / rate;
}

std::string_view to_string(PacketOutcome o)
{
    switch (o) {
    case PacketOutcome::CrcValid: return "CrcValid";
    case PacketOutcome::CrcError: return "CrcError";
    case PacketOutcome::NotReceived: return "NotReceived";
    case PacketOutcome::DroppedDuringSensing: return "DroppedDuringSensing";
    }
    return "?";
}

LinkStats summarize(std::span<const PacketRecord> records)
{
    LinkStats s;
    for (const auto& r : records) {
        ++s.sent;
        switch (r.outcome) {
        case PacketOutcome::CrcValid: ++s.crc_valid; ++s.received; break;
        case PacketOutcome::CrcError: ++s.received; break;
        case PacketOutcome::DroppedDuringSensing: ++s.dropped_sensing; break;
        case PacketOutcome::NotReceived: break;
        }
    }
    if (s.sent > 0) {
        s.psr = static_cast<double>(s.crc_valid) / static_cast<double>(s.sent);
        s.prr = static_cast<double>(s.received) / static_cast<double>(s.sent);
    }
    return s;
}

double overlap_fraction(double su_freq, double su_bandwidth, const Interferer& pu)
{
    const double lo = su_freq - su_bandwidth / 2.0;
    const double hi = su_freq + su_bandwidth / 2.0;
    if (pu.bandwidth <= 0.0) return (pu.center_freq >= lo && pu.center_freq <= hi) ? 1.0 : 0.0;
    const double a = std::max(lo, pu.center_freq - pu.bandwidth / 2.0);
    const double b = std::min(hi, pu.center_freq + pu.bandwidth / 2.0);
    return b > a ? (b - a) / su_bandwidth : 0.0;
}

double sinr_db(double su_freq, std::span<const Interferer> pus, const LinkConfig& cfg)
{
    double interference = 0.0;
    for (const auto& p : pus) interference += p.power * p.power * overlap_fraction(su_freq, cfg.su_channel_bandwidth, p);
    const double denom = cfg.noise_power + interference;
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(cfg.su_signal_power / denom);
}

PacketOutcome packet_outcome(double su_freq, std::span<const Interferer> pus, const LinkConfig& cfg,
                             std::mt19937_64& rng)
{
    const double s = sinr_db(su_freq, pus, cfg);
    if (s >= cfg.sinr_capture_db) return PacketOutcome::CrcValid;
    if (s < -cfg.detect_margin_db) return PacketOutcome::NotReceived;
    const double mid = (cfg.sinr_capture_db - cfg.detect_margin_db) / 2.0;
    const double p_valid = 1.0 / (1.0 + std::pow(10.0, -(s - mid) / cfg.logistic_slope_db));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    return uni(rng) < p_valid ? PacketOutcome::CrcValid : PacketOutcome::CrcError;
}

double FrequencyTrace::at(SimTime t) const
{
    if (changes.empty()) throw Error("frequency trace is empty");
    auto it = std::upper_bound(changes.begin(), changes.end(), t,
                               [](SimTime v, const auto& c) { return v < c.first; });
    if (it == changes.begin()) return changes.front().second;
    return std::prev(it)->second;
}

LinkRun run_link(const PacketSchedule& schedule, const FrequencyTrace& su_freq, std::vector<Interval> sensing,
                 std::span<const Emitter> emitters, const LinkConfig& cfg, std::mt19937_64& rng)
{
    validate(cfg);
    std::sort(sensing.begin(), sensing.end(), [](const Interval& a, const Interval& b) { return a.begin < b.begin; });
    std::vector<Interval> merged;
    for (const auto& iv : sensing) {
        if (iv.end <= iv.begin) continue;
        if (!merged.empty() && iv.begin <= merged.back().end)
            merged.back().end = std::max(merged.back().end, iv.end);
        else
            merged.push_back(iv);
    }

    LinkRun run;
    run.records.reserve(static_cast<std::size_t>(schedule.count));
    std::vector<Interferer> active;
    for (std::int64_t k = 0; k < schedule.count; ++k) {
        const SimTime sent = schedule.start + k * schedule.spacing;
        const double f = su_freq.at(sent);
        const SimTime end = sent + from_seconds(airtime(cfg, f));
        PacketRecord rec{k, sent, PacketOutcome::NotReceived};

        auto it = std::lower_bound(merged.begin(), merged.end(), end,
                                   [](const Interval& iv, SimTime v) { return iv.begin < v; });
        if (it != merged.begin() && std::prev(it)->end > sent) {
            rec.outcome = PacketOutcome::DroppedDuringSensing;
            run.records.push_back(rec);
            continue;
        }

        active.clear();
        const double t0 = to_seconds(sent);
        const double t1 = to_seconds(end);
        for (const auto& e : emitters) {
            if (e.active.start > t1 || e.active.stop < t0) continue;
            active.push_back({current_center(e, t0), e.bandwidth, e.power});
        }
        rec.outcome = packet_outcome(f, active, cfg, rng);
        run.records.push_back(rec);
    }
    run.stats = summarize(run.records);
    return run;
}

void write_records_csv(std::ostream& os, std::span<const PacketRecord> records)
{
    os << "seq,sent_at,outcome\n";
    for (const auto& r : records)
        os << r.seq << ',' << format_number(to_seconds(r.sent_at)) << ',' << to_string(r.outcome) << '\n';
}

void write_stats_csv(std::ostream& os, const LinkStats& s)
{
    os << "sent,received,crc_valid,psr,prr\n";
    os << s.sent << ',' << s.received << ',' << s.crc_valid << ',' << format_number(s.psr) << ','
       << format_number(s.prr) << '\n';
}

}  // namespace dsa
