#pragma once

// Packet-level data plane between the secondary transmitter and receiver.
// Packets are scored, not synthesized: interference is the in-channel share
// of each active emitter's power, and delivery follows from the SINR.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "dsa/common.hpp"
#include "dsa/rf_env.hpp"

namespace dsa {

struct LinkConfig {
    int packet_size = 133;             // bytes
    double inter_packet_time = 0.05;   // s
    int total_packets = 7519;
    double data_rate = 250e3;          // bit/s
    double su_channel_bandwidth = 5e5; // Hz
    double sinr_capture_db = 3.0;
    double detect_margin_db = 5.0;
    double su_signal_power = 1.0;
    double noise_power = 1e-6;
    double logistic_slope_db = 2.0;    // dB of SINR per decade of success odds
    double fallback_data_rate = 20e3;  // used inside fallback_band
    Band fallback_band{863e6, 928e6};
};

void validate(const LinkConfig& cfg);

double airtime(const LinkConfig& cfg, double su_freq);

enum class PacketOutcome { CrcValid, CrcError, NotReceived, DroppedDuringSensing };

std::string_view to_string(PacketOutcome o);

struct PacketRecord {
    std::int64_t seq = 0;
    SimTime sent_at{};
    PacketOutcome outcome = PacketOutcome::NotReceived;
};

struct LinkStats {
    std::int64_t sent = 0;
    std::int64_t received = 0;
    std::int64_t crc_valid = 0;
    std::int64_t dropped_sensing = 0;
    double psr = 0.0;
    double prr = 0.0;
};

LinkStats summarize(std::span<const PacketRecord> records);

struct Interferer {
    double center_freq = 0.0;
    double bandwidth = 0.0;
    double power = 0.0;  // linear amplitude, as Emitter::power
};

// |[su_freq +- su_bw/2] intersect interferer band| / su_bw. A zero-width
// interferer counts fully when it sits inside the channel.
double overlap_fraction(double su_freq, double su_bandwidth, const Interferer& pu);

double sinr_db(double su_freq, std::span<const Interferer> pus, const LinkConfig& cfg);

PacketOutcome packet_outcome(double su_freq, std::span<const Interferer> pus, const LinkConfig& cfg,
                             std::mt19937_64& rng);

struct PacketSchedule {
    SimTime start{};
    SimTime spacing{};
    std::int64_t count = 0;
};

// Half-open [begin, end).
struct Interval {
    SimTime begin{};
    SimTime end{};
};

// Piecewise-constant SU carrier: changes[i].second holds from changes[i].first on.
struct FrequencyTrace {
    std::vector<std::pair<SimTime, double>> changes;
    double at(SimTime t) const;
};

struct LinkRun {
    std::vector<PacketRecord> records;
    LinkStats stats;
};

LinkRun run_link(const PacketSchedule& schedule, const FrequencyTrace& su_freq, std::vector<Interval> sensing,
                 std::span<const Emitter> emitters, const LinkConfig& cfg, std::mt19937_64& rng);

void write_records_csv(std::ostream& os, std::span<const PacketRecord> records);
void write_stats_csv(std::ostream& os, const LinkStats& stats);

}  // namespace dsa
