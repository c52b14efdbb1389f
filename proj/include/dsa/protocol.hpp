#pragma once

// Receiver/transmitter frequency coordination as two event-driven state
// machines sharing a lossy, delayed control channel.
//
// The receiver senses, proposes the least-occupied carrier (NewFreq), waits
// for the transmitter's FreqAck, then repeats ClearToReceive for a full
// timeout window before it starts receiving. The transmitter acknowledges a
// proposal until it hears ClearToReceive or its own timeout expires.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dsa/common.hpp"
#include "dsa/energy_sensor.hpp"

namespace dsa {

enum class MessageKind { NewFreq, FreqAck, ClearToReceive };

std::string_view to_string(MessageKind k);

struct ProtocolMessage {
    MessageKind kind = MessageKind::NewFreq;
    double carrier_freq = 0.0;
    std::uint64_t seq = 0;
    SimTime sent_at{};
};

enum class Direction { RxToTx, TxToRx };

struct ControlChannel {
    double loss_probability = 0.0;
    SimTime delay{};
    std::uint64_t rng_seed = 0;
    // Per-kind override of loss_probability, for exercising single failure paths.
    std::array<std::optional<double>, 3> kind_loss{};

    double loss_for(MessageKind k) const;
};

void validate(const ControlChannel& ch);

// The seeded sequence of loss decisions in one direction. Every message
// consumes exactly one uniform draw, so the sequence depends only on the seed,
// the direction and how many messages were sent before.
class LossStream {
public:
    LossStream(std::uint64_t seed, Direction dir);
    bool dropped(double p);

private:
    std::mt19937_64 rng_;
    std::uniform_real_distribution<double> uni_{0.0, 1.0};
};

enum class RxPhase { Sensing, ProposingFreq, ConfirmingClear, Receiving };
enum class TxPhase { AwaitingFreq, Acking, Transmitting, Failed };

std::string_view to_string(RxPhase p);
std::string_view to_string(TxPhase p);

struct ProtocolTiming {
    double threshold = 1e-3;          // linear energy
    SimTime timeout = SimTime{500'000'000};
    SimTime retry_interval = SimTime{10'000'000};
    std::size_t sensing_budget = 4;   // full sweeps before "no clear channel"
    SimTime propose_budget = SimTime{2'000'000'000};
    // Carriers closer than this to any above-threshold bin are not proposed.
    double exclusion_halfwidth = 0.0;
};

void validate(const ProtocolTiming& t);

struct RxState {
    RxPhase phase = RxPhase::Sensing;
    double current_freq = 0.0;
    std::uint64_t next_seq = 0;
    ProtocolTiming timing;
};

struct TxState {
    TxPhase phase = TxPhase::AwaitingFreq;
    double current_freq = 0.0;
    std::uint64_t next_seq = 0;
    bool saw_clear_to_receive = false;
    ProtocolTiming timing;
};

// One sensing pass: the map and the simulated time it consumed.
struct SenseResult {
    EnergyMap map;
    SimTime elapsed{};
};
using SenseFn = std::function<SenseResult(SimTime now)>;

// Sensor that sweeps the given bands of an environment, one after another.
SenseFn make_sweep_sensor(const Environment& env, std::vector<Band> bands, const SensorConfig& cfg);

enum class Actor { Rx, Tx };

struct TraceRecord {
    SimTime time{};
    Actor actor = Actor::Rx;
    std::string event;
    std::optional<MessageKind> kind;
    double freq = 0.0;
    std::uint64_t seq = 0;
};

void write_trace(std::ostream& os, const std::vector<TraceRecord>& trace);

struct MessageCounts {
    std::array<std::size_t, 3> sent{};
    std::array<std::size_t, 3> delivered{};
    std::size_t total_sent() const { return sent[0] + sent[1] + sent[2]; }
    std::size_t rx_sent() const { return sent[0] + sent[2]; }
};

struct Converged {
    double freq = 0.0;
    SimTime elapsed{};
};

struct Failed {
    Actor actor = Actor::Rx;  // the machine that gave up first
    std::string reason;
};

struct RendezvousReport {
    bool converged = false;
    Converged result;                     // valid when converged
    std::optional<Failed> failure;
    RxState rx;
    TxState tx;
    SimTime rx_done{};                    // when Rx started receiving (or gave up)
    SimTime tx_done{};                    // when Tx started transmitting (or gave up)
    SimTime sensing_time{};
    std::size_t sweeps = 0;
    MessageCounts messages;
    std::vector<TraceRecord> trace;
};

// Co-simulates both machines from `now` on one deterministic event clock.
RendezvousReport rendezvous(RxState rx, TxState tx, const SenseFn& sensor, const ControlChannel& channel,
                            SimTime now);

struct RxRound {
    RxState state;
    double selected_freq = 0.0;
    SimTime elapsed{};
};

// Receiver view of one round. Throws Error("no clear channel") when the
// sensing budget runs out.
RxRound rx_round(RxState rx, TxState peer, const SenseFn& sensor, const ControlChannel& channel, SimTime now);

struct TxRound {
    TxState state;
    SimTime elapsed{};
};

// Transmitter view of one round. Failed is a normal outcome.
TxRound tx_round(TxState tx, RxState peer, const SenseFn& sensor, const ControlChannel& channel, SimTime now);

// Carriers whose channel would include an above-threshold bin.
std::vector<double> occupied_carriers(const EnergyMap& map, double threshold, double halfwidth);

}  // namespace dsa
