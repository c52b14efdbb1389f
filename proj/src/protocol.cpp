#include "dsa/protocol.hpp"

#include <algorithm>
#include <ostream>
#include <queue>
#include <variant>

namespace dsa {

std::string_view to_string(MessageKind k)
{
    switch (k) {
    case MessageKind::NewFreq: return "NewFreq";
    case MessageKind::FreqAck: return "FreqAck";
    case MessageKind::ClearToReceive: return "ClearToReceive";
    }
    return "?";
}

std::string_view to_string(RxPhase p)
{
    switch (p) {
    case RxPhase::Sensing: return "Sensing";
    case RxPhase::ProposingFreq: return "ProposingFreq";
    case RxPhase::ConfirmingClear: return "ConfirmingClear";
    case RxPhase::Receiving: return "Receiving";
    }
    return "?";
}

std::string_view to_string(TxPhase p)
{
    switch (p) {
    case TxPhase::AwaitingFreq: return "AwaitingFreq";
    case TxPhase::Acking: return "Acking";
    case TxPhase::Transmitting: return "Transmitting";
    case TxPhase::Failed: return "Failed";
    }
    return "?";
}

double ControlChannel::loss_for(MessageKind k) const
{
    const auto& o = kind_loss[static_cast<std::size_t>(k)];
    return o ? *o : loss_probability;
}

void validate(const ControlChannel& ch)
{
    auto check = [](double p) {
        if (!(p >= 0.0 && p <= 1.0)) throw Error("control channel: loss probability outside [0, 1]");
    };
    check(ch.loss_probability);
    for (const auto& o : ch.kind_loss)
        if (o) check(*o);
    if (ch.delay < SimTime::zero()) throw Error("control channel: negative delay");
}

void validate(const ProtocolTiming& t)
{
    if (t.timeout <= SimTime::zero()) throw Error("protocol: timeout must be > 0");
    if (t.retry_interval <= SimTime::zero()) throw Error("protocol: retry_interval must be > 0");
    if (t.sensing_budget < 1) throw Error("protocol: sensing budget must be >= 1");
    if (t.propose_budget <= SimTime::zero()) throw Error("protocol: propose budget must be > 0");
    if (t.exclusion_halfwidth < 0.0) throw Error("protocol: exclusion halfwidth must be >= 0");
}

LossStream::LossStream(std::uint64_t seed, Direction dir)
    : rng_(SeedMixer(seed).add("control channel").add(static_cast<std::uint64_t>(dir)).engine())
{
}

bool LossStream::dropped(double p)
{
    return uni_(rng_) < p;
}

SenseFn make_sweep_sensor(const Environment& env, std::vector<Band> bands, const SensorConfig& cfg)
{
    std::sort(bands.begin(), bands.end(), [](const Band& a, const Band& b) { return a.low < b.low; });
    return [env, bands = std::move(bands), cfg](SimTime now) {
        SenseResult out;
        out.map.sensed_at = to_seconds(now);
        double t = to_seconds(now);
        double spent = 0.0;
        for (const auto& b : bands) {
            auto part = sweep(env, b, cfg, t);
            t += part.sensing_time;
            spent += part.sensing_time;
            out.map.entries.insert(out.map.entries.end(), part.entries.begin(), part.entries.end());
        }
        if (!bands.empty()) out.map.band = {bands.front().low, bands.back().high};
        out.map.sensing_time = spent;
        out.elapsed = from_seconds(spent);
        return out;
    };
}

std::vector<double> occupied_carriers(const EnergyMap& map, double threshold, double halfwidth)
{
    std::vector<double> hot;
    for (const auto& e : map.entries)
        if (e.energy > threshold) hot.push_back(e.carrier_freq);
    std::vector<double> out;
    if (hot.empty()) return out;
    std::sort(hot.begin(), hot.end());
    for (const auto& e : map.entries) {
        auto it = std::lower_bound(hot.begin(), hot.end(), e.carrier_freq);
        bool near = false;
        if (it != hot.end() && *it - e.carrier_freq <= halfwidth) near = true;
        if (it != hot.begin() && e.carrier_freq - *std::prev(it) <= halfwidth) near = true;
        if (near) out.push_back(e.carrier_freq);
    }
    return out;
}

void write_trace(std::ostream& os, const std::vector<TraceRecord>& trace)
{
    os << "time,actor,event,kind,freq,seq\n";
    for (const auto& r : trace) {
        os << format_number(to_seconds(r.time)) << ',' << (r.actor == Actor::Rx ? "rx" : "tx") << ',' << r.event
           << ',' << (r.kind ? to_string(*r.kind) : std::string_view{}) << ',' << format_number(r.freq) << ','
           << r.seq << '\n';
    }
}

namespace {

enum class TimerKind { RxRetry, RxConfirmEnd, RxProposeDeadline, TxRetry, TxDeadline };

struct Delivery {
    ProtocolMessage msg;
    Actor to;
};
struct SenseDone {
    EnergyMap map;
};
struct Timer {
    TimerKind kind;
    std::uint64_t epoch;
};

struct Event {
    SimTime time;
    int cls;  // same-time ordering: deliveries, then sensing, then timers
    std::uint64_t order;
    std::variant<Delivery, SenseDone, Timer> body;
};

struct Later {
    bool operator()(const Event& a, const Event& b) const
    {
        if (a.time != b.time) return a.time > b.time;
        if (a.cls != b.cls) return a.cls > b.cls;
        return a.order > b.order;
    }
};

class CoSimulation {
public:
    CoSimulation(RxState rx, TxState tx, const SenseFn& sensor, const ControlChannel& channel, SimTime now)
        : sensor_(sensor),
          channel_(channel),
          rx_to_tx_(channel.rng_seed, Direction::RxToTx),
          tx_to_rx_(channel.rng_seed, Direction::TxToRx),
          start_(now)
    {
        validate(channel);
        validate(rx.timing);
        validate(tx.timing);
        if (rx.phase != RxPhase::Sensing) throw Error("rendezvous: receiver must start in Sensing");
        if (tx.phase != TxPhase::AwaitingFreq) throw Error("rendezvous: transmitter must start in AwaitingFreq");
        report_.rx = std::move(rx);
        report_.tx = std::move(tx);
    }

    RendezvousReport run()
    {
        rx_sense(start_);
        while (!queue_.empty() && !(rx_terminal() && tx_terminal())) {
            Event ev = queue_.top();
            queue_.pop();
            std::visit([&](auto& body) { handle(ev.time, body); }, ev.body);
        }
        if (!tx_terminal()) {
            // Nothing left that could reach the transmitter.
            tx_fail(last_time_, report_.tx.phase == TxPhase::AwaitingFreq ? "no NewFreq received"
                                                                           : "no ClearToReceive received");
        }
        auto& r = report_;
        if (!rx_failed_ && r.rx.phase == RxPhase::Receiving && r.tx.phase == TxPhase::Transmitting &&
            r.rx.current_freq == r.tx.current_freq) {
            r.converged = true;
            r.result = {r.rx.current_freq, std::max(r.rx_done, r.tx_done) - start_};
        }
        return std::move(report_);
    }

private:
    bool rx_terminal() const { return rx_failed_ || report_.rx.phase == RxPhase::Receiving; }
    bool tx_terminal() const
    {
        return report_.tx.phase == TxPhase::Transmitting || report_.tx.phase == TxPhase::Failed;
    }

    void push(SimTime t, int cls, std::variant<Delivery, SenseDone, Timer> body)
    {
        queue_.push(Event{t, cls, order_++, std::move(body)});
    }
    void timer(SimTime t, TimerKind k, std::uint64_t epoch) { push(t, 2, Timer{k, epoch}); }

    void trace(SimTime t, Actor a, std::string event, std::optional<MessageKind> kind, double freq,
               std::uint64_t seq = 0)
    {
        last_time_ = std::max(last_time_, t);
        report_.trace.push_back({t, a, std::move(event), kind, freq, seq});
    }

    void send(SimTime t, Actor from, MessageKind kind, double freq)
    {
        auto& seq = from == Actor::Rx ? report_.rx.next_seq : report_.tx.next_seq;
        ProtocolMessage msg{kind, freq, seq++, t};
        ++report_.messages.sent[static_cast<std::size_t>(kind)];
        trace(t, from, "send", kind, freq, msg.seq);
        auto& stream = from == Actor::Rx ? rx_to_tx_ : tx_to_rx_;
        if (stream.dropped(channel_.loss_for(kind))) {
            trace(t, from, "lost", kind, freq, msg.seq);
            return;
        }
        push(t + channel_.delay, 0, Delivery{msg, from == Actor::Rx ? Actor::Tx : Actor::Rx});
    }

    // ---- receiver ----

    void rx_sense(SimTime t)
    {
        if (report_.sweeps >= report_.rx.timing.sensing_budget) {
            rx_fail(t, "no clear channel");
            return;
        }
        auto result = sensor_(t);
        ++report_.sweeps;
        report_.sensing_time += result.elapsed;
        trace(t, Actor::Rx, "sense", std::nullopt, 0.0);
        push(t + result.elapsed, 1, SenseDone{std::move(result.map)});
    }

    void handle(SimTime t, SenseDone& done)
    {
        if (rx_terminal()) return;
        const auto& timing = report_.rx.timing;
        std::vector<double> excluded;
        if (timing.exclusion_halfwidth > 0.0)
            excluded = occupied_carriers(done.map, timing.threshold, timing.exclusion_halfwidth);
        std::optional<EnergyEntry> best;
        if (excluded.size() < done.map.entries.size()) best = min_energy_frequency(done.map, excluded);
        if (!best || best->energy > timing.threshold) {
            trace(t, Actor::Rx, "busy", std::nullopt, best ? best->carrier_freq : 0.0);
            rx_sense(t);
            return;
        }
        auto& rx = report_.rx;
        rx.current_freq = best->carrier_freq;
        rx.phase = RxPhase::ProposingFreq;
        ++rx_epoch_;
        trace(t, Actor::Rx, "select", std::nullopt, rx.current_freq);
        send(t, Actor::Rx, MessageKind::NewFreq, rx.current_freq);
        timer(t + timing.retry_interval, TimerKind::RxRetry, rx_epoch_);
        timer(t + timing.propose_budget, TimerKind::RxProposeDeadline, rx_epoch_);
    }

    void rx_fail(SimTime t, std::string reason)
    {
        rx_failed_ = true;
        report_.rx_done = t;
        trace(t, Actor::Rx, "fail", std::nullopt, report_.rx.current_freq);
        if (!report_.failure) report_.failure = Failed{Actor::Rx, std::move(reason)};
    }

    void rx_message(SimTime t, const ProtocolMessage& m)
    {
        auto& rx = report_.rx;
        if (rx.phase != RxPhase::ProposingFreq || m.kind != MessageKind::FreqAck || m.carrier_freq != rx.current_freq) {
            trace(t, Actor::Rx, "discard", m.kind, m.carrier_freq, m.seq);
            return;
        }
        trace(t, Actor::Rx, "recv", m.kind, m.carrier_freq, m.seq);
        rx.phase = RxPhase::ConfirmingClear;
        ++rx_epoch_;
        confirm_start_ = t;
        send(t, Actor::Rx, MessageKind::ClearToReceive, rx.current_freq);
        timer(t + rx.timing.retry_interval, TimerKind::RxRetry, rx_epoch_);
        timer(t + rx.timing.timeout, TimerKind::RxConfirmEnd, rx_epoch_);
    }

    // ---- transmitter ----

    void tx_fail(SimTime t, std::string reason)
    {
        auto& tx = report_.tx;
        tx.phase = TxPhase::Failed;
        report_.tx_done = t;
        trace(t, Actor::Tx, "fail", std::nullopt, tx.current_freq);
        if (!report_.failure) report_.failure = Failed{Actor::Tx, std::move(reason)};
    }

    void tx_message(SimTime t, const ProtocolMessage& m)
    {
        auto& tx = report_.tx;
        if (tx.phase == TxPhase::AwaitingFreq && m.kind == MessageKind::NewFreq) {
            trace(t, Actor::Tx, "recv", m.kind, m.carrier_freq, m.seq);
            tx.current_freq = m.carrier_freq;
            tx.phase = TxPhase::Acking;
            ++tx_epoch_;
            ack_start_ = t;
            send(t, Actor::Tx, MessageKind::FreqAck, tx.current_freq);
            timer(t + tx.timing.retry_interval, TimerKind::TxRetry, tx_epoch_);
            timer(t + tx.timing.timeout, TimerKind::TxDeadline, tx_epoch_);
            return;
        }
        if (tx.phase == TxPhase::Acking && m.kind == MessageKind::ClearToReceive && m.carrier_freq == tx.current_freq) {
            trace(t, Actor::Tx, "recv", m.kind, m.carrier_freq, m.seq);
            tx.saw_clear_to_receive = true;
            tx.phase = TxPhase::Transmitting;
            ++tx_epoch_;
            report_.tx_done = t;
            trace(t, Actor::Tx, "transmitting", std::nullopt, tx.current_freq);
            return;
        }
        trace(t, Actor::Tx, "discard", m.kind, m.carrier_freq, m.seq);
    }

    void handle(SimTime t, Delivery& d)
    {
        ++report_.messages.delivered[static_cast<std::size_t>(d.msg.kind)];
        if (d.to == Actor::Rx) {
            if (!rx_terminal()) rx_message(t, d.msg);
        } else if (!tx_terminal()) {
            tx_message(t, d.msg);
        }
    }

    void handle(SimTime t, Timer& tm)
    {
        auto& rx = report_.rx;
        auto& tx = report_.tx;
        switch (tm.kind) {
        case TimerKind::RxRetry:
            if (tm.epoch != rx_epoch_ || rx_terminal()) return;
            if (rx.phase == RxPhase::ProposingFreq) {
                send(t, Actor::Rx, MessageKind::NewFreq, rx.current_freq);
            } else if (rx.phase == RxPhase::ConfirmingClear) {
                if (t >= confirm_start_ + rx.timing.timeout) return;
                send(t, Actor::Rx, MessageKind::ClearToReceive, rx.current_freq);
            }
            timer(t + rx.timing.retry_interval, TimerKind::RxRetry, tm.epoch);
            return;
        case TimerKind::RxConfirmEnd:
            if (tm.epoch != rx_epoch_ || rx_terminal()) return;
            rx.phase = RxPhase::Receiving;
            report_.rx_done = t;
            trace(t, Actor::Rx, "receiving", std::nullopt, rx.current_freq);
            return;
        case TimerKind::RxProposeDeadline:
            if (tm.epoch != rx_epoch_ || rx_terminal()) return;
            rx_fail(t, "no FreqAck within propose budget");
            return;
        case TimerKind::TxRetry:
            if (tm.epoch != tx_epoch_ || tx_terminal()) return;
            if (t > ack_start_ + tx.timing.timeout) return;
            send(t, Actor::Tx, MessageKind::FreqAck, tx.current_freq);
            timer(t + tx.timing.retry_interval, TimerKind::TxRetry, tm.epoch);
            return;
        case TimerKind::TxDeadline:
            if (tm.epoch != tx_epoch_ || tx_terminal()) return;
            tx_fail(t, "no ClearToReceive before timeout");
            return;
        }
    }

    const SenseFn& sensor_;
    const ControlChannel& channel_;
    LossStream rx_to_tx_;
    LossStream tx_to_rx_;
    SimTime start_;
    SimTime last_time_{};
    SimTime confirm_start_{};
    SimTime ack_start_{};
    std::uint64_t rx_epoch_ = 0;
    std::uint64_t tx_epoch_ = 0;
    std::uint64_t order_ = 0;
    bool rx_failed_ = false;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    RendezvousReport report_;
};

}  // namespace

RendezvousReport rendezvous(RxState rx, TxState tx, const SenseFn& sensor, const ControlChannel& channel,
                            SimTime now)
{
    return CoSimulation(std::move(rx), std::move(tx), sensor, channel, now).run();
}

RxRound rx_round(RxState rx, TxState peer, const SenseFn& sensor, const ControlChannel& channel, SimTime now)
{
    auto rep = rendezvous(std::move(rx), std::move(peer), sensor, channel, now);
    if (rep.failure && rep.failure->actor == Actor::Rx && rep.failure->reason == "no clear channel")
        throw Error("no clear channel");
    return {rep.rx, rep.rx.current_freq, rep.rx_done - now};
}

TxRound tx_round(TxState tx, RxState peer, const SenseFn& sensor, const ControlChannel& channel, SimTime now)
{
    auto rep = rendezvous(std::move(peer), std::move(tx), sensor, channel, now);
    return {rep.tx, rep.tx_done - now};
}

}  // namespace dsa
