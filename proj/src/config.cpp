#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "dsa/scenario.hpp"

namespace dsa {
namespace {

using nlohmann::json;

template <typename T>
void read(const json& j, const char* key, T& out)
{
    if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

void read_seconds(const json& j, const char* key, SimTime& out)
{
    if (auto it = j.find(key); it != j.end() && !it->is_null()) out = from_seconds(it->get<double>());
}

std::vector<Band> read_bands(const json& j)
{
    std::vector<Band> bands;
    for (const auto& b : j) {
        if (!b.is_array() || b.size() != 2) throw Error("config: a band must be [low_hz, high_hz]");
        bands.push_back({b[0].get<double>(), b[1].get<double>()});
    }
    return bands;
}

EmitterKind parse_kind(const std::string& s)
{
    if (s == "tone") return EmitterKind::Tone;
    if (s == "band_noise") return EmitterKind::BandNoise;
    if (s == "sweeping_band_noise") return EmitterKind::SweepingBandNoise;
    throw Error("config: unknown emitter kind '" + s + "'");
}

Emitter parse_emitter(const json& j)
{
    Emitter e;
    read(j, "id", e.id);
    if (e.id.empty()) throw Error("config: emitter without id");
    std::string kind = "band_noise";
    read(j, "kind", kind);
    e.kind = parse_kind(kind);
    read(j, "center_hz", e.center_freq);
    read(j, "bandwidth_hz", e.bandwidth);
    read(j, "power", e.power);
    if (auto it = j.find("active_s"); it != j.end()) {
        if (!it->is_array() || it->size() != 2) throw Error("config: active_s must be [start, stop]");
        e.active = {(*it)[0].get<double>(), (*it)[1].get<double>()};
    }
    if (auto it = j.find("sweep"); it != j.end() && !it->is_null()) {
        SweepPlan p;
        read(*it, "start_hz", p.start_freq);
        read(*it, "stop_hz", p.stop_freq);
        read(*it, "step_hz", p.step);
        read(*it, "dwell_s", p.dwell);
        e.sweep = p;
    }
    return e;
}

void apply(const json& root, ScenarioConfig& cfg, std::optional<std::string_view> mode_override)
{
    if (auto it = root.find("environment"); it != root.end()) {
        const auto& env = *it;
        if (auto fe = env.find("frontend"); fe != env.end()) {
            auto& f = cfg.environment.frontend;
            read(*fe, "sample_rate_hz", f.sample_rate);
            read(*fe, "max_instantaneous_bw_hz", f.max_instantaneous_bw);
            read(*fe, "tune_delay_s", f.tune_delay);
            read(*fe, "noise_floor_power", f.noise_floor_power);
        }
        if (auto em = env.find("emitters"); em != env.end()) {
            cfg.environment.emitters.clear();
            for (const auto& e : *em) cfg.environment.emitters.push_back(parse_emitter(e));
        }
    }
    if (auto it = root.find("sensor"); it != root.end()) {
        read(*it, "usrp_rate_hz", cfg.sensor.usrp_rate);
        read(*it, "channel_bandwidth_hz", cfg.sensor.channel_bandwidth);
        read(*it, "avg_vectors", cfg.sensor.avg_vectors);
    }
    if (auto it = root.find("protocol"); it != root.end()) {
        auto& t = cfg.protocol.timing;
        read(*it, "threshold", t.threshold);
        read_seconds(*it, "timeout_s", t.timeout);
        read_seconds(*it, "retry_interval_s", t.retry_interval);
        read(*it, "sensing_budget", t.sensing_budget);
        read_seconds(*it, "propose_budget_s", t.propose_budget);
        read(*it, "exclusion_halfwidth_hz", t.exclusion_halfwidth);
        read(*it, "resense_period_s", cfg.protocol.resense_period);
    }
    if (auto it = root.find("channel"); it != root.end()) {
        read(*it, "loss_probability", cfg.channel.loss_probability);
        read_seconds(*it, "delay_s", cfg.channel.delay);
    }
    if (auto it = root.find("link"); it != root.end()) {
        auto& l = cfg.link;
        read(*it, "packet_size_bytes", l.packet_size);
        read(*it, "inter_packet_time_s", l.inter_packet_time);
        read(*it, "total_packets", l.total_packets);
        read(*it, "data_rate_bps", l.data_rate);
        read(*it, "su_channel_bandwidth_hz", l.su_channel_bandwidth);
        read(*it, "sinr_capture_db", l.sinr_capture_db);
        read(*it, "detect_margin_db", l.detect_margin_db);
        read(*it, "su_signal_power", l.su_signal_power);
        read(*it, "noise_power", l.noise_power);
        read(*it, "logistic_slope_db", l.logistic_slope_db);
        read(*it, "fallback_data_rate_bps", l.fallback_data_rate);
        if (auto fb = it->find("fallback_band_hz"); fb != it->end()) {
            auto b = read_bands(json::array({*fb}));
            l.fallback_band = b.front();
        }
    }
    if (auto it = root.find("pu"); it != root.end()) {
        read(*it, "enabled", cfg.pu.enabled);
        read(*it, "bandwidth_hz", cfg.pu.bandwidth);
        read(*it, "power", cfg.pu.power);
        if (auto lat = it->find("reaction_latency_s"); lat != it->end())
            cfg.pu.reaction_latency = lat->is_null() ? std::nullopt : std::optional<double>(lat->get<double>());
    }
    if (auto it = root.find("static"); it != root.end()) read(*it, "carrier_hz", cfg.static_mode.carrier_freq);
    if (auto it = root.find("dsa"); it != root.end())
        if (auto b = it->find("bands_hz"); b != it->end()) cfg.dsa_mode.bands = read_bands(*b);
    if (auto it = root.find("scan"); it != root.end())
        if (auto b = it->find("bands_hz"); b != it->end()) cfg.scan_bands = read_bands(*b);
    if (auto it = root.find("pu_sweep"); it != root.end()) {
        if (it->is_null()) {
            cfg.pu_sweep.reset();
        } else {
            PuSweep s = cfg.pu_sweep.value_or(PuSweep{});
            read(*it, "start_offset_hz", s.start_offset);
            read(*it, "stop_offset_hz", s.stop_offset);
            read(*it, "step_hz", s.step);
            read(*it, "packets_per_point", s.packets_per_point);
            cfg.pu_sweep = s;
        }
    }
    if (auto it = root.find("seeds"); it != root.end()) cfg.seeds = it->get<std::vector<std::uint64_t>>();
    if (auto it = root.find("seed_count"); it != root.end()) {
        cfg.seeds.clear();
        for (std::uint64_t s = 1; s <= it->get<std::uint64_t>(); ++s) cfg.seeds.push_back(s);
    }
    if (auto it = root.find("outputs"); it != root.end()) cfg.outputs = it->get<std::string>();
    read(root, "trace", cfg.trace);

    std::string mode = "dsa";
    read(root, "mode", mode);
    if (mode_override) mode = std::string(*mode_override);
    if (mode == "static")
        cfg.mode = cfg.static_mode;
    else if (mode == "dsa")
        cfg.mode = cfg.dsa_mode;
    else
        throw Error("config: unknown mode '" + mode + "'");
}

}  // namespace

ScenarioConfig parse_config(std::string_view json_text, std::optional<std::string_view> mode_override)
{
    ScenarioConfig cfg = default_config();
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(std::string("config: ") + e.what());
    }
    try {
        apply(root, cfg, mode_override);
    } catch (const json::exception& e) {
        throw Error(std::string("config: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path, std::optional<std::string_view> mode_override)
{
    std::ifstream in(path);
    if (!in) throw Error("config: cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), mode_override);
}

}  // namespace dsa
