#pragma once

// Experiment orchestration: static-channel and DSA runs over a primary-user
// offset sweep, band scans, and report emission.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dsa/energy_sensor.hpp"
#include "dsa/link_model.hpp"
#include "dsa/protocol.hpp"
#include "dsa/rf_env.hpp"

namespace dsa {

// The interfering primary user placed by the sweep.
struct PuConfig {
    bool enabled = true;
    double bandwidth = 5e5;
    double power = 3.1622776601683795;  // sqrt(10): 10 dB above the SU signal
    // Delay between the SU settling on a carrier and the PU retuning onto it.
    // Unset means 2 * resense_period.
    std::optional<double> reaction_latency;
};

struct ProtocolConfig {
    ProtocolTiming timing;
    double resense_period = 1.8;  // s between in-session chunk re-sensing
};

struct StaticMode {
    double carrier_freq = 2480e6;
};

struct DsaMode {
    std::vector<Band> bands;
};

struct PuSweep {
    double start_offset = -1e6;
    double stop_offset = 1e6;
    double step = 1e5;
    int packets_per_point = 1000;

    // Grid of PU center offsets from the SU carrier, rounded to whole Hz.
    std::vector<double> offsets() const;
};

struct ScenarioConfig {
    Environment environment;
    SensorConfig sensor;
    ProtocolConfig protocol;
    ControlChannel channel;
    LinkConfig link;
    PuConfig pu;
    using Mode = std::variant<StaticMode, DsaMode>;
    Mode mode;
    StaticMode static_mode;  // always populated, used by `compare`
    DsaMode dsa_mode;        // always populated, used by `compare` and scans
    std::optional<PuSweep> pu_sweep;
    std::vector<std::uint64_t> seeds;
    std::vector<Band> scan_bands;
    std::filesystem::path outputs = "out";
    bool trace = false;

    double reaction_latency() const;
};

void validate(const ScenarioConfig& cfg);

// Calibrated defaults for every field.
ScenarioConfig default_config();

// JSON config; missing keys keep their defaults. `mode_override` replaces
// the file's "mode" ("static" or "dsa").
ScenarioConfig parse_config(std::string_view json_text, std::optional<std::string_view> mode_override = {});
ScenarioConfig load_config(const std::filesystem::path& path, std::optional<std::string_view> mode_override = {});

struct SweepRow {
    std::uint64_t seed = 0;
    double pu_offset = 0.0;
    double spectral_distance = 0.0;
    double psr = 0.0;
    double prr = 0.0;
    double dropped_sensing = 0.0;
    double sensing_time = 0.0;  // s of front-end time spent sensing in the session
    double rendezvous = 0.0;
    double rendezvous_failures = 0.0;
};

struct RunTrace {
    std::uint64_t seed = 0;
    double pu_offset = 0.0;
    std::vector<TraceRecord> records;
};

struct SweepResult {
    std::vector<SweepRow> per_seed;  // seed-major, grid order within a seed
    std::vector<SweepRow> averaged;  // one per grid point, grid order
    std::vector<RunTrace> traces;
};

// Everything one DSA session produced, for inspection and tests.
struct DsaSession {
    LinkRun link;
    std::vector<Interval> sensing_windows;
    FrequencyTrace su_freq;
    std::vector<Emitter> pu_segments;
    std::vector<TraceRecord> trace;
    double sensing_time = 0.0;
    std::size_t dwells = 0;
    std::size_t rendezvous = 0;
    std::size_t rendezvous_failures = 0;
};

// One DSA session for one seed. No PU when pu_offset is empty.
DsaSession simulate_dsa_session(const ScenarioConfig& cfg, std::uint64_t seed, std::optional<double> pu_offset,
                                std::int64_t packets);

// One static-channel session.
LinkRun simulate_static_session(const ScenarioConfig& cfg, std::uint64_t seed, std::optional<double> pu_offset,
                                std::int64_t packets);

std::vector<std::filesystem::path> run_scan(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);
SweepResult run_static(const ScenarioConfig& cfg);
SweepResult run_dsa(const ScenarioConfig& cfg);

void write_summary_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void write_per_seed_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void print_table(std::ostream& os, std::string_view title, const std::vector<SweepRow>& rows);

// Writes <name>_summary.csv, <name>_per_seed.csv and, when traces are present,
// traces/<name>_seed<s>_offset<hz>.csv; prints the averaged table to `table`.
void emit_report(const SweepResult& result, const std::filesystem::path& out_dir, std::string_view name,
                 std::ostream& table);

// Side-by-side static vs DSA table and compare.csv.
void emit_comparison(const SweepResult& static_result, const SweepResult& dsa_result,
                     const std::filesystem::path& out_dir, std::ostream& table);

}  // namespace dsa
