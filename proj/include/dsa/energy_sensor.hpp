#pragma once

// Energy-detection spectrum sensor: windowed FFT, time-averaged power per
// bin, edge-bin discarding and chunked sweeping of a wide band.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "dsa/common.hpp"
#include "dsa/rf_env.hpp"

namespace dsa {

struct SensorConfig {
    double usrp_rate = 4e6;
    double channel_bandwidth = 6250.0;
    std::size_t avg_vectors = 512;
};

struct FftLayout {
    std::size_t fft_size = 0;
    std::size_t bin_start = 0;
    std::size_t bin_stop = 0;
    std::size_t usable_bins = 0;
};

struct EnergyEntry {
    double carrier_freq = 0.0;
    double energy = 0.0;
    double energy_db = 0.0;
};

struct EnergyMap {
    std::vector<EnergyEntry> entries;
    Band band;
    double sensed_at = 0.0;
    double sensing_time = 0.0;  // simulated seconds spent producing the map
};

void validate(const SensorConfig& cfg);

FftLayout fft_layout(const SensorConfig& cfg);

// Usable bandwidth of one dwell after edge discard.
double chunk_bandwidth(const SensorConfig& cfg);

// Seconds one dwell occupies the front end: retune plus the averaged vectors.
double dwell_time(const SensorConfig& cfg, const FrontEndConfig& fe);

// Number of dwells a sweep over `band` schedules.
std::size_t dwell_count(const SensorConfig& cfg, const Band& band);

// Symmetric 4-term Blackman-Harris window. n == 1 yields {1.0}.
std::vector<double> blackman_harris(std::size_t n);

double to_db(double energy);

EnergyMap sense_dwell(const IqBuffer& buf, const SensorConfig& cfg);

// Carriers in [band.low, band.high), chunk by chunk from band.low.
EnergyMap sweep(const Environment& env, const Band& band, const SensorConfig& cfg, double at_time);

// Minimum-energy entry, ties to the lowest frequency. Carriers listed in
// `exclude` (exact matches) are skipped.
EnergyEntry min_energy_frequency(const EnergyMap& map, std::span<const double> exclude = {});

void write_csv(std::ostream& os, const EnergyMap& map);

}  // namespace dsa
