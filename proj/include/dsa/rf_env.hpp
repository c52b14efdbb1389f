#pragma once

// Synthetic radio environment seen through a virtual tunable front end.
//
// Emitters are synthesized directly in baseband relative to the requested
// center frequency. Band-limited noise is built bin by bin in the frequency
// domain and transformed to time, so an emitter whose band falls outside the
// front end's instantaneous window contributes exactly zero.

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dsa/common.hpp"

namespace dsa {

enum class EmitterKind { Tone, BandNoise, SweepingBandNoise };

struct SweepPlan {
    double start_freq = 0.0;
    double stop_freq = 0.0;
    double step = 0.0;
    double dwell = 1.0;  // seconds per step
};

struct ActiveInterval {
    double start = 0.0;
    double stop = 0.0;
};

struct Emitter {
    std::string id;
    double center_freq = 0.0;
    double bandwidth = 0.0;
    double power = 0.0;  // linear amplitude; contributed power is power^2
    EmitterKind kind = EmitterKind::Tone;
    std::optional<SweepPlan> sweep;
    ActiveInterval active{0.0, 1e30};
};

struct FrontEndConfig {
    double sample_rate = 4e6;
    double max_instantaneous_bw = 4e6;
    double tune_delay = 5e-3;
    double noise_floor_power = 1e-6;
};

struct IqBuffer {
    std::vector<std::complex<double>> samples;
    double center_freq = 0.0;
    double sample_rate = 0.0;
    double start_time = 0.0;
};

struct Environment {
    std::vector<Emitter> emitters;
    FrontEndConfig frontend;
    std::uint64_t rng_seed = 0;
};

void validate(const Emitter& e);
void validate(const FrontEndConfig& fe);
void validate(const Environment& env);

bool emitter_active(const Emitter& e, double t);
double current_center(const Emitter& e, double t);

// Complex baseband capture of [at_time, at_time + duration] tuned to
// center_freq. The first tune_delay seconds are dropped.
IqBuffer capture(const Environment& env, double center_freq, double duration, double at_time);

}  // namespace dsa
