#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dsa {

// Simulated clock. Integer nanoseconds keep slot arithmetic exact.
using SimTime = std::chrono::nanoseconds;

inline SimTime from_seconds(double s)
{
    return SimTime{static_cast<std::int64_t>(std::llround(s * 1e9))};
}

inline double to_seconds(SimTime t)
{
    return static_cast<double>(t.count()) * 1e-9;
}

// Frequency interval in Hz.
struct Band {
    double low = 0.0;
    double high = 0.0;

    double width() const { return high - low; }
    bool contains(double f) const { return f >= low && f <= high; }
};

// Raised for violated preconditions and unrecoverable simulation states.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Deterministic substream derivation. Every random draw in the simulator
// comes from an engine built here so results are pure functions of the seeds.
class SeedMixer {
public:
    explicit SeedMixer(std::uint64_t root) { add(root); }

    SeedMixer& add(std::uint64_t v)
    {
        words_.push_back(static_cast<std::uint32_t>(v));
        words_.push_back(static_cast<std::uint32_t>(v >> 32));
        return *this;
    }
    SeedMixer& add(double v);
    SeedMixer& add(std::string_view s);

    std::mt19937_64 engine() const;

    // Same seeding for any engine constructible from a seed sequence.
    template <typename Engine>
    Engine engine_as() const
    {
        std::seed_seq seq(words_.begin(), words_.end());
        return Engine(seq);
    }

private:
    std::basic_string<std::uint32_t> words_;
};

// FNV-1a, stable across platforms and runs (unlike std::hash).
std::uint64_t stable_hash(std::string_view s);

// Shortest round-trip decimal form, used by every CSV writer.
std::string format_number(double v);

}  // namespace dsa
