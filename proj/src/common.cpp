#include "dsa/common.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>

namespace dsa {

SeedMixer& SeedMixer::add(double v)
{
    return add(std::bit_cast<std::uint64_t>(v));
}

SeedMixer& SeedMixer::add(std::string_view s)
{
    return add(stable_hash(s));
}

std::mt19937_64 SeedMixer::engine() const
{
    std::seed_seq seq(words_.begin(), words_.end());
    return std::mt19937_64(seq);
}

std::uint64_t stable_hash(std::string_view s)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    std::array<char, 400> buf{};
    char* first = buf.data();
    char* last = buf.data() + buf.size();
    std::to_chars_result r{};
    const double mag = std::abs(v);
    if (mag < 1e15 && std::trunc(v) == v) {
        r = std::to_chars(first, last, static_cast<std::int64_t>(v));
    } else if (mag >= 1e-4 && mag < 1e15) {
        r = std::to_chars(first, last, v, std::chars_format::fixed);
    } else {
        r = std::to_chars(first, last, v, std::chars_format::scientific);
    }
    return std::string(first, r.ptr);
}

}  // namespace dsa
