#include "fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "dsa/common.hpp"

namespace dsa::detail {
namespace {

struct FftwFree {
    void operator()(fftw_complex* p) const { fftw_free(p); }
};
using Scratch = std::unique_ptr<fftw_complex[], FftwFree>;

Scratch allocate(std::size_t n)
{
    auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (p == nullptr) throw Error("fftw: allocation of " + std::to_string(n) + " points failed");
    return Scratch(p);
}

// Plans are made for SIMD-aligned in-place buffers. Every transform runs on
// such a buffer, so the same plan (and the same rounding) applies whatever the
// caller's alignment.
class PlanCache {
public:
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t n, FftDirection dir)
    {
        std::lock_guard lock(mu_);
        const auto key = std::make_pair(n, dir);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        auto scratch = allocate(n);
        const int sign = dir == FftDirection::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), scratch.get(), scratch.get(), sign, FFTW_ESTIMATE);
        if (plan == nullptr) throw Error("fftw: failed to plan transform of size " + std::to_string(n));
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mu_;
    std::map<std::pair<std::size_t, FftDirection>, fftw_plan> plans_;
};

PlanCache& cache()
{
    static PlanCache c;
    return c;
}

fftw_complex* scratch(std::size_t n)
{
    thread_local Scratch buf;
    thread_local std::size_t cap = 0;
    if (cap < n) {
        buf = allocate(n);
        cap = n;
    }
    return buf.get();
}

}  // namespace

void fft_inplace(std::span<std::complex<double>> data, FftDirection dir)
{
    if (data.empty()) return;
    fftw_plan plan = cache().get(data.size(), dir);
    auto* work = scratch(data.size());
    const std::size_t bytes = data.size_bytes();
    std::memcpy(work, static_cast<const void*>(data.data()), bytes);
    fftw_execute_dft(plan, work, work);
    std::memcpy(static_cast<void*>(data.data()), work, bytes);
}

}  // namespace dsa::detail
