#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace dsa::detail {

enum class FftDirection { Forward, Backward };

// Unnormalized in-place DFT of any length, backed by cached FFTW plans.
void fft_inplace(std::span<std::complex<double>> data, FftDirection dir);

}  // namespace dsa::detail
