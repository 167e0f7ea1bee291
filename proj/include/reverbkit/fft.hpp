// fft.hpp -- iterative radix-2 FFT, double precision.
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace reverbkit {

std::size_t next_pow2(std::size_t n);

/// In-place radix-2 transform. a.size() must be a power of two.
/// The inverse transform includes the 1/N scaling.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

}  // namespace reverbkit
