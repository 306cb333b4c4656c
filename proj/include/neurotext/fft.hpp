#pragma once

#include <complex>
#include <vector>

namespace neurotext {

// In-place FFT for any length >= 1. Radix-2 when the length is a power of
// two, Bluestein's chirp-z otherwise. inverse=true applies the 1/N scale.
void fft(std::vector<std::complex<double>>& x, bool inverse);

}  // namespace neurotext
