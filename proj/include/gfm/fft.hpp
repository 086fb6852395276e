#ifndef GFM_FFT_HPP
#define GFM_FFT_HPP

#include <complex>
#include <vector>

namespace gfm {

// In-place iterative radix-2 FFT, forward sign convention e^{-i 2 pi k n / N}.
// Length must be a power of two. No normalization; ifft divides by N.
void fft(std::vector<std::complex<double>>& a);
void ifft(std::vector<std::complex<double>>& a);

bool is_power_of_two(size_t n);

}  // namespace gfm

#endif  // GFM_FFT_HPP
