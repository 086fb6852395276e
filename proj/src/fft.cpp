#include "gfm/fft.hpp"

#include <cmath>
#include <numbers>

#include "gfm/common.hpp"

namespace gfm {

bool is_power_of_two(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace {

void fft_impl(std::vector<std::complex<double>>& a, double sign) {
  const size_t n = a.size();
  if (!is_power_of_two(n)) throw_logic("fft: length must be a power of two");
  // bit-reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

}  // namespace

void fft(std::vector<std::complex<double>>& a) { fft_impl(a, -1.0); }

void ifft(std::vector<std::complex<double>>& a) {
  fft_impl(a, 1.0);
  const double inv = 1.0 / static_cast<double>(a.size());
  for (auto& x : a) x *= inv;
}

}  // namespace gfm
