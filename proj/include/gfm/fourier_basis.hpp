#ifndef GFM_FOURIER_BASIS_HPP
#define GFM_FOURIER_BASIS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "gfm/tensor.hpp"

namespace gfm {

// Settings for the fixed per-layer cosine basis. The basis mixes n_low
// fractional frequencies {1/n_low, ..., 1} with n_high integer frequencies
// {1, ..., n_high}; each frequency appears with n_phase phase shifts, so a
// basis has rows = (n_low + n_high) * n_phase.
struct BasisConfig {
  int n_low = 32;
  int n_high = 128;
  int n_phase = 32;
  int m_points = 256;
  // Phases default to the uniform grid 2*pi*j/n_phase. The random mode
  // draws them uniformly from [0, 2*pi) instead, seeded.
  bool random_phases = false;
  uint64_t seed = 0;

  int rows() const { return (n_low + n_high) * n_phase; }
  void validate() const;
};

// Fixed basis matrix for one layer: rows() x m_points, entry (d, m) equal to
// cos(frequencies[d] * grid_m + phases[d]) on the uniform grid of m_points
// spanning [-t_max/2, t_max/2] inclusive. Never trained.
struct FourierBasis {
  Tensor matrix;
  std::vector<double> frequencies;
  std::vector<double> phases;
  double t_max = 0.0;

  int rows() const { return static_cast<int>(matrix.dim(0)); }
  int cols() const { return static_cast<int>(matrix.dim(1)); }
  double grid_point(int m) const;
};

FourierBasis build_basis(const BasisConfig& config);

// One basis per modulated layer; m_points is overridden by that layer's
// input dimension.
std::vector<FourierBasis> layer_bases(const BasisConfig& config,
                                      std::span<const int> layer_input_dims);

}  // namespace gfm

#endif  // GFM_FOURIER_BASIS_HPP
