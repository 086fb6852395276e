#include "gfm/fourier_basis.hpp"

#include <cmath>
#include <numbers>

#include "gfm/common.hpp"

namespace gfm {

void BasisConfig::validate() const {
  if (n_low <= 0 || n_high <= 0 || n_phase <= 0)
    throw_config("basis: n_low, n_high, n_phase must be positive");
  if (m_points < 2) throw_config("basis: m_points must be >= 2");
}

double FourierBasis::grid_point(int m) const {
  const double lo = -t_max / 2.0;
  const double hi = t_max / 2.0;
  return lo + (hi - lo) * static_cast<double>(m) / static_cast<double>(cols() - 1);
}

FourierBasis build_basis(const BasisConfig& config) {
  config.validate();
  const int d_total = config.rows();
  const int m = config.m_points;

  FourierBasis basis;
  basis.t_max = 2.0 * std::numbers::pi * static_cast<double>(config.n_low);
  basis.frequencies.reserve(static_cast<size_t>(d_total));
  basis.phases.reserve(static_cast<size_t>(d_total));

  std::vector<double> phase_grid(static_cast<size_t>(config.n_phase));
  if (config.random_phases) {
    Rng rng(config.seed);
    for (double& q : phase_grid) q = rng.uniform(0.0, 2.0 * std::numbers::pi);
  } else {
    for (int j = 0; j < config.n_phase; ++j)
      phase_grid[static_cast<size_t>(j)] =
          2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(config.n_phase);
  }

  // Low block first, then high; frequency-major, phase-minor. The overlap
  // at frequency 1 (last low entry, first high entry) is intentional: the
  // row count is exactly (n_low + n_high) * n_phase.
  for (int i = 1; i <= config.n_low; ++i) {
    const double w = static_cast<double>(i) / static_cast<double>(config.n_low);
    for (double q : phase_grid) {
      basis.frequencies.push_back(w);
      basis.phases.push_back(q);
    }
  }
  for (int i = 1; i <= config.n_high; ++i) {
    const double w = static_cast<double>(i);
    for (double q : phase_grid) {
      basis.frequencies.push_back(w);
      basis.phases.push_back(q);
    }
  }

  basis.matrix = Tensor({d_total, m});
  for (int d = 0; d < d_total; ++d) {
    const double w = basis.frequencies[static_cast<size_t>(d)];
    const double q = basis.phases[static_cast<size_t>(d)];
    for (int j = 0; j < m; ++j)
      basis.matrix.at(d, j) = std::cos(w * basis.grid_point(j) + q);
  }
  return basis;
}

std::vector<FourierBasis> layer_bases(const BasisConfig& config,
                                      std::span<const int> layer_input_dims) {
  if (layer_input_dims.empty()) throw_config("layer_bases: no layers given");
  std::vector<FourierBasis> out;
  out.reserve(layer_input_dims.size());
  for (int dim : layer_input_dims) {
    if (dim < 2) throw_config("layer_bases: layer input dim must be >= 2");
    BasisConfig c = config;
    c.m_points = dim;
    out.push_back(build_basis(c));
  }
  return out;
}

}  // namespace gfm
