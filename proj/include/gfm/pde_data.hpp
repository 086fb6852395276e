#ifndef GFM_PDE_DATA_HPP
#define GFM_PDE_DATA_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gfm/tensor.hpp"

namespace gfm {

// Discretized solution field. coords hold normalized ([-1, 1] per axis)
// lattice coordinates in row-major grid order; the physical axis ranges are
// kept in `coefficients` under keys axis<i>_lo / axis<i>_hi so masks and
// diagnostics can work in physical units.
struct FieldSample {
  std::string id;
  Tensor coords;                 // [num_points, coord_dim]
  Tensor values;                 // [num_points, value_dim]
  std::vector<int64_t> grid_dims;
  std::map<std::string, double> coefficients;

  int64_t num_points() const { return coords.dim(0); }
  int coord_dim() const { return static_cast<int>(coords.dim(1)); }
  int value_dim() const { return static_cast<int>(values.dim(1)); }
  double coefficient(const std::string& name) const;
  // Physical range of an axis, from the stored metadata.
  std::pair<double, double> axis_range(int axis) const;
  void validate() const;
};

struct PairedSample {
  std::string id;
  FieldSample field_a;
  FieldSample field_u;
};

struct AxisRange {
  double lo = -1.0;
  double hi = 1.0;
  bool exclusive_hi = false;  // periodic axes omit the right endpoint
};

// Row-major lattice over the given physical ranges (inclusive endpoints
// unless the range is marked exclusive). Axis 0 varies slowest.
Tensor make_coord_grid(const std::vector<int64_t>& grid_dims,
                       const std::vector<AxisRange>& axis_ranges);

// physical -> normalized [-1, 1]
inline double normalize_coord(double p, double lo, double hi) {
  return 2.0 * (p - lo) / (hi - lo) - 1.0;
}
inline double denormalize_coord(double c, double lo, double hi) {
  return lo + (c + 1.0) * (hi - lo) / 2.0;
}

// u(x, t) = 1 + sin(x - beta t) on x in [0, 2 pi) (periodic), t in [0, 1].
std::vector<FieldSample> gen_convection(const std::vector<double>& betas, int nx,
                                        int nt);

// Analytic (source q, solution u) pair on an n x n grid over [-1, 1]^2:
//   u = k^2 sin(a1 pi x) sin(a2 pi y)
//   q = (-(a1 pi)^2 - (a2 pi)^2 + k^2) sin(a1 pi x) sin(a2 pi y)
// n must be at least 4 * max(a1, a2) (Nyquist margin).
std::vector<PairedSample> gen_helmholtz_pair(
    const std::vector<std::pair<double, double>>& a_pairs, double k, int n);

// Single-field variant: the u fields only.
std::vector<FieldSample> gen_helmholtz(
    const std::vector<std::pair<double, double>>& a_pairs, double k, int n);

struct KsConfig {
  double domain_length = 64.0;
  double nu = 1.0;
  double dt = 0.05;
  double t_end = 12.75;
  int record_nx = 256;
  int record_nt = 256;
  int solver_nx = 0;  // 0: use record_nx; must be a power of two
  // 21 initial-condition modes. Explicit vectors take precedence; otherwise
  // amplitudes ~ U[-0.5, 0.5], integer wavenumbers ~ U{1..8}, phases
  // ~ U[0, 2 pi), drawn from `seed`.
  std::vector<double> ic_amplitudes;
  std::vector<double> ic_wavenumbers;
  std::vector<double> ic_phases;
  uint64_t seed = 0;
  bool disable_nonlinear = false;  // linear-solver diagnostic mode
  std::string id = "ks";

  void validate() const;
};

// Integrates u_t + u u_x + u_xx + nu u_xxxx = 0 with periodic boundary on
// [0, L] using an ETDRK4 exponential integrator; the nonlinear term is
// formed in physical space with 2/3-rule dealiasing. Aborts when
// max |u| > 1e6, reporting the step index.
FieldSample gen_ks(const KsConfig& config);

// Dataset container format (GFMD). Paired samples are stored flattened as
// two consecutive fields with "/a" and "/u" id suffixes.
void save_dataset(const std::string& path, const std::vector<FieldSample>& samples);
std::vector<FieldSample> load_dataset(const std::string& path);

void save_paired_dataset(const std::string& path,
                         const std::vector<PairedSample>& pairs);
std::vector<PairedSample> group_pairs(const std::vector<FieldSample>& samples);
bool is_paired_dataset(const std::vector<FieldSample>& samples);

}  // namespace gfm

#endif  // GFM_PDE_DATA_HPP
