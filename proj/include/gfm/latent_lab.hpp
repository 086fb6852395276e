#ifndef GFM_LATENT_LAB_HPP
#define GFM_LATENT_LAB_HPP

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gfm/functa_meta.hpp"
#include "gfm/modulated_inr.hpp"
#include "gfm/pde_data.hpp"

namespace gfm {

enum class SplineKind {
  Natural,  // natural cubic spline through all knots
  Local,    // piecewise Lagrange cubic over the 4 nearest knots
};

// 1-D interpolator over strictly increasing abscissae. Exact at knots.
class CubicSpline {
 public:
  CubicSpline(std::span<const double> x, std::span<const double> y,
              SplineKind kind = SplineKind::Natural);
  // Errors outside [x_front, x_back]: interpolation only.
  double eval(double t) const;

 private:
  SplineKind kind_;
  std::vector<double> x_, y_, m_;  // m_: second derivatives (natural mode)
};

// (coefficient, latent) rows sorted by coefficient; at least 4 rows.
struct LatentTable {
  std::vector<double> coefficients;
  std::vector<Tensor> latents;

  static LatentTable make(std::vector<std::pair<double, Tensor>> rows);
  int latent_dim() const;
  size_t size() const { return coefficients.size(); }
  void validate() const;
};

// Per-dimension spline interpolation of the latent at `target`.
Tensor interpolate_latent(const LatentTable& table, double target,
                          SplineKind kind = SplineKind::Natural);

struct Setting1Row {
  double coefficient = 0.0;
  double mse = 0.0, psnr = 0.0;
};

// Decode interpolated latents through the frozen model and score against
// generated ground truth. Pure evaluation: no gradients anywhere.
std::vector<Setting1Row> setting1_eval(
    const ModulatedInr& model, const LatentTable& table,
    const std::vector<double>& targets,
    const std::function<FieldSample(double)>& truth_generator,
    SplineKind kind = SplineKind::Natural);

struct Setting2Result {
  Tensor latent;
  double observed_mse = 0.0, observed_psnr = 0.0;
  std::optional<double> unobserved_mse, unobserved_psnr;
};

// Fit only the latent on the observed coordinate region of one sample, then
// report metrics separately over the observed region and its complement
// (absent when the complement is empty).
Setting2Result setting2_eval(const ModulatedInr& model, const FieldSample& sample,
                             const CoordMask& observed, int steps, double eta);

// CSV: coefficient, z_0..z_{dim-1}; one row per knot, then one per extra
// target (interpolated), 17 significant digits.
void export_latent_trajectories(const LatentTable& table, const std::string& path,
                                const std::vector<double>& extra_targets = {},
                                SplineKind kind = SplineKind::Natural);

}  // namespace gfm

#endif  // GFM_LATENT_LAB_HPP
