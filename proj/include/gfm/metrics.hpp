#ifndef GFM_METRICS_HPP
#define GFM_METRICS_HPP

#include <string>
#include <vector>

#include "gfm/fourier_basis.hpp"
#include "gfm/graph.hpp"
#include "gfm/pde_data.hpp"

namespace gfm {

double mse(const Tensor& pred, const Tensor& truth);

// 10 log10(peak^2 / mse) with peak = max(truth) - min(truth). Errors on a
// constant truth field.
double psnr(const Tensor& pred, const Tensor& truth);

// ||pred - truth||_2 / ||truth||_2
double rel_l2(const Tensor& pred, const Tensor& truth);

struct SampleMetrics {
  std::string id;
  double mse = 0.0, psnr = 0.0, rel_l2 = 0.0;
};

// Aggregates are means / standard deviations of the per-sample values
// (PSNR is averaged per sample, not recomputed from pooled MSE).
struct MetricReport {
  std::vector<SampleMetrics> rows;
  double mean_mse = 0.0, mean_psnr = 0.0, mean_rel_l2 = 0.0;
  double std_mse = 0.0, std_psnr = 0.0, std_rel_l2 = 0.0;
};

MetricReport make_report(std::vector<SampleMetrics> rows);

// One-sided power spectrum of (pred - truth) along one grid axis, averaged
// over the other axes. Bin k holds |c_k|^2 / N with the conjugate bin
// folded in, so the bins sum to N times the mean-square residual.
std::vector<double> residual_spectrum(const FieldSample& truth, const Tensor& pred,
                                      int axis);

// Diagnostic network for the frequency-gradient-ratio measurement: a sine
// input layer, one examined hidden layer (dense, or coefficients times a
// fixed Fourier basis), and an affine head, evaluated on a uniform 1-D grid.
class FreqProbeNet {
 public:
  FreqProbeNet(int grid_n, int hidden, double omega0, const BasisConfig& basis,
               uint64_t seed, bool reparam);

  Parameter& examined() { return examined_; }

  // Energy of the residual's DFT bin at `freq` (conjugate bin folded in),
  // as a scalar graph node; only the examined layer is trainable.
  Graph::Id build_bin_energy(Graph& g, const Tensor& target, int freq);

  Tensor predict() const;  // [grid_n, 1]

 private:
  Graph::Id build_forward(Graph& g, bool trainable);

  int grid_n_, hidden_;
  double omega0_;
  bool reparam_;
  Tensor coords_;
  Tensor first_w_, first_b_, head_w_, head_b_, bias_;
  Tensor basis_matrix_;
  Parameter examined_;
};

struct GradRatioConfig {
  int grid_n = 128;
  int hidden = 64;
  double omega0 = 30.0;
  BasisConfig basis{.n_low = 4, .n_high = 16, .n_phase = 8, .m_points = 64};
  int f1 = 8;
  int f2 = 1;
  int seeds = 20;
  uint64_t seed0 = 1;
};

struct GradRatioReport {
  double f1 = 0.0, f2 = 0.0;
  double ratio_reparam = 0.0, ratio_standard = 0.0;  // means over seeds
  std::vector<double> per_seed_reparam, per_seed_standard;
};

// At initialization, the mean over examined-layer entries of
// |dL(f1)/dp| / max(|dL(f2)/dp|, 1e-12), where L(f) is the residual's DFT
// bin energy at f; measured for the reparameterized coefficients and for
// the dense weights, averaged over seeds.
GradRatioReport grad_freq_ratio(const GradRatioConfig& cfg, const Tensor& target);

// sin(2 pi f1 j / n) + sin(2 pi f2 j / n) on j = 0..n-1, as [n, 1].
Tensor two_tone_signal(int n, int f1, int f2);

}  // namespace gfm

#endif  // GFM_METRICS_HPP
