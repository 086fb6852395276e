#include "gfm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gfm/common.hpp"
#include "gfm/kernels.hpp"

namespace gfm {

namespace {
constexpr double kPi = std::numbers::pi;
}

double mse(const Tensor& pred, const Tensor& truth) {
  if (!pred.same_dims(truth))
    throw_shape("mse: dims " + pred.dims_str() + " vs " + truth.dims_str());
  return kernels::reduce_sq_diff(pred.data(), truth.data(), pred.numel()) /
         static_cast<double>(pred.numel());
}

double psnr(const Tensor& pred, const Tensor& truth) {
  const auto [lo, hi] = std::minmax_element(truth.span().begin(), truth.span().end());
  const double peak = *hi - *lo;
  if (peak <= 0.0) throw_numeric("psnr: constant truth field (zero peak range)");
  return 10.0 * std::log10(peak * peak / mse(pred, truth));
}

double rel_l2(const Tensor& pred, const Tensor& truth) {
  if (!pred.same_dims(truth))
    throw_shape("rel_l2: dims " + pred.dims_str() + " vs " + truth.dims_str());
  double num = 0.0, den = 0.0;
  for (int64_t i = 0; i < pred.numel(); ++i) {
    const double d = pred[i] - truth[i];
    num += d * d;
    den += truth[i] * truth[i];
  }
  if (den <= 0.0) throw_numeric("rel_l2: zero-norm truth");
  return std::sqrt(num / den);
}

MetricReport make_report(std::vector<SampleMetrics> rows) {
  MetricReport r;
  r.rows = std::move(rows);
  const double n = static_cast<double>(r.rows.size());
  if (r.rows.empty()) return r;
  for (const auto& s : r.rows) {
    r.mean_mse += s.mse;
    r.mean_psnr += s.psnr;
    r.mean_rel_l2 += s.rel_l2;
  }
  r.mean_mse /= n;
  r.mean_psnr /= n;
  r.mean_rel_l2 /= n;
  for (const auto& s : r.rows) {
    r.std_mse += (s.mse - r.mean_mse) * (s.mse - r.mean_mse);
    r.std_psnr += (s.psnr - r.mean_psnr) * (s.psnr - r.mean_psnr);
    r.std_rel_l2 += (s.rel_l2 - r.mean_rel_l2) * (s.rel_l2 - r.mean_rel_l2);
  }
  r.std_mse = std::sqrt(r.std_mse / n);
  r.std_psnr = std::sqrt(r.std_psnr / n);
  r.std_rel_l2 = std::sqrt(r.std_rel_l2 / n);
  return r;
}

std::vector<double> residual_spectrum(const FieldSample& truth, const Tensor& pred,
                                      int axis) {
  if (!pred.same_dims(truth.values))
    throw_shape("residual_spectrum: pred dims " + pred.dims_str() + " vs " +
                truth.values.dims_str());
  if (truth.value_dim() != 1)
    throw_shape("residual_spectrum: scalar fields only");
  const int rank = static_cast<int>(truth.grid_dims.size());
  if (axis < 0 || axis >= rank) throw_logic("residual_spectrum: axis out of range");
  const int64_t n = truth.grid_dims[static_cast<size_t>(axis)];

  // stride bookkeeping for the grid layout (row-major, axis 0 slowest)
  std::vector<int64_t> strides(truth.grid_dims.size());
  int64_t acc = 1;
  for (int a = rank - 1; a >= 0; --a) {
    strides[static_cast<size_t>(a)] = acc;
    acc *= truth.grid_dims[static_cast<size_t>(a)];
  }
  const int64_t axis_stride = strides[static_cast<size_t>(axis)];
  const int64_t lines = truth.num_points() / n;

  // Uniform lattice check along the axis (constant normalized spacing).
  {
    const Tensor& c = truth.coords;
    if (n >= 3) {
      const double d0 = c.at(axis_stride, axis) - c.at(0, axis);
      for (int64_t i = 2; i < n; ++i) {
        const double di = c.at(i * axis_stride, axis) - c.at((i - 1) * axis_stride, axis);
        if (std::abs(di - d0) > 1e-9 * std::max(1.0, std::abs(d0)))
          throw_numeric("residual_spectrum: non-uniform grid along axis " +
                        std::to_string(axis));
      }
    }
  }

  const int64_t bins = n / 2 + 1;
  std::vector<double> spectrum(static_cast<size_t>(bins), 0.0);
  std::vector<double> line(static_cast<size_t>(n));

  for (int64_t li = 0; li < lines; ++li) {
    // base flat index of this line: enumerate the off-axis lattice
    int64_t rem = li, base = 0;
    for (int a = rank - 1; a >= 0; --a) {
      if (a == axis) continue;
      const int64_t na = truth.grid_dims[static_cast<size_t>(a)];
      base += (rem % na) * strides[static_cast<size_t>(a)];
      rem /= na;
    }
    for (int64_t i = 0; i < n; ++i)
      line[static_cast<size_t>(i)] =
          pred[base + i * axis_stride] - truth.values[base + i * axis_stride];
    for (int64_t kbin = 0; kbin < bins; ++kbin) {
      double re = 0.0, im = 0.0;
      for (int64_t i = 0; i < n; ++i) {
        const double th = 2.0 * kPi * static_cast<double>(kbin) *
                          static_cast<double>(i) / static_cast<double>(n);
        re += line[static_cast<size_t>(i)] * std::cos(th);
        im -= line[static_cast<size_t>(i)] * std::sin(th);
      }
      double e = (re * re + im * im) / static_cast<double>(n);
      // fold the conjugate bin (equal for real signals)
      if (kbin != 0 && !(n % 2 == 0 && kbin == n / 2)) e *= 2.0;
      spectrum[static_cast<size_t>(kbin)] += e;
    }
  }
  for (double& e : spectrum) e /= static_cast<double>(lines);
  return spectrum;
}

Tensor two_tone_signal(int n, int f1, int f2) {
  Tensor t({n, 1});
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n);
    t[i] = std::sin(2.0 * kPi * f1 * x) + std::sin(2.0 * kPi * f2 * x);
  }
  return t;
}

FreqProbeNet::FreqProbeNet(int grid_n, int hidden, double omega0,
                           const BasisConfig& basis, uint64_t seed, bool reparam)
    : grid_n_(grid_n), hidden_(hidden), omega0_(omega0), reparam_(reparam) {
  coords_ = Tensor({grid_n, 1});
  for (int i = 0; i < grid_n; ++i)
    coords_[i] = static_cast<double>(i) / static_cast<double>(grid_n);

  Rng rng(seed);
  auto fill = [&](Tensor& t, double bound) {
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-bound, bound);
  };
  first_w_ = Tensor({hidden, 1});
  fill(first_w_, 1.0);
  first_b_ = Tensor({hidden});
  fill(first_b_, 1.0);
  const double hidden_bound = std::sqrt(6.0 / hidden) / omega0;
  head_w_ = Tensor({1, hidden});
  fill(head_w_, hidden_bound);
  head_b_ = Tensor({1});
  bias_ = Tensor({hidden});

  if (reparam) {
    BasisConfig bc = basis;
    bc.m_points = hidden;
    FourierBasis fb = build_basis(bc);
    basis_matrix_ = fb.matrix;
    const int64_t D = basis_matrix_.dim(0);
    double mean_col_sq = 0.0;
    for (int64_t j = 0; j < hidden; ++j) {
      double s = 0.0;
      for (int64_t t = 0; t < D; ++t)
        s += basis_matrix_.at(t, j) * basis_matrix_.at(t, j);
      mean_col_sq += s;
    }
    mean_col_sq /= static_cast<double>(hidden);
    Tensor s({hidden, D});
    fill(s, hidden_bound / std::sqrt(mean_col_sq));
    examined_ = Parameter("probe.coeffs", std::move(s));
  } else {
    Tensor w({hidden, hidden});
    fill(w, hidden_bound);
    examined_ = Parameter("probe.weights", std::move(w));
  }
}

Graph::Id FreqProbeNet::build_forward(Graph& g, bool trainable) {
  Graph::Id h = g.sin(g.scale(
      g.add(g.matmul(g.input(coords_), g.input(first_w_), false, true),
            g.input(first_b_)),
      omega0_));
  Graph::Id wnode = trainable ? g.param(examined_) : g.input(examined_.value);
  Graph::Id w_eff =
      reparam_ ? g.matmul(wnode, g.input(basis_matrix_)) : wnode;
  h = g.sin(g.add(g.matmul(h, w_eff, false, true), g.input(bias_)));
  return g.add(g.matmul(h, g.input(head_w_), false, true), g.input(head_b_));
}

Tensor FreqProbeNet::predict() const {
  Graph g;
  auto& self = const_cast<FreqProbeNet&>(*this);
  return g.value(self.build_forward(g, false));
}

Graph::Id FreqProbeNet::build_bin_energy(Graph& g, const Tensor& target, int freq) {
  if (target.numel() != grid_n_)
    throw_shape("bin_energy: target length " + std::to_string(target.numel()) +
                " vs grid " + std::to_string(grid_n_));
  Tensor t2 = target.rank() == 2
                  ? target
                  : Tensor({grid_n_, 1}, {target.span().begin(), target.span().end()});
  Graph::Id pred = build_forward(g, true);
  Graph::Id resid = g.sub(pred, g.input(t2));
  // projection rows: cos and -sin at the bin frequency
  Tensor proj({2, grid_n_});
  for (int i = 0; i < grid_n_; ++i) {
    const double th = 2.0 * kPi * static_cast<double>(freq) *
                      static_cast<double>(i) / static_cast<double>(grid_n_);
    proj.at(0, i) = std::cos(th);
    proj.at(1, i) = -std::sin(th);
  }
  Graph::Id comps = g.matmul(g.input(proj), resid);  // [2, 1]
  const double fold =
      (freq != 0 && !(grid_n_ % 2 == 0 && freq == grid_n_ / 2)) ? 2.0 : 1.0;
  return g.scale(g.sum(g.mul(comps, comps)), fold / static_cast<double>(grid_n_));
}

GradRatioReport grad_freq_ratio(const GradRatioConfig& cfg, const Tensor& target) {
  if (cfg.f1 <= cfg.f2 || cfg.f2 <= 0)
    throw_config("grad_freq_ratio: need f1 > f2 > 0");
  if (cfg.seeds < 1) throw_config("grad_freq_ratio: seeds must be >= 1");

  GradRatioReport rep;
  rep.f1 = cfg.f1;
  rep.f2 = cfg.f2;

  auto mean_entry_ratio = [&](FreqProbeNet& net) {
    // residual sanity: a diagnostic on an exactly-fit target is degenerate
    Tensor resid = net.predict();
    double rnorm = 0.0;
    for (int64_t i = 0; i < resid.numel(); ++i) {
      const double d = resid[i] - target[i];
      rnorm += d * d;
    }
    if (rnorm == 0.0) throw_numeric("grad_freq_ratio: residual is identically zero");

    net.examined().zero_grad();
    {
      Graph g;
      g.backward(net.build_bin_energy(g, target, cfg.f1));
    }
    Tensor g1 = net.examined().grad;
    net.examined().zero_grad();
    {
      Graph g;
      g.backward(net.build_bin_energy(g, target, cfg.f2));
    }
    const Tensor& g2 = net.examined().grad;
    double acc = 0.0;
    for (int64_t i = 0; i < g1.numel(); ++i)
      acc += std::abs(g1[i]) / std::max(std::abs(g2[i]), 1e-12);
    return acc / static_cast<double>(g1.numel());
  };

  for (int s = 0; s < cfg.seeds; ++s) {
    const uint64_t seed = mix_seed(cfg.seed0, static_cast<uint64_t>(s));
    FreqProbeNet rp(cfg.grid_n, cfg.hidden, cfg.omega0, cfg.basis, seed, true);
    FreqProbeNet dn(cfg.grid_n, cfg.hidden, cfg.omega0, cfg.basis, seed, false);
    rep.per_seed_reparam.push_back(mean_entry_ratio(rp));
    rep.per_seed_standard.push_back(mean_entry_ratio(dn));
  }
  for (double v : rep.per_seed_reparam) rep.ratio_reparam += v;
  for (double v : rep.per_seed_standard) rep.ratio_standard += v;
  rep.ratio_reparam /= static_cast<double>(cfg.seeds);
  rep.ratio_standard /= static_cast<double>(cfg.seeds);
  return rep;
}

}  // namespace gfm
