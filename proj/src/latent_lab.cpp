#include "gfm/latent_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "gfm/common.hpp"
#include "gfm/metrics.hpp"

namespace gfm {

CubicSpline::CubicSpline(std::span<const double> x, std::span<const double> y,
                         SplineKind kind)
    : kind_(kind), x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
  const size_t n = x_.size();
  if (n < 4) throw_config("cubic spline: need at least 4 knots");
  if (y_.size() != n) throw_logic("cubic spline: x/y length mismatch");
  for (size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1]))
      throw_config("cubic spline: abscissae must be strictly increasing");

  if (kind_ != SplineKind::Natural) return;

  // Second derivatives from the tridiagonal natural-spline system
  // (Thomas algorithm); m_0 = m_{n-1} = 0.
  m_.assign(n, 0.0);
  std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
  diag[0] = 1.0;
  diag[n - 1] = 1.0;
  for (size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x_[i] - x_[i - 1];
    const double h1 = x_[i + 1] - x_[i];
    diag[i] = 2.0 * (h0 + h1);
    upper[i] = h1;
    rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
  }
  // forward sweep (lower entry of row i is h0, zeroed against row i-1)
  for (size_t i = 2; i + 1 < n; ++i) {
    const double h0 = x_[i] - x_[i - 1];
    const double w = h0 / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  for (size_t i = n - 2; i >= 1; --i) {
    m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
    if (i == 1) break;
  }
}

double CubicSpline::eval(double t) const {
  const size_t n = x_.size();
  if (t < x_.front() || t > x_.back())
    throw_config("cubic spline: target " + std::to_string(t) +
                 " outside knot range [" + std::to_string(x_.front()) + ", " +
                 std::to_string(x_.back()) + "]");
  // containing segment
  size_t i = static_cast<size_t>(
      std::upper_bound(x_.begin(), x_.end(), t) - x_.begin());
  if (i > 0) --i;
  if (i >= n - 1) i = n - 2;
  if (t == x_[i]) return y_[i];  // exact at knots
  if (t == x_[i + 1]) return y_[i + 1];

  if (kind_ == SplineKind::Natural) {
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - t) / h;
    const double b = (t - x_[i]) / h;
    return a * y_[i] + b * y_[i + 1] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
  }

  // Local mode: Lagrange cubic through the 4 knots nearest the segment.
  size_t lo = i == 0 ? 0 : i - 1;
  if (lo + 3 >= n) lo = n - 4;
  double acc = 0.0;
  for (size_t j = lo; j < lo + 4; ++j) {
    double w = 1.0;
    for (size_t k = lo; k < lo + 4; ++k) {
      if (k == j) continue;
      w *= (t - x_[k]) / (x_[j] - x_[k]);
    }
    acc += w * y_[j];
  }
  return acc;
}

LatentTable LatentTable::make(std::vector<std::pair<double, Tensor>> rows) {
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  LatentTable t;
  for (auto& [c, z] : rows) {
    t.coefficients.push_back(c);
    t.latents.push_back(std::move(z));
  }
  t.validate();
  return t;
}

int LatentTable::latent_dim() const {
  return latents.empty() ? 0 : static_cast<int>(latents.front().numel());
}

void LatentTable::validate() const {
  if (coefficients.size() != latents.size())
    throw_logic("latent table: row count mismatch");
  if (coefficients.size() < 4)
    throw_config("latent table: need at least 4 rows for cubic interpolation");
  for (size_t i = 1; i < coefficients.size(); ++i)
    if (!(coefficients[i] > coefficients[i - 1]))
      throw_config("latent table: coefficients must be strictly increasing");
  for (const Tensor& z : latents)
    if (z.numel() != latents.front().numel())
      throw_shape("latent table: inconsistent latent dims");
}

Tensor interpolate_latent(const LatentTable& table, double target, SplineKind kind) {
  table.validate();
  const int dim = table.latent_dim();
  Tensor out({dim});
  std::vector<double> column(table.size());
  for (int d = 0; d < dim; ++d) {
    for (size_t r = 0; r < table.size(); ++r) column[r] = table.latents[r][d];
    CubicSpline sp(table.coefficients, column, kind);
    out[d] = sp.eval(target);
  }
  return out;
}

std::vector<Setting1Row> setting1_eval(
    const ModulatedInr& model, const LatentTable& table,
    const std::vector<double>& targets,
    const std::function<FieldSample(double)>& truth_generator, SplineKind kind) {
  std::vector<Setting1Row> out;
  out.reserve(targets.size());
  for (double c : targets) {
    const Tensor z = interpolate_latent(table, c, kind);
    const FieldSample truth = truth_generator(c);
    const Tensor pred = model.decode(z, truth.coords);
    Setting1Row row;
    row.coefficient = c;
    row.mse = mse(pred, truth.values);
    row.psnr = psnr(pred, truth.values);
    out.push_back(row);
  }
  return out;
}

Setting2Result setting2_eval(const ModulatedInr& model, const FieldSample& sample,
                             const CoordMask& observed, int steps, double eta) {
  auto obs_rows = mask_indices(sample, observed);
  if (obs_rows.empty()) throw_config("setting2: observed region is empty");

  FitLatentResult fit =
      fit_latent(model, sample, Tensor(), steps, eta, &observed);

  Setting2Result res;
  res.latent = fit.latent;

  const Tensor obs_coords = gather_rows(sample.coords, obs_rows);
  const Tensor obs_truth = gather_rows(sample.values, obs_rows);
  const Tensor obs_pred = model.decode(res.latent, obs_coords);
  res.observed_mse = mse(obs_pred, obs_truth);
  res.observed_psnr = psnr(obs_pred, obs_truth);

  std::vector<int64_t> rest;
  {
    std::vector<char> is_obs(static_cast<size_t>(sample.num_points()), 0);
    for (int64_t r : obs_rows) is_obs[static_cast<size_t>(r)] = 1;
    for (int64_t i = 0; i < sample.num_points(); ++i)
      if (!is_obs[static_cast<size_t>(i)]) rest.push_back(i);
  }
  if (!rest.empty()) {
    const Tensor coords = gather_rows(sample.coords, rest);
    const Tensor truth = gather_rows(sample.values, rest);
    const Tensor pred = model.decode(res.latent, coords);
    res.unobserved_mse = mse(pred, truth);
    res.unobserved_psnr = psnr(pred, truth);
  }
  return res;
}

void export_latent_trajectories(const LatentTable& table, const std::string& path,
                                const std::vector<double>& extra_targets,
                                SplineKind kind) {
  table.validate();
  std::ofstream out(path);
  if (!out) throw_io("cannot open '" + path + "' for writing");
  const int dim = table.latent_dim();
  out << "coefficient";
  for (int d = 0; d < dim; ++d) out << ",z_" << d;
  out << "\n";
  char buf[32];
  auto emit = [&](double c, const Tensor& z) {
    std::snprintf(buf, sizeof buf, "%.17g", c);
    out << buf;
    for (int d = 0; d < dim; ++d) {
      std::snprintf(buf, sizeof buf, "%.17g", z[d]);
      out << "," << buf;
    }
    out << "\n";
  };
  for (size_t r = 0; r < table.size(); ++r)
    emit(table.coefficients[r], table.latents[r]);
  for (double c : extra_targets) emit(c, interpolate_latent(table, c, kind));
  if (!out) throw_io("write to '" + path + "' failed");
}

}  // namespace gfm
