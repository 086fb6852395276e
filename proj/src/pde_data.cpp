#include "gfm/pde_data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>

#include "gfm/common.hpp"
#include "gfm/fft.hpp"
#include "binary_io.hpp"

namespace gfm {

namespace {
constexpr double kPi = std::numbers::pi;

std::string fmt_g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}
}  // namespace

double FieldSample::coefficient(const std::string& name) const {
  auto it = coefficients.find(name);
  if (it == coefficients.end())
    throw_logic("sample '" + id + "': no coefficient '" + name + "'");
  return it->second;
}

std::pair<double, double> FieldSample::axis_range(int axis) const {
  const std::string base = "axis" + std::to_string(axis);
  return {coefficient(base + "_lo"), coefficient(base + "_hi")};
}

void FieldSample::validate() const {
  int64_t n = 1;
  for (int64_t d : grid_dims) n *= d;
  if (coords.rank() != 2 || values.rank() != 2)
    throw_shape("sample '" + id + "': coords/values must be rank-2");
  if (coords.dim(0) != n || values.dim(0) != n)
    throw_shape("sample '" + id + "': grid dims product " + std::to_string(n) +
                " != point count " + std::to_string(coords.dim(0)));
}

Tensor make_coord_grid(const std::vector<int64_t>& grid_dims,
                       const std::vector<AxisRange>& axis_ranges) {
  if (grid_dims.empty() || grid_dims.size() != axis_ranges.size())
    throw_shape("make_coord_grid: need one axis range per grid dim");
  int64_t n = 1;
  for (int64_t d : grid_dims) {
    if (d < 1) throw_shape("make_coord_grid: dims must be >= 1");
    n *= d;
  }
  const int rank = static_cast<int>(grid_dims.size());
  Tensor out({n, rank});
  std::vector<int64_t> idx(grid_dims.size(), 0);
  for (int64_t p = 0; p < n; ++p) {
    for (int a = 0; a < rank; ++a) {
      const AxisRange& r = axis_ranges[static_cast<size_t>(a)];
      const int64_t na = grid_dims[static_cast<size_t>(a)];
      const int64_t i = idx[static_cast<size_t>(a)];
      double v;
      if (na == 1) {
        v = r.lo;
      } else if (r.exclusive_hi) {
        v = r.lo + (r.hi - r.lo) * static_cast<double>(i) / static_cast<double>(na);
      } else {
        v = r.lo + (r.hi - r.lo) * static_cast<double>(i) / static_cast<double>(na - 1);
      }
      out.at(p, a) = v;
    }
    // row-major increment, last axis fastest
    for (int a = rank - 1; a >= 0; --a) {
      if (++idx[static_cast<size_t>(a)] < grid_dims[static_cast<size_t>(a)]) break;
      idx[static_cast<size_t>(a)] = 0;
    }
  }
  return out;
}

std::vector<FieldSample> gen_convection(const std::vector<double>& betas, int nx,
                                        int nt) {
  if (nx < 2 || nt < 2) throw_config("gen_convection: nx, nt must be >= 2");
  std::vector<FieldSample> out;
  out.reserve(betas.size());
  const Tensor coords = make_coord_grid(
      {nx, nt}, {{-1.0, 1.0, /*exclusive_hi=*/true}, {-1.0, 1.0, false}});
  for (double beta : betas) {
    FieldSample s;
    s.id = "conv-b" + fmt_g(beta);
    s.grid_dims = {nx, nt};
    s.coords = coords;
    s.values = Tensor({static_cast<int64_t>(nx) * nt, 1});
    for (int i = 0; i < nx; ++i) {
      const double x = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(nx);
      for (int j = 0; j < nt; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(nt - 1);
        s.values[static_cast<int64_t>(i) * nt + j] = 1.0 + std::sin(x - beta * t);
      }
    }
    s.coefficients = {{"beta", beta},
                      {"axis0_lo", 0.0},
                      {"axis0_hi", 2.0 * kPi},
                      {"axis1_lo", 0.0},
                      {"axis1_hi", 1.0}};
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

FieldSample helmholtz_field(double a1, double a2, double k, int n, bool source) {
  FieldSample s;
  s.grid_dims = {n, n};
  s.coords = make_coord_grid({n, n}, {{-1.0, 1.0, false}, {-1.0, 1.0, false}});
  s.values = Tensor({static_cast<int64_t>(n) * n, 1});
  const double amp = source ? (-(a1 * kPi) * (a1 * kPi) - (a2 * kPi) * (a2 * kPi) + k * k)
                            : k * k;
  for (int i = 0; i < n; ++i) {
    const double x = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    for (int j = 0; j < n; ++j) {
      const double y = -1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(n - 1);
      s.values[static_cast<int64_t>(i) * n + j] =
          amp * std::sin(a1 * kPi * x) * std::sin(a2 * kPi * y);
    }
  }
  s.coefficients = {{"a1", a1},       {"a2", a2},       {"k", k},
                    {"axis0_lo", -1.0}, {"axis0_hi", 1.0},
                    {"axis1_lo", -1.0}, {"axis1_hi", 1.0}};
  return s;
}

void check_nyquist(double a1, double a2, int n) {
  const double amax = std::max(a1, a2);
  if (n < 4.0 * amax)
    throw_config("helmholtz: grid n = " + std::to_string(n) +
                 " below Nyquist margin 4*max(a1,a2) = " + fmt_g(4.0 * amax));
}

}  // namespace

std::vector<PairedSample> gen_helmholtz_pair(
    const std::vector<std::pair<double, double>>& a_pairs, double k, int n) {
  std::vector<PairedSample> out;
  out.reserve(a_pairs.size());
  for (auto [a1, a2] : a_pairs) {
    check_nyquist(a1, a2, n);
    PairedSample p;
    p.id = "helm-a" + fmt_g(a1) + "-" + fmt_g(a2);
    p.field_a = helmholtz_field(a1, a2, k, n, /*source=*/true);
    p.field_a.id = p.id + "/a";
    p.field_u = helmholtz_field(a1, a2, k, n, /*source=*/false);
    p.field_u.id = p.id + "/u";
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<FieldSample> gen_helmholtz(
    const std::vector<std::pair<double, double>>& a_pairs, double k, int n) {
  std::vector<FieldSample> out;
  out.reserve(a_pairs.size());
  for (auto [a1, a2] : a_pairs) {
    check_nyquist(a1, a2, n);
    FieldSample s = helmholtz_field(a1, a2, k, n, /*source=*/false);
    s.id = "helm-a" + fmt_g(a1) + "-" + fmt_g(a2);
    out.push_back(std::move(s));
  }
  return out;
}

void KsConfig::validate() const {
  if (domain_length <= 0.0 || nu <= 0.0) throw_config("ks: L and nu must be positive");
  if (dt <= 0.0 || t_end <= 0.0) throw_config("ks: dt and t_end must be positive");
  if (record_nx < 2 || record_nt < 2) throw_config("ks: record dims must be >= 2");
  const int nx = solver_nx > 0 ? solver_nx : record_nx;
  if (!is_power_of_two(static_cast<size_t>(nx)))
    throw_config("ks: solver grid " + std::to_string(nx) + " must be a power of two");
  if (nx % record_nx != 0)
    throw_config("ks: record_nx must divide the solver grid");
  const double steps_d = t_end / dt;
  const int64_t steps = static_cast<int64_t>(std::llround(steps_d));
  if (std::abs(steps_d - static_cast<double>(steps)) > 1e-9 || steps < 1)
    throw_config("ks: t_end must be an integer multiple of dt");
  if (steps % (record_nt - 1) != 0)
    throw_config("ks: step count " + std::to_string(steps) +
                 " not divisible by record_nt-1 = " + std::to_string(record_nt - 1));
  const bool have_ic =
      !ic_amplitudes.empty() || !ic_wavenumbers.empty() || !ic_phases.empty();
  if (have_ic && (ic_amplitudes.size() != 21 || ic_wavenumbers.size() != 21 ||
                  ic_phases.size() != 21))
    throw_config("ks: explicit initial condition needs exactly 21 modes");
}

FieldSample gen_ks(const KsConfig& config) {
  config.validate();
  using cplx = std::complex<double>;
  const int nx = config.solver_nx > 0 ? config.solver_nx : config.record_nx;
  const double L = config.domain_length;
  const double h = config.dt;
  const int64_t steps = static_cast<int64_t>(std::llround(config.t_end / config.dt));
  const int64_t stride_t = steps / (config.record_nt - 1);
  const int stride_x = nx / config.record_nx;

  // initial condition
  std::vector<double> amp = config.ic_amplitudes;
  std::vector<double> wav = config.ic_wavenumbers;
  std::vector<double> pha = config.ic_phases;
  if (amp.empty()) {
    Rng rng(config.seed);
    amp.resize(21);
    wav.resize(21);
    pha.resize(21);
    for (int i = 0; i < 21; ++i) {
      amp[static_cast<size_t>(i)] = rng.uniform(-0.5, 0.5);
      wav[static_cast<size_t>(i)] = static_cast<double>(1 + rng.uniform_int(8));
      pha[static_cast<size_t>(i)] = rng.uniform(0.0, 2.0 * kPi);
    }
  }
  std::vector<double> u(static_cast<size_t>(nx));
  for (int j = 0; j < nx; ++j) {
    const double x = L * static_cast<double>(j) / static_cast<double>(nx);
    double v = 0.0;
    for (int i = 0; i < 21; ++i)
      v += amp[static_cast<size_t>(i)] *
           std::sin(2.0 * kPi * wav[static_cast<size_t>(i)] * x / L +
                    pha[static_cast<size_t>(i)]);
    u[static_cast<size_t>(j)] = v;
  }

  // spectral operators
  std::vector<double> k(static_cast<size_t>(nx));
  for (int i = 0; i < nx; ++i) {
    const int m = i <= nx / 2 ? i : i - nx;
    k[static_cast<size_t>(i)] = 2.0 * kPi * static_cast<double>(m) / L;
  }
  std::vector<double> lin(static_cast<size_t>(nx));
  for (int i = 0; i < nx; ++i) {
    const double ki = k[static_cast<size_t>(i)];
    lin[static_cast<size_t>(i)] = ki * ki - config.nu * ki * ki * ki * ki;
  }
  std::vector<char> dealias(static_cast<size_t>(nx));
  for (int i = 0; i < nx; ++i) {
    const int m = i <= nx / 2 ? i : i - nx;
    dealias[static_cast<size_t>(i)] = std::abs(m) < nx / 3 ? 1 : 0;
  }

  // ETDRK4 coefficients; the phi-functions are evaluated by averaging over
  // a complex contour around each h*lin value for numerical stability.
  const int cm = 32;
  std::vector<double> E(static_cast<size_t>(nx)), E2(static_cast<size_t>(nx)),
      Q(static_cast<size_t>(nx)), f1(static_cast<size_t>(nx)),
      f2(static_cast<size_t>(nx)), f3(static_cast<size_t>(nx));
  for (int i = 0; i < nx; ++i) {
    const double hl = h * lin[static_cast<size_t>(i)];
    E[static_cast<size_t>(i)] = std::exp(hl);
    E2[static_cast<size_t>(i)] = std::exp(hl / 2.0);
    cplx q = 0, a = 0, b = 0, c = 0;
    for (int j = 0; j < cm; ++j) {
      const cplx r = std::polar(1.0, kPi * (static_cast<double>(j) + 0.5) /
                                         static_cast<double>(cm));
      const cplx z = hl + r;
      const cplx ez = std::exp(z);
      const cplx ez2 = std::exp(z / 2.0);
      q += (ez2 - 1.0) / z;
      a += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / (z * z * z);
      b += (2.0 + z + ez * (-2.0 + z)) / (z * z * z);
      c += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / (z * z * z);
    }
    const double inv = h / static_cast<double>(cm);
    Q[static_cast<size_t>(i)] = (q * inv).real();
    f1[static_cast<size_t>(i)] = (a * inv).real();
    f2[static_cast<size_t>(i)] = (b * inv).real();
    f3[static_cast<size_t>(i)] = (c * inv).real();
  }

  std::vector<cplx> v(static_cast<size_t>(nx));
  for (int i = 0; i < nx; ++i) v[static_cast<size_t>(i)] = u[static_cast<size_t>(i)];
  fft(v);

  // N(v) = -0.5 i k fft(real(ifft(v))^2), dealiased
  std::vector<cplx> scratch(static_cast<size_t>(nx));
  double step_max_abs_u = 0.0;
  auto nonlinear = [&](const std::vector<cplx>& vin, std::vector<cplx>& out) {
    if (config.disable_nonlinear) {
      std::fill(out.begin(), out.end(), cplx(0.0, 0.0));
      return;
    }
    scratch = vin;
    ifft(scratch);
    double mx = 0.0;
    for (int i = 0; i < nx; ++i) {
      const double ur = scratch[static_cast<size_t>(i)].real();
      mx = std::max(mx, std::abs(ur));
      scratch[static_cast<size_t>(i)] = ur * ur;
    }
    step_max_abs_u = mx;
    fft(scratch);
    for (int i = 0; i < nx; ++i) {
      if (!dealias[static_cast<size_t>(i)]) {
        out[static_cast<size_t>(i)] = 0.0;
      } else {
        out[static_cast<size_t>(i)] =
            cplx(0.0, -0.5 * k[static_cast<size_t>(i)]) * scratch[static_cast<size_t>(i)];
      }
    }
  };

  auto record_frame = [&](const std::vector<cplx>& vin, Tensor& values,
                          int64_t frame, int64_t record_nt) {
    scratch = vin;
    ifft(scratch);
    for (int i = 0; i < config.record_nx; ++i) {
      const double ur = scratch[static_cast<size_t>(i * stride_x)].real();
      if (!std::isfinite(ur) || std::abs(ur) > 1e6)
        throw_numeric("ks: blow-up detected at recorded frame " + std::to_string(frame));
      values[static_cast<int64_t>(i) * record_nt + frame] = ur;
    }
  };

  FieldSample s;
  s.id = config.id;
  s.grid_dims = {config.record_nx, config.record_nt};
  s.coords = make_coord_grid({config.record_nx, config.record_nt},
                             {{-1.0, 1.0, /*exclusive_hi=*/true}, {-1.0, 1.0, false}});
  s.values = Tensor({static_cast<int64_t>(config.record_nx) * config.record_nt, 1});
  record_frame(v, s.values, 0, config.record_nt);

  std::vector<cplx> nv(static_cast<size_t>(nx)), na(static_cast<size_t>(nx)),
      nb(static_cast<size_t>(nx)), nc(static_cast<size_t>(nx)),
      av(static_cast<size_t>(nx)), bv(static_cast<size_t>(nx)),
      cv(static_cast<size_t>(nx));
  int64_t frame = 1;
  for (int64_t step = 1; step <= steps; ++step) {
    nonlinear(v, nv);
    if (step_max_abs_u > 1e6)
      throw_numeric("ks: blow-up detected at step " + std::to_string(step));
    for (int i = 0; i < nx; ++i) {
      const auto si = static_cast<size_t>(i);
      av[si] = E2[si] * v[si] + Q[si] * nv[si];
    }
    nonlinear(av, na);
    for (int i = 0; i < nx; ++i) {
      const auto si = static_cast<size_t>(i);
      bv[si] = E2[si] * v[si] + Q[si] * na[si];
    }
    nonlinear(bv, nb);
    for (int i = 0; i < nx; ++i) {
      const auto si = static_cast<size_t>(i);
      cv[si] = E2[si] * av[si] + Q[si] * (2.0 * nb[si] - nv[si]);
    }
    nonlinear(cv, nc);
    for (int i = 0; i < nx; ++i) {
      const auto si = static_cast<size_t>(i);
      v[si] = E[si] * v[si] + nv[si] * f1[si] + 2.0 * (na[si] + nb[si]) * f2[si] +
              nc[si] * f3[si];
    }
    if (step % stride_t == 0) record_frame(v, s.values, frame++, config.record_nt);
  }

  s.coefficients = {{"nu", config.nu},
                    {"L", L},
                    {"dt", config.dt},
                    {"t_end", config.t_end},
                    {"seed", static_cast<double>(config.seed)},
                    {"axis0_lo", 0.0},
                    {"axis0_hi", L},
                    {"axis1_lo", 0.0},
                    {"axis1_hi", config.t_end}};
  return s;
}

// ---------------------------------------------------------------------------
// GFMD container
//
//   magic "GFMD" | u32 version=1 | u32 sample count
//   per sample:
//     u16 id length, id bytes
//     u8 coord_dim | u8 value_dim | u8 rank | rank x u32 grid dims
//     u16 coefficient count | per coefficient: u16 name length, name, f64
//     coords f64 block, values f64 block (row-major, little-endian)

namespace {
using detail::Reader;
using detail::Writer;
constexpr char kDatasetMagic[4] = {'G', 'F', 'M', 'D'};
}  // namespace

void save_dataset(const std::string& path, const std::vector<FieldSample>& samples) {
  Writer w(path);
  w.u8(static_cast<uint8_t>(kDatasetMagic[0]));
  w.u8(static_cast<uint8_t>(kDatasetMagic[1]));
  w.u8(static_cast<uint8_t>(kDatasetMagic[2]));
  w.u8(static_cast<uint8_t>(kDatasetMagic[3]));
  w.u32(1);
  w.u32(static_cast<uint32_t>(samples.size()));
  for (const FieldSample& s : samples) {
    s.validate();
    w.str(s.id);
    w.u8(static_cast<uint8_t>(s.coord_dim()));
    w.u8(static_cast<uint8_t>(s.value_dim()));
    w.u8(static_cast<uint8_t>(s.grid_dims.size()));
    for (int64_t d : s.grid_dims) w.u32(static_cast<uint32_t>(d));
    w.u16(static_cast<uint16_t>(s.coefficients.size()));
    for (const auto& [name, v] : s.coefficients) {
      w.str(name);
      w.f64(v);
    }
    w.f64_block(s.coords.data(), s.coords.numel());
    w.f64_block(s.values.data(), s.values.numel());
  }
  w.close();
}

std::vector<FieldSample> load_dataset(const std::string& path) {
  Reader r(path);
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.u8());
  if (std::memcmp(magic, kDatasetMagic, 4) != 0)
    throw_io("'" + path + "': bad magic bytes (not a GFMD dataset)");
  const uint32_t version = r.u32();
  if (version != 1)
    throw_io("'" + path + "': unsupported version " + std::to_string(version));
  const uint32_t count = r.u32();
  std::vector<FieldSample> out;
  out.reserve(count);
  for (uint32_t si = 0; si < count; ++si) {
    FieldSample s;
    s.id = r.str();
    const int coord_dim = r.u8();
    const int value_dim = r.u8();
    const int rank = r.u8();
    int64_t n = 1;
    for (int i = 0; i < rank; ++i) {
      s.grid_dims.push_back(r.u32());
      n *= s.grid_dims.back();
    }
    const uint16_t ncoef = r.u16();
    for (uint16_t i = 0; i < ncoef; ++i) {
      std::string name = r.str();
      s.coefficients[name] = r.f64();
    }
    s.coords = Tensor({n, coord_dim});
    r.f64_block(s.coords.data(), s.coords.numel());
    s.values = Tensor({n, value_dim});
    r.f64_block(s.values.data(), s.values.numel());
    out.push_back(std::move(s));
  }
  if (!r.at_eof())
    throw_io("'" + path + "': trailing bytes after sample " + std::to_string(count) +
             " at byte " + std::to_string(r.offset()));
  return out;
}

void save_paired_dataset(const std::string& path,
                         const std::vector<PairedSample>& pairs) {
  std::vector<FieldSample> flat;
  flat.reserve(pairs.size() * 2);
  for (const PairedSample& p : pairs) {
    flat.push_back(p.field_a);
    flat.push_back(p.field_u);
  }
  save_dataset(path, flat);
}

bool is_paired_dataset(const std::vector<FieldSample>& samples) {
  if (samples.empty() || samples.size() % 2 != 0) return false;
  for (const FieldSample& s : samples)
    if (!s.id.ends_with("/a") && !s.id.ends_with("/u")) return false;
  return true;
}

std::vector<PairedSample> group_pairs(const std::vector<FieldSample>& samples) {
  std::map<std::string, PairedSample> by_stem;
  std::vector<std::string> order;
  for (const FieldSample& s : samples) {
    const bool is_a = s.id.ends_with("/a");
    const bool is_u = s.id.ends_with("/u");
    if (!is_a && !is_u)
      throw_io("paired dataset: sample '" + s.id + "' has no /a or /u suffix");
    const std::string stem = s.id.substr(0, s.id.size() - 2);
    if (!by_stem.count(stem)) order.push_back(stem);
    PairedSample& p = by_stem[stem];
    p.id = stem;
    (is_a ? p.field_a : p.field_u) = s;
  }
  std::vector<PairedSample> out;
  out.reserve(order.size());
  for (const std::string& stem : order) {
    PairedSample& p = by_stem[stem];
    if (p.field_a.id.empty() || p.field_u.id.empty())
      throw_io("paired dataset: sample '" + stem + "' missing one side");
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace gfm
