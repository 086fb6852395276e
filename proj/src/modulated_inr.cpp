#include "gfm/modulated_inr.hpp"

#include <cmath>

#include "gfm/common.hpp"
#include "gfm/kernels.hpp"

namespace gfm {

const char* to_string(ModulationKind kind) {
  switch (kind) {
    case ModulationKind::Shift: return "shift";
    case ModulationKind::Scale: return "scale";
    case ModulationKind::Film: return "film";
    case ModulationKind::Gfm: return "gfm";
  }
  return "?";
}

ModulationKind modulation_kind_from_string(const std::string& s) {
  if (s == "shift") return ModulationKind::Shift;
  if (s == "scale") return ModulationKind::Scale;
  if (s == "film") return ModulationKind::Film;
  if (s == "gfm") return ModulationKind::Gfm;
  throw_config("unknown modulation kind '" + s + "'");
}

void InrConfig::validate() const {
  if (input_dim < 1 || output_dim < 1) throw_config("inr: input/output dims must be >= 1");
  if (hidden_dim < 1) throw_config("inr: hidden_dim must be >= 1");
  if (hidden_layers < 1) throw_config("inr: hidden_layers must be >= 1");
  if (latent_dim < 1) throw_config("inr: latent_dim must be >= 1");
  if (map_hidden < 1) throw_config("inr: map_hidden must be >= 1");
  if (kind == ModulationKind::Gfm) basis.validate();
}

ModulationLayout ModulationLayout::make(const InrConfig& cfg) {
  ModulationLayout lo;
  switch (cfg.kind) {
    case ModulationKind::Shift:
      lo.w_len = 0;
      lo.b_len = cfg.hidden_dim;
      break;
    case ModulationKind::Scale:
      lo.w_len = cfg.hidden_dim;
      lo.b_len = 0;
      break;
    case ModulationKind::Film:
      lo.w_len = cfg.hidden_dim;
      lo.b_len = cfg.hidden_dim;
      break;
    case ModulationKind::Gfm:
      lo.w_len = cfg.basis.rows();
      lo.b_len = cfg.hidden_dim;
      break;
  }
  int64_t off = 0;
  for (int k = 0; k < cfg.hidden_layers; ++k) {
    lo.w_off.push_back(off);
    off += lo.w_len;
    lo.b_off.push_back(off);
    off += lo.b_len;
  }
  lo.total = off;
  return lo;
}

Tensor gfm_effective_weight(const Tensor& base, const Tensor& alpha_w,
                            const FourierBasis& basis) {
  const int64_t d = base.dim(0), D = base.dim(1);
  if (D != basis.matrix.dim(0))
    throw_shape("gfm_effective_weight: base cols " + std::to_string(D) +
                " vs basis rows " + std::to_string(basis.matrix.dim(0)));
  if (alpha_w.numel() != D)
    throw_shape("gfm_effective_weight: alpha_w length " +
                std::to_string(alpha_w.numel()) + " vs " + std::to_string(D));
  const int64_t m = basis.matrix.dim(1);
  Tensor shifted({d, D});
  for (int64_t i = 0; i < d; ++i)
    for (int64_t j = 0; j < D; ++j) shifted.at(i, j) = base.at(i, j) + alpha_w[j];
  Tensor out({d, m});
  kernels::gemm_nn(shifted.data(), basis.matrix.data(), out.data(), d, D, m);
  return out;
}

namespace {

Tensor uniform_tensor(Rng& rng, std::vector<int64_t> dims, double bound) {
  Tensor t(std::move(dims));
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

// Identity modulation: the vector for which every kind reduces to the
// unmodulated layer (Shift 0, Scale 1, FiLM (1, 0), GFM (0, 0)).
void fill_identity_modulation(const InrConfig& cfg, const ModulationLayout& lo,
                              Tensor& flat) {
  if (cfg.kind != ModulationKind::Scale && cfg.kind != ModulationKind::Film) return;
  for (int k = 0; k < cfg.hidden_layers; ++k)
    for (int64_t j = 0; j < lo.w_len; ++j) flat[lo.w_off[static_cast<size_t>(k)] + j] = 1.0;
}

}  // namespace

ModulatedInr ModulatedInr::init(const InrConfig& cfg, uint64_t seed,
                                const std::string& prefix) {
  cfg.validate();
  ModulatedInr m;
  m.cfg_ = cfg;
  m.layout_ = ModulationLayout::make(cfg);

  const int d = cfg.hidden_dim;
  if (cfg.kind == ModulationKind::Gfm) {
    std::vector<int> dims(static_cast<size_t>(cfg.hidden_layers), d);
    m.bases_ = layer_bases(cfg.basis, dims);
  }

  Rng rng(seed);
  const double hidden_bound = std::sqrt(6.0 / d) / cfg.omega0;

  m.params_.first_w = Parameter(
      prefix + "inr.first.w",
      uniform_tensor(rng, {d, cfg.input_dim}, 1.0 / cfg.input_dim));
  m.params_.first_b = Parameter(prefix + "inr.first.b", Tensor({d}));

  for (int k = 0; k < cfg.hidden_layers; ++k) {
    const std::string base = prefix + "inr.h" + std::to_string(k + 1);
    if (cfg.kind == ModulationKind::Gfm) {
      // Scale the base coefficients so base * basis matches the dense init
      // variance: Var(W_ij) = Var(r) * sum_t basis[t,j]^2.
      const FourierBasis& fb = m.bases_[static_cast<size_t>(k)];
      const int64_t D = fb.matrix.dim(0), M = fb.matrix.dim(1);
      double mean_col_sq = 0.0;
      for (int64_t j = 0; j < M; ++j) {
        double s = 0.0;
        for (int64_t t = 0; t < D; ++t) s += fb.matrix.at(t, j) * fb.matrix.at(t, j);
        mean_col_sq += s;
      }
      mean_col_sq /= static_cast<double>(M);
      const double r = hidden_bound / std::sqrt(mean_col_sq);
      m.params_.hidden_w.emplace_back(base + ".w", uniform_tensor(rng, {d, D}, r));
    } else {
      m.params_.hidden_w.emplace_back(base + ".w",
                                      uniform_tensor(rng, {d, d}, hidden_bound));
    }
    m.params_.hidden_b.emplace_back(base + ".b", Tensor({d}));
  }

  m.params_.head_w = Parameter(prefix + "inr.head.w",
                               uniform_tensor(rng, {cfg.output_dim, d}, hidden_bound));
  m.params_.head_b = Parameter(prefix + "inr.head.b", Tensor({cfg.output_dim}));

  m.map_.w1 = Parameter(prefix + "map.w1",
                        uniform_tensor(rng, {cfg.map_hidden, cfg.latent_dim},
                                       1.0 / std::sqrt(cfg.latent_dim)));
  m.map_.b1 = Parameter(prefix + "map.b1", Tensor({cfg.map_hidden}));
  m.map_.w2 = Parameter(prefix + "map.w2",
                        uniform_tensor(rng, {m.layout_.total, cfg.map_hidden},
                                       0.01 / std::sqrt(cfg.map_hidden)));
  Tensor b2({m.layout_.total});
  fill_identity_modulation(cfg, m.layout_, b2);
  m.map_.b2 = Parameter(prefix + "map.b2", std::move(b2));

  return m;
}

std::vector<Parameter*> ModulatedInr::parameters() {
  std::vector<Parameter*> out{&params_.first_w, &params_.first_b};
  for (size_t k = 0; k < params_.hidden_w.size(); ++k) {
    out.push_back(&params_.hidden_w[k]);
    out.push_back(&params_.hidden_b[k]);
  }
  out.push_back(&params_.head_w);
  out.push_back(&params_.head_b);
  out.push_back(&map_.w1);
  out.push_back(&map_.b1);
  out.push_back(&map_.w2);
  out.push_back(&map_.b2);
  return out;
}

std::vector<ModulatedInr::ModNodes> ModulatedInr::build_map(Graph& g, Graph::Id z,
                                                            bool trainable) const {
  auto& self = const_cast<ModulatedInr&>(*this);
  auto node = [&](Parameter& p) {
    return trainable ? g.param(p) : g.input(p.value);
  };
  Graph::Id h = g.add(g.matvec(node(self.map_.w1), z), node(self.map_.b1));
  if (!cfg_.linear_map) h = g.sin(h);
  Graph::Id flat = g.add(g.matvec(node(self.map_.w2), h), node(self.map_.b2));

  std::vector<ModNodes> mods(static_cast<size_t>(cfg_.hidden_layers));
  for (int k = 0; k < cfg_.hidden_layers; ++k) {
    auto& m = mods[static_cast<size_t>(k)];
    if (layout_.w_len > 0)
      m.alpha_w = g.slice(flat, layout_.w_off[static_cast<size_t>(k)], layout_.w_len);
    if (layout_.b_len > 0)
      m.alpha_b = g.slice(flat, layout_.b_off[static_cast<size_t>(k)], layout_.b_len);
  }
  return mods;
}

const Tensor& ModulatedInr::cached_base_product(int layer) const {
  if (!cache_valid_) {
    base_cache_.clear();
    base_cache_.reserve(params_.hidden_w.size());
    for (size_t k = 0; k < params_.hidden_w.size(); ++k) {
      const Tensor& r = params_.hidden_w[k].value;
      const Tensor& phi = bases_[k].matrix;
      Tensor prod({r.dim(0), phi.dim(1)});
      kernels::gemm_nn(r.data(), phi.data(), prod.data(), r.dim(0), r.dim(1),
                       phi.dim(1));
      base_cache_.push_back(std::move(prod));
    }
    cache_valid_ = true;
  }
  return base_cache_[static_cast<size_t>(layer)];
}

void ModulatedInr::invalidate_cache() const { cache_valid_ = false; }

Graph::Id ModulatedInr::build_layer(Graph& g, int layer, Graph::Id h,
                                    const ModNodes* mod, bool trainable) const {
  auto& self = const_cast<ModulatedInr&>(*this);
  auto node = [&](Parameter& p) {
    return trainable ? g.param(p) : g.input(p.value);
  };
  Parameter& w = self.params_.hidden_w[static_cast<size_t>(layer)];
  Parameter& b = self.params_.hidden_b[static_cast<size_t>(layer)];

  if (cfg_.kind == ModulationKind::Gfm) {
    Graph::Id w_eff;
    const FourierBasis& fb = bases_[static_cast<size_t>(layer)];
    Graph::Id base = trainable
                         ? g.matmul(g.param(w), g.input(fb.matrix))
                         : g.input(cached_base_product(layer));
    if (mod != nullptr && mod->alpha_w >= 0) {
      Graph::Id row = g.matvec(g.input(fb.matrix), mod->alpha_w, /*trans=*/true);
      w_eff = g.add(base, row);
    } else {
      w_eff = base;
    }
    Graph::Id pre = g.add(g.matmul(h, w_eff, false, true), node(b));
    if (mod != nullptr && mod->alpha_b >= 0) pre = g.add(pre, mod->alpha_b);
    return pre;
  }

  Graph::Id pre = g.add(g.matmul(h, node(w), false, true), node(b));
  switch (cfg_.kind) {
    case ModulationKind::Shift:
      if (mod != nullptr && mod->alpha_b >= 0) pre = g.add(pre, mod->alpha_b);
      break;
    case ModulationKind::Scale:
      if (mod != nullptr && mod->alpha_w >= 0) pre = g.mul(pre, mod->alpha_w);
      break;
    case ModulationKind::Film:
      if (mod != nullptr && mod->alpha_w >= 0) pre = g.mul(pre, mod->alpha_w);
      if (mod != nullptr && mod->alpha_b >= 0) pre = g.add(pre, mod->alpha_b);
      break;
    case ModulationKind::Gfm:
      break;
  }
  return pre;
}

Graph::Id ModulatedInr::build_forward(Graph& g, Graph::Id coords,
                                      std::span<const ModNodes> mods,
                                      bool trainable) const {
  if (!mods.empty() && static_cast<int>(mods.size()) != cfg_.hidden_layers)
    throw_shape("forward: expected " + std::to_string(cfg_.hidden_layers) +
                " modulation entries, got " + std::to_string(mods.size()));
  auto& self = const_cast<ModulatedInr&>(*this);
  auto node = [&](Parameter& p) {
    return trainable ? g.param(p) : g.input(p.value);
  };

  Graph::Id pre = g.add(g.matmul(coords, node(self.params_.first_w), false, true),
                        node(self.params_.first_b));
  Graph::Id h = g.sin(g.scale(pre, cfg_.omega0));

  for (int k = 0; k < cfg_.hidden_layers; ++k) {
    const ModNodes* mod = mods.empty() ? nullptr : &mods[static_cast<size_t>(k)];
    h = g.sin(build_layer(g, k, h, mod, trainable));
  }

  return g.add(g.matmul(h, node(self.params_.head_w), false, true),
               node(self.params_.head_b));
}

Tensor ModulatedInr::decode(const Tensor& latent, const Tensor& coords) const {
  Graph g;
  Graph::Id z = g.input(latent);
  auto mods = build_map(g, z, /*trainable=*/false);
  Graph::Id out = build_forward(g, g.input(coords), mods, /*trainable=*/false);
  return g.value(out);
}

Tensor ModulatedInr::apply_modulation(int layer, const Tensor& pre_activation,
                                      const ModulationVector& mod,
                                      const Tensor& h_in) const {
  if (layer < 0 || layer >= cfg_.hidden_layers)
    throw_logic("apply_modulation: layer out of range");
  Graph g;
  ModNodes nodes;
  if (mod.alpha_w.numel() > 0) {
    if (mod.alpha_w.numel() != layout_.w_len)
      throw_shape("apply_modulation: alpha_w length " +
                  std::to_string(mod.alpha_w.numel()) + " vs " +
                  std::to_string(layout_.w_len));
    nodes.alpha_w = g.input(mod.alpha_w);
  }
  if (mod.alpha_b.numel() > 0) {
    if (mod.alpha_b.numel() != layout_.b_len)
      throw_shape("apply_modulation: alpha_b length " +
                  std::to_string(mod.alpha_b.numel()) + " vs " +
                  std::to_string(layout_.b_len));
    nodes.alpha_b = g.input(mod.alpha_b);
  }

  const bool batched = h_in.rank() == 2;
  Tensor h2 = batched ? h_in : Tensor({1, h_in.numel()}, {h_in.span().begin(), h_in.span().end()});
  Graph::Id h = g.input(h2);

  Graph::Id out;
  if (cfg_.kind == ModulationKind::Gfm) {
    out = build_layer(g, layer, h, &nodes, /*trainable=*/false);
  } else {
    // Non-GFM kinds act on the given pre-activation directly.
    Tensor p2 = pre_activation.rank() == 2
                    ? pre_activation
                    : Tensor({1, pre_activation.numel()},
                             {pre_activation.span().begin(), pre_activation.span().end()});
    Graph::Id pre = g.input(p2);
    switch (cfg_.kind) {
      case ModulationKind::Shift:
        out = nodes.alpha_b >= 0 ? g.add(pre, nodes.alpha_b) : pre;
        break;
      case ModulationKind::Scale:
        out = nodes.alpha_w >= 0 ? g.mul(pre, nodes.alpha_w) : pre;
        break;
      case ModulationKind::Film:
        out = pre;
        if (nodes.alpha_w >= 0) out = g.mul(out, nodes.alpha_w);
        if (nodes.alpha_b >= 0) out = g.add(out, nodes.alpha_b);
        break;
      default:
        out = pre;
    }
  }
  Tensor v = g.value(out);
  if (!batched && v.rank() == 2 && v.dim(0) == 1)
    return Tensor({v.dim(1)}, {v.span().begin(), v.span().end()});
  return v;
}

std::vector<ModulationVector> ModulatedInr::modulation_map_forward(
    const Tensor& z) const {
  if (z.numel() != cfg_.latent_dim)
    throw_shape("modulation_map_forward: latent length " +
                std::to_string(z.numel()) + " vs " + std::to_string(cfg_.latent_dim));
  Graph g;
  auto mods = build_map(g, g.input(z), /*trainable=*/false);
  std::vector<ModulationVector> out;
  out.reserve(mods.size());
  for (const auto& m : mods) {
    ModulationVector v;
    if (m.alpha_w >= 0) v.alpha_w = g.value(m.alpha_w);
    if (m.alpha_b >= 0) v.alpha_b = g.value(m.alpha_b);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace gfm
