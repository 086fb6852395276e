#ifndef GFM_MODULATED_INR_HPP
#define GFM_MODULATED_INR_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gfm/fourier_basis.hpp"
#include "gfm/graph.hpp"

namespace gfm {

enum class ModulationKind { Shift, Scale, Film, Gfm };

const char* to_string(ModulationKind kind);
ModulationKind modulation_kind_from_string(const std::string& s);

struct InrConfig {
  int input_dim = 2;
  int output_dim = 1;
  int hidden_dim = 256;
  int hidden_layers = 4;  // modulated layers; the input layer is separate
  double omega0 = 30.0;
  ModulationKind kind = ModulationKind::Gfm;
  BasisConfig basis;  // GFM only
  int latent_dim = 20;
  int map_hidden = 512;
  bool linear_map = false;  // drop the sine between the two map layers

  void validate() const;
};

// Per-layer modulation values. alpha_w is the weight-space component
// (length D for GFM, hidden_dim for Scale/FiLM, absent for Shift);
// alpha_b is the additive component (absent for Scale).
struct ModulationVector {
  Tensor alpha_w;
  Tensor alpha_b;
};

// Offsets of each layer's modulation components inside the flat map output,
// layer-major, alpha_w before alpha_b.
struct ModulationLayout {
  int64_t w_len = 0, b_len = 0;
  std::vector<int64_t> w_off, b_off;
  int64_t total = 0;

  static ModulationLayout make(const InrConfig& cfg);
};

struct InrParams {
  Parameter first_w, first_b;
  std::vector<Parameter> hidden_w;  // dense [d,d], or GFM base coefficients [d,D]
  std::vector<Parameter> hidden_b;
  Parameter head_w, head_b;
};

struct ModulationMapParams {
  Parameter w1, b1, w2, b2;
};

// (base + broadcast(alpha_w across rows)) * basis; alpha_w has one entry per
// basis row and shifts that row's coefficient in every output unit.
Tensor gfm_effective_weight(const Tensor& base, const Tensor& alpha_w,
                            const FourierBasis& basis);

// Shared SIREN-style network with per-layer modulation hooks and the
// latent-to-modulation map. The first layer is unmodulated; layers 1..L are
// modulated; the head is affine.
class ModulatedInr {
 public:
  struct ModNodes {
    Graph::Id alpha_w = -1;
    Graph::Id alpha_b = -1;
  };

  static ModulatedInr init(const InrConfig& cfg, uint64_t seed,
                           const std::string& param_prefix = "");

  const InrConfig& config() const { return cfg_; }
  const ModulationLayout& layout() const { return layout_; }
  const std::vector<FourierBasis>& bases() const { return bases_; }
  InrParams& params() { return params_; }
  const InrParams& params() const { return params_; }
  ModulationMapParams& map_params() { return map_; }

  // Every trainable parameter, in fixed order (network first, then map).
  std::vector<Parameter*> parameters();

  // Latent z -> per-layer modulation nodes. With trainable == false the map
  // parameters enter the graph as constants.
  std::vector<ModNodes> build_map(Graph& g, Graph::Id z, bool trainable) const;

  // coords [N, input_dim] -> [N, output_dim]. mods must hold hidden_layers
  // entries, or be empty for the unmodulated base network. With
  // trainable == false all network parameters are constants and the GFM
  // base products are served from a cache.
  Graph::Id build_forward(Graph& g, Graph::Id coords,
                          std::span<const ModNodes> mods, bool trainable) const;

  // Convenience: full forward pass from a latent, values only.
  Tensor decode(const Tensor& latent, const Tensor& coords) const;

  // Modulated pre-activation of one layer for a single hidden vector; the
  // spec-level modulation rule without the activation.
  Tensor apply_modulation(int layer, const Tensor& pre_activation,
                          const ModulationVector& mod, const Tensor& h_in) const;

  std::vector<ModulationVector> modulation_map_forward(const Tensor& z) const;

  // The GFM frozen-path cache of base-coefficient x basis products. Must be
  // invalidated whenever hidden_w changes (the training loop does this
  // after every shared-parameter update).
  void invalidate_cache() const;

 private:
  Graph::Id build_layer(Graph& g, int layer, Graph::Id h, const ModNodes* mod,
                        bool trainable) const;
  const Tensor& cached_base_product(int layer) const;

  InrConfig cfg_;
  ModulationLayout layout_;
  InrParams params_;
  ModulationMapParams map_;
  std::vector<FourierBasis> bases_;
  mutable std::vector<Tensor> base_cache_;
  mutable bool cache_valid_ = false;
};

}  // namespace gfm

#endif  // GFM_MODULATED_INR_HPP
