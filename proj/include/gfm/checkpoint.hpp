#ifndef GFM_CHECKPOINT_HPP
#define GFM_CHECKPOINT_HPP

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gfm/functa_meta.hpp"
#include "gfm/tensor.hpp"

namespace gfm {

// GFMC container: magic "GFMC", u32 version, u32 epoch, length-prefixed
// config text, then a named-tensor table (u16 name length + name, u8 dtype
// code [0 = f64], u8 rank, u32 dims..., little-endian f64 payload).
struct Checkpoint {
  uint32_t version = 1;
  int epoch = 0;
  std::string config_text;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor* find(const std::string& name) const;
  const Tensor& require(const std::string& name) const;
};

void save_checkpoint(const std::string& path, int epoch,
                     const std::string& config_text,
                     std::span<const std::pair<std::string, const Tensor*>> tensors);

Checkpoint load_checkpoint(const std::string& path);

// Tensor-table assembly / restore glue used by the CLI.
void append_parameters(std::vector<std::pair<std::string, const Tensor*>>& out,
                       std::span<Parameter* const> params);
void append_functaset(std::vector<std::pair<std::string, const Tensor*>>& out,
                      const Functaset& functaset);
void append_optimizer(std::vector<std::pair<std::string, const Tensor*>>& out,
                      OuterOptimizer& opt, Tensor& step_scratch);

// Every parameter must be present with matching dims.
void restore_parameters(std::span<Parameter* const> params, const Checkpoint& ck);
// Rebuilds all latents stored in the checkpoint; returns how many.
int restore_functaset(Functaset& functaset, const Checkpoint& ck);
void restore_optimizer(OuterOptimizer& opt, const Checkpoint& ck);

}  // namespace gfm

#endif  // GFM_CHECKPOINT_HPP
