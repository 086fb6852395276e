#include "gfm/checkpoint.hpp"

#include <cstring>

#include "gfm/common.hpp"
#include "binary_io.hpp"

namespace gfm {

namespace {
constexpr char kMagic[4] = {'G', 'F', 'M', 'C'};
}

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return &t;
  return nullptr;
}

const Tensor& Checkpoint::require(const std::string& name) const {
  const Tensor* t = find(name);
  if (!t) throw_io("checkpoint: missing tensor '" + name + "'");
  return *t;
}

void save_checkpoint(const std::string& path, int epoch,
                     const std::string& config_text,
                     std::span<const std::pair<std::string, const Tensor*>> tensors) {
  detail::Writer w(path);
  for (char c : kMagic) w.u8(static_cast<uint8_t>(c));
  w.u32(1);
  w.u32(static_cast<uint32_t>(epoch));
  w.bytes(config_text);
  w.u32(static_cast<uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    w.str(name);
    w.u8(0);  // dtype f64
    w.u8(static_cast<uint8_t>(t->rank()));
    for (int64_t d : t->dims()) w.u32(static_cast<uint32_t>(d));
    w.f64_block(t->data(), t->numel());
  }
  w.close();
}

Checkpoint load_checkpoint(const std::string& path) {
  detail::Reader r(path);
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.u8());
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw_io("'" + path + "': bad magic bytes (not a GFMC checkpoint)");
  Checkpoint ck;
  ck.version = r.u32();
  if (ck.version != 1)
    throw_io("'" + path + "': unsupported version " + std::to_string(ck.version));
  ck.epoch = static_cast<int>(r.u32());
  ck.config_text = r.bytes();
  const uint32_t count = r.u32();
  ck.tensors.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    std::string name = r.str();
    const uint8_t dtype = r.u8();
    if (dtype != 0)
      throw_io("'" + path + "': unknown dtype code " + std::to_string(dtype) +
               " for tensor '" + name + "'");
    const int rank = r.u8();
    std::vector<int64_t> dims;
    for (int d = 0; d < rank; ++d) dims.push_back(r.u32());
    Tensor t(dims);
    r.f64_block(t.data(), t.numel());
    ck.tensors.emplace_back(std::move(name), std::move(t));
  }
  if (!r.at_eof())
    throw_io("'" + path + "': trailing bytes at " + std::to_string(r.offset()));
  return ck;
}

void append_parameters(std::vector<std::pair<std::string, const Tensor*>>& out,
                       std::span<Parameter* const> params) {
  for (Parameter* p : params) out.emplace_back(p->name, &p->value);
}

void append_functaset(std::vector<std::pair<std::string, const Tensor*>>& out,
                      const Functaset& functaset) {
  for (const auto& [id, param] : functaset.latents())
    out.emplace_back(param.name, &param.value);
}

void append_optimizer(std::vector<std::pair<std::string, const Tensor*>>& out,
                      OuterOptimizer& opt, Tensor& step_scratch) {
  if (!opt.is_adam()) return;
  step_scratch = Tensor::scalar(static_cast<double>(opt.step_count()));
  out.emplace_back("opt.t", &step_scratch);
  for (auto& [name, t] : opt.state_tensors()) out.emplace_back(name, t);
}

void restore_parameters(std::span<Parameter* const> params, const Checkpoint& ck) {
  for (Parameter* p : params) {
    const Tensor& t = ck.require(p->name);
    if (!t.same_dims(p->value))
      throw_io("checkpoint: tensor '" + p->name + "' dims " + t.dims_str() +
               " do not match model dims " + p->value.dims_str());
    p->value = t;
    p->zero_grad();
  }
}

int restore_functaset(Functaset& functaset, const Checkpoint& ck) {
  int n = 0;
  constexpr const char* kPrefix = "latent.";
  for (const auto& [name, t] : ck.tensors) {
    if (!name.starts_with(kPrefix)) continue;
    const std::string id = name.substr(std::strlen(kPrefix));
    Parameter& z = functaset.ensure(id);
    if (!t.same_dims(z.value))
      throw_io("checkpoint: latent '" + id + "' dims " + t.dims_str() +
               " do not match latent_dim " + std::to_string(functaset.latent_dim()));
    z.value = t;
    ++n;
  }
  return n;
}

void restore_optimizer(OuterOptimizer& opt, const Checkpoint& ck) {
  if (!opt.is_adam()) return;
  opt.step_count() = static_cast<int64_t>(ck.require("opt.t")[0]);
  for (auto& [name, t] : opt.state_tensors()) {
    const Tensor& saved = ck.require(name);
    if (!saved.same_dims(*t))
      throw_io("checkpoint: optimizer tensor '" + name + "' dims mismatch");
    *t = saved;
  }
}

}  // namespace gfm
