#include "gfm/pdefuncta.hpp"

#include <algorithm>

#include "gfm/common.hpp"
#include "gfm/metrics.hpp"

namespace gfm {

PdefunctaModel PdefunctaModel::init(const InrConfig& cfg_a, const InrConfig& cfg_u,
                                    uint64_t seed) {
  if (cfg_a.latent_dim != cfg_u.latent_dim)
    throw_config("pdefuncta: branches must share latent_dim");
  PdefunctaModel m;
  m.a_ = ModulatedInr::init(cfg_a, mix_seed(seed, 0xA), "a.");
  m.u_ = ModulatedInr::init(cfg_u, mix_seed(seed, 0xB), "u.");
  return m;
}

std::vector<Parameter*> PdefunctaModel::parameters() {
  std::vector<Parameter*> out = a_.parameters();
  for (Parameter* p : u_.parameters()) out.push_back(p);
  return out;
}

void PdefunctaModel::invalidate_caches() const {
  a_.invalidate_cache();
  u_.invalidate_cache();
}

Graph::Id PdefunctaModel::build_joint_loss(Graph& g, Graph::Id z,
                                           const PairedSample& pair,
                                           bool shared_trainable, double weight_a,
                                           double weight_u, double* mse_a,
                                           double* mse_u) const {
  auto mods_a = a_.build_map(g, z, shared_trainable);
  Graph::Id out_a =
      a_.build_forward(g, g.input(pair.field_a.coords), mods_a, shared_trainable);
  Graph::Id la = g.mse(out_a, g.input(pair.field_a.values));

  auto mods_u = u_.build_map(g, z, shared_trainable);
  Graph::Id out_u =
      u_.build_forward(g, g.input(pair.field_u.coords), mods_u, shared_trainable);
  Graph::Id lu = g.mse(out_u, g.input(pair.field_u.values));

  if (mse_a) *mse_a = g.scalar_value(la);
  if (mse_u) *mse_u = g.scalar_value(lu);
  return g.add(g.scale(la, weight_a), g.scale(lu, weight_u));
}

double PdefunctaModel::joint_loss(const Tensor& z, const PairedSample& pair,
                                  double weight_a, double weight_u) const {
  Graph g;
  return g.scalar_value(
      build_joint_loss(g, g.input(z), pair, false, weight_a, weight_u));
}

PairedMetaTask::PairedMetaTask(PdefunctaModel& model,
                               const std::vector<PairedSample>& pairs,
                               double weight_a, double weight_u)
    : model_(&model), pairs_(&pairs), weight_a_(weight_a), weight_u_(weight_u) {
  for (size_t i = 0; i < pairs.size(); ++i) {
    ids_.push_back(pairs[i].id);
    if (!index_.emplace(pairs[i].id, i).second)
      throw_config("paired dataset: duplicate id '" + pairs[i].id + "'");
  }
}

const PairedSample& PairedMetaTask::pair(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw_logic("task: unknown pair '" + id + "'");
  return (*pairs_)[it->second];
}

Graph::Id PairedMetaTask::build_sample_loss(Graph& g, Graph::Id z,
                                            const std::string& id,
                                            bool shared_trainable,
                                            std::vector<double>* component_mses) {
  double ma = 0.0, mu = 0.0;
  Graph::Id loss = model_->build_joint_loss(g, z, pair(id), shared_trainable,
                                            weight_a_, weight_u_, &ma, &mu);
  if (component_mses) *component_mses = {ma, mu};
  return loss;
}

std::vector<double> PairedMetaTask::value_peaks(const std::string& id) const {
  const PairedSample& p = pair(id);
  auto peak = [](const Tensor& t) {
    const auto [lo, hi] = std::minmax_element(t.span().begin(), t.span().end());
    return *hi - *lo;
  };
  return {peak(p.field_a.values), peak(p.field_u.values)};
}

namespace {

InferResult infer_one_direction(const ModulatedInr& observed_branch,
                                const ModulatedInr& target_branch,
                                const FieldSample& observed,
                                const Tensor& query_coords, const InferOptions& opts,
                                const char* what) {
  auto builder = [&](Graph& g, Graph::Id z) {
    auto mods = observed_branch.build_map(g, z, false);
    Graph::Id out =
        observed_branch.build_forward(g, g.input(observed.coords), mods, false);
    return g.mse(out, g.input(observed.values));
  };
  InferResult res;
  res.latent = fit_latent_gd(builder, observed_branch.config().latent_dim, opts.init,
                             opts.steps, opts.eta, what);
  res.fit_mse = mse(observed_branch.decode(res.latent, observed.coords),
                    observed.values);
  res.predicted = target_branch.decode(res.latent, query_coords);
  return res;
}

}  // namespace

InferResult infer_forward(const PdefunctaModel& model, const FieldSample& observed_a,
                          const Tensor& query_coords, const InferOptions& opts) {
  return infer_one_direction(model.branch_a(), model.branch_u(), observed_a,
                             query_coords, opts, "infer_forward");
}

InferResult infer_inverse(const PdefunctaModel& model, const FieldSample& observed_u,
                          const Tensor& query_coords, const InferOptions& opts) {
  return infer_one_direction(model.branch_u(), model.branch_a(), observed_u,
                             query_coords, opts, "infer_inverse");
}

}  // namespace gfm
