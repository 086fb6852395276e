#include "gfm/functa_meta.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "gfm/common.hpp"
#include "gfm/kernels.hpp"
#include "gfm/metrics.hpp"

namespace gfm {

Parameter& Functaset::ensure(const std::string& id) {
  auto it = latents_.find(id);
  if (it == latents_.end()) {
    it = latents_.emplace(id, Parameter("latent." + id, Tensor({latent_dim_}))).first;
  }
  return it->second;
}

Parameter& Functaset::at(const std::string& id) {
  auto it = latents_.find(id);
  if (it == latents_.end()) throw_logic("functaset: unknown sample '" + id + "'");
  return it->second;
}

const Parameter& Functaset::at(const std::string& id) const {
  auto it = latents_.find(id);
  if (it == latents_.end()) throw_logic("functaset: unknown sample '" + id + "'");
  return it->second;
}

void TrainConfig::validate() const {
  if (eta_inner < 0.0 || eta_outer < 0.0)
    throw_config("train: learning rates must be non-negative");
  if (batch_size < 1) throw_config("train: batch_size must be >= 1");
  if (inner_k < 0 || (inner_k > 0 && inner_k > batch_size))
    throw_config("train: inner_k must be in [0, batch_size]");
  if (inner_steps < 0) throw_config("train: inner_steps must be >= 0");
  if (epochs < 0) throw_config("train: epochs must be >= 0");
}

OuterOptimizer::OuterOptimizer(TrainConfig::Outer kind, std::vector<Parameter*> params,
                               double beta1, double beta2, double eps)
    : kind_(kind), params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (kind_ == TrainConfig::Outer::Adam) {
    for (Parameter* p : params_) {
      m_.push_back(Tensor::zeros(p->value.dims()));
      v_.push_back(Tensor::zeros(p->value.dims()));
    }
  }
}

void OuterOptimizer::step(double eta) {
  if (kind_ == TrainConfig::Outer::Sgd) {
    for (Parameter* p : params_)
      kernels::axpy(-eta, p->grad.data(), p->value.data(), p->value.numel());
    return;
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t i = 0; i < params_.size(); ++i) {
    Parameter* p = params_[i];
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (int64_t j = 0; j < p->value.numel(); ++j) {
      const double g = p->grad[j];
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g;
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g * g;
      p->value[j] -= eta * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + eps_);
    }
  }
}

std::vector<std::pair<std::string, Tensor*>> OuterOptimizer::state_tensors() {
  std::vector<std::pair<std::string, Tensor*>> out;
  if (kind_ != TrainConfig::Outer::Adam) return out;
  for (size_t i = 0; i < params_.size(); ++i) {
    out.emplace_back("opt.m." + params_[i]->name, &m_[i]);
    out.emplace_back("opt.v." + params_[i]->name, &v_[i]);
  }
  return out;
}

InnerResult inner_adapt(MetaTask& task, Functaset& functaset, const std::string& id,
                        int steps, double eta_inner) {
  Parameter& z = functaset.at(id);
  InnerResult res;
  res.final_loss = 0.0;
  if (steps == 0) {
    Graph g;
    res.final_loss = g.scalar_value(
        task.build_sample_loss(g, g.input(z.value), id, false, nullptr));
    res.latent = z.value;
    return res;
  }
  for (int s = 0; s < steps; ++s) {
    z.zero_grad();
    Graph g;
    Graph::Id loss = task.build_sample_loss(g, g.param(z), id, false, nullptr);
    const double lv = g.scalar_value(loss);
    if (!std::isfinite(lv))
      throw_numeric("inner_adapt: non-finite loss for sample '" + id + "' at step " +
                    std::to_string(s));
    g.backward(loss);
    kernels::axpy(-eta_inner, z.grad.data(), z.value.data(), z.value.numel());
    res.final_loss = lv;
  }
  z.zero_grad();
  res.latent = z.value;
  return res;
}

double outer_step(MetaTask& task, Functaset& functaset,
                  std::span<const std::string> batch_ids, double eta_outer,
                  OuterOptimizer& opt,
                  std::vector<std::vector<double>>* per_sample_mses) {
  auto shared = task.shared_parameters();
  zero_grads(shared);
  double batch_loss = 0.0;
  if (per_sample_mses) per_sample_mses->clear();
  for (const std::string& id : batch_ids) {
    Graph g;
    std::vector<double> comps;
    // latents enter as constants: first-order outer update
    Graph::Id loss = task.build_sample_loss(g, g.input(functaset.at(id).value), id,
                                            /*shared_trainable=*/true, &comps);
    const double lv = g.scalar_value(loss);
    if (!std::isfinite(lv))
      throw_numeric("outer_step: non-finite loss for sample '" + id + "'");
    batch_loss += lv;
    if (per_sample_mses) per_sample_mses->push_back(std::move(comps));
    g.backward(loss);
  }
  opt.step(eta_outer);
  zero_grads(shared);
  task.shared_updated();
  return batch_loss;
}

std::vector<EpochStats> train(MetaTask& task, Functaset& functaset,
                              const TrainConfig& config, OuterOptimizer& opt,
                              int start_epoch,
                              const std::function<void(int, const EpochStats&)>&
                                  epoch_hook) {
  config.validate();
  const auto& ids = task.sample_ids();
  if (ids.empty()) throw_config("train: dataset is empty");
  for (const std::string& id : ids) functaset.ensure(id);

  std::vector<EpochStats> log;
  for (int epoch = start_epoch; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(mix_seed(config.seed, static_cast<uint64_t>(epoch)));
    std::vector<std::string> order = ids;
    rng.shuffle(order);

    double sum_mse = 0.0, sum_psnr = 0.0;
    int64_t n_mse = 0;
    for (size_t off = 0; off < order.size(); off += static_cast<size_t>(config.batch_size)) {
      const size_t end = std::min(order.size(), off + static_cast<size_t>(config.batch_size));
      std::span<const std::string> batch(order.data() + off, end - off);

      std::vector<std::string> subset(batch.begin(), batch.end());
      if (config.inner_k > 0 && static_cast<size_t>(config.inner_k) < subset.size()) {
        rng.shuffle(subset);
        subset.resize(static_cast<size_t>(config.inner_k));
      }
      for (const std::string& id : subset)
        inner_adapt(task, functaset, id, config.inner_steps, config.eta_inner);

      std::vector<std::vector<double>> comps;
      outer_step(task, functaset, batch, config.eta_outer, opt, &comps);
      for (size_t bi = 0; bi < batch.size(); ++bi) {
        const auto peaks = task.value_peaks(batch[bi]);
        double sample_sum = 0.0;
        for (size_t c = 0; c < comps[bi].size(); ++c) {
          sample_sum += comps[bi][c];
          const double pk = peaks[c];
          sum_psnr += 10.0 * std::log10(pk * pk / std::max(comps[bi][c], 1e-300));
        }
        sum_mse += sample_sum;
        n_mse += static_cast<int64_t>(comps[bi].size());
      }
    }

    EpochStats st;
    st.epoch = epoch;
    st.mean_mse = sum_mse / static_cast<double>(ids.size());
    st.mean_psnr = sum_psnr / static_cast<double>(n_mse);
    st.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log.push_back(st);
    if (epoch_hook) epoch_hook(epoch, st);
  }
  return log;
}

Tensor fit_latent_gd(const std::function<Graph::Id(Graph&, Graph::Id)>& loss_builder,
                     int latent_dim, const Tensor& init, int steps, double eta,
                     const std::string& what) {
  Parameter z("fit.z", init.numel() > 0 ? init : Tensor({latent_dim}));
  if (z.value.numel() != latent_dim)
    throw_shape(what + ": init latent length " + std::to_string(z.value.numel()) +
                " vs " + std::to_string(latent_dim));
  for (int s = 0; s < steps; ++s) {
    z.zero_grad();
    Graph g;
    Graph::Id loss = loss_builder(g, g.param(z));
    const double lv = g.scalar_value(loss);
    if (!std::isfinite(lv))
      throw_numeric(what + ": non-finite loss at step " + std::to_string(s));
    g.backward(loss);
    kernels::axpy(-eta, z.grad.data(), z.value.data(), z.value.numel());
  }
  return z.value;
}

std::vector<int64_t> mask_indices(const FieldSample& field, const CoordMask& mask) {
  std::vector<int64_t> rows;
  const int cd = field.coord_dim();
  for (int64_t i = 0; i < field.num_points(); ++i) {
    std::span<const double> row(field.coords.data() + i * cd, static_cast<size_t>(cd));
    if (mask(row)) rows.push_back(i);
  }
  return rows;
}

Tensor gather_rows(const Tensor& t, std::span<const int64_t> rows) {
  const int64_t c = t.dim(1);
  Tensor out({static_cast<int64_t>(rows.size()), c});
  for (size_t i = 0; i < rows.size(); ++i)
    std::copy(t.data() + rows[i] * c, t.data() + (rows[i] + 1) * c,
              out.data() + static_cast<int64_t>(i) * c);
  return out;
}

FitLatentResult fit_latent(const ModulatedInr& model, const FieldSample& field,
                           const Tensor& init, int steps, double eta,
                           const CoordMask* mask) {
  Tensor coords = field.coords;
  Tensor values = field.values;
  if (mask != nullptr) {
    auto rows = mask_indices(field, *mask);
    if (rows.empty()) throw_config("fit_latent: mask selects no coordinates");
    coords = gather_rows(field.coords, rows);
    values = gather_rows(field.values, rows);
  }

  auto builder = [&](Graph& g, Graph::Id z) {
    auto mods = model.build_map(g, z, false);
    Graph::Id out = model.build_forward(g, g.input(coords), mods, false);
    return g.mse(out, g.input(values));
  };
  FitLatentResult res;
  res.latent = fit_latent_gd(builder, model.config().latent_dim, init, steps, eta,
                             "fit_latent('" + field.id + "')");
  res.masked_mse = mse(model.decode(res.latent, coords), values);
  res.full_mse = mse(model.decode(res.latent, field.coords), field.values);
  return res;
}

SingleInrTask::SingleInrTask(ModulatedInr& model,
                             const std::vector<FieldSample>& samples)
    : model_(&model), samples_(&samples) {
  for (size_t i = 0; i < samples.size(); ++i) {
    ids_.push_back(samples[i].id);
    if (!index_.emplace(samples[i].id, i).second)
      throw_config("dataset: duplicate sample id '" + samples[i].id + "'");
  }
}

const FieldSample& SingleInrTask::sample(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw_logic("task: unknown sample '" + id + "'");
  return (*samples_)[it->second];
}

Graph::Id SingleInrTask::build_sample_loss(Graph& g, Graph::Id z,
                                           const std::string& id,
                                           bool shared_trainable,
                                           std::vector<double>* component_mses) {
  const FieldSample& s = sample(id);
  auto mods = model_->build_map(g, z, shared_trainable);
  Graph::Id out = model_->build_forward(g, g.input(s.coords), mods, shared_trainable);
  Graph::Id loss = g.mse(out, g.input(s.values));
  if (component_mses) *component_mses = {g.scalar_value(loss)};
  return loss;
}

std::vector<double> SingleInrTask::value_peaks(const std::string& id) const {
  const FieldSample& s = sample(id);
  const auto [lo, hi] = std::minmax_element(s.values.span().begin(), s.values.span().end());
  return {*hi - *lo};
}

}  // namespace gfm
