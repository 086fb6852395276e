#ifndef GFM_FUNCTA_META_HPP
#define GFM_FUNCTA_META_HPP

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gfm/graph.hpp"
#include "gfm/modulated_inr.hpp"
#include "gfm/pde_data.hpp"

namespace gfm {

// Persistent per-sample latent codes. Latents start as zero vectors and are
// the only state the inner loop may touch.
class Functaset {
 public:
  explicit Functaset(int latent_dim) : latent_dim_(latent_dim) {}

  int latent_dim() const { return latent_dim_; }

  Parameter& ensure(const std::string& id);
  Parameter& at(const std::string& id);
  const Parameter& at(const std::string& id) const;
  bool contains(const std::string& id) const { return latents_.count(id) > 0; }
  std::map<std::string, Parameter>& latents() { return latents_; }
  const std::map<std::string, Parameter>& latents() const { return latents_; }

 private:
  int latent_dim_;
  std::map<std::string, Parameter> latents_;
};

struct TrainConfig {
  double eta_inner = 0.01;
  double eta_outer = 0.0001;
  int batch_size = 32;
  int inner_k = 0;  // 0: adapt the whole batch
  int inner_steps = 1;
  int epochs = 0;
  uint64_t seed = 0;
  enum class Outer { Sgd, Adam } outer = Outer::Sgd;
  double adam_beta1 = 0.9, adam_beta2 = 0.999, adam_eps = 1e-8;
  double loss_weight_a = 1.0, loss_weight_u = 1.0;  // paired training only

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double mean_mse = 0.0;   // per-sample loss-component sum, averaged over samples
  double mean_psnr = 0.0;  // per-sample (and per-component) PSNR, averaged
  double wall_seconds = 0.0;
};

// Adapter between the bilevel loop and a concrete model/dataset pairing.
class MetaTask {
 public:
  virtual ~MetaTask() = default;
  virtual const std::vector<std::string>& sample_ids() const = 0;
  // Scalar loss for one sample. With shared_trainable == false the shared
  // network and map parameters enter as constants (only z receives
  // gradient). component_mses, when given, receives the per-branch
  // reconstruction MSEs for logging.
  virtual Graph::Id build_sample_loss(Graph& g, Graph::Id z, const std::string& id,
                                      bool shared_trainable,
                                      std::vector<double>* component_mses) = 0;
  virtual std::vector<Parameter*> shared_parameters() = 0;
  virtual void shared_updated() = 0;  // invalidate frozen-path caches
  // Data range (max - min) per component, for PSNR logging.
  virtual std::vector<double> value_peaks(const std::string& id) const = 0;
};

// Plain-SGD update of the shared parameters, or Adam when configured. Adam
// moments are exposed as named tensors so checkpoints can resume bit-exactly.
class OuterOptimizer {
 public:
  OuterOptimizer(TrainConfig::Outer kind, std::vector<Parameter*> params,
                 double beta1, double beta2, double eps);

  void step(double eta);

  bool is_adam() const { return kind_ == TrainConfig::Outer::Adam; }
  std::vector<std::pair<std::string, Tensor*>> state_tensors();
  int64_t& step_count() { return t_; }

 private:
  TrainConfig::Outer kind_;
  std::vector<Parameter*> params_;
  double beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<Tensor> m_, v_;
};

struct InnerResult {
  Tensor latent;
  double final_loss = 0.0;  // loss at the last evaluation (before the final update)
};

// `steps` gradient-descent updates of the sample's latent against the
// reconstruction loss; shared parameters are frozen and never receive
// gradient.
InnerResult inner_adapt(MetaTask& task, Functaset& functaset, const std::string& id,
                        int steps, double eta_inner);

// One shared-parameter update from the summed batch loss, latents held
// constant. Returns the batch loss; per_sample_mses (optional) receives the
// per-sample component MSEs in batch order.
double outer_step(MetaTask& task, Functaset& functaset,
                  std::span<const std::string> batch_ids, double eta_outer,
                  OuterOptimizer& opt,
                  std::vector<std::vector<double>>* per_sample_mses = nullptr);

// Epoch loop: shuffle, per batch adapt K sampled members then take one outer
// step. Deterministic given (dataset, config, seed); resuming at
// start_epoch reproduces an uninterrupted run bit-exactly.
std::vector<EpochStats> train(MetaTask& task, Functaset& functaset,
                              const TrainConfig& config, OuterOptimizer& opt,
                              int start_epoch = 0,
                              const std::function<void(int, const EpochStats&)>&
                                  epoch_hook = {});

// --- test-time latent fitting (auto-decoding) ---

using CoordMask = std::function<bool(std::span<const double>)>;

struct FitLatentResult {
  Tensor latent;
  double masked_mse = 0.0;  // over the fitted coordinate set
  double full_mse = 0.0;    // over the whole field
};

// Gradient descent on the reconstruction loss restricted to coordinates
// passing `mask` (all coordinates when absent); model parameters frozen.
FitLatentResult fit_latent(const ModulatedInr& model, const FieldSample& field,
                           const Tensor& init, int steps, double eta,
                           const CoordMask* mask = nullptr);

// Generic driver used by fit_latent and the bidirectional inference paths.
Tensor fit_latent_gd(const std::function<Graph::Id(Graph&, Graph::Id)>& loss_builder,
                     int latent_dim, const Tensor& init, int steps, double eta,
                     const std::string& what);

std::vector<int64_t> mask_indices(const FieldSample& field, const CoordMask& mask);
Tensor gather_rows(const Tensor& t, std::span<const int64_t> rows);

// Single shared INR over a set of scalar fields.
class SingleInrTask : public MetaTask {
 public:
  SingleInrTask(ModulatedInr& model, const std::vector<FieldSample>& samples);

  const std::vector<std::string>& sample_ids() const override { return ids_; }
  Graph::Id build_sample_loss(Graph& g, Graph::Id z, const std::string& id,
                              bool shared_trainable,
                              std::vector<double>* component_mses) override;
  std::vector<Parameter*> shared_parameters() override { return model_->parameters(); }
  void shared_updated() override { model_->invalidate_cache(); }
  std::vector<double> value_peaks(const std::string& id) const override;

  const FieldSample& sample(const std::string& id) const;

 private:
  ModulatedInr* model_;
  const std::vector<FieldSample>* samples_;
  std::vector<std::string> ids_;
  std::map<std::string, size_t> index_;
};

}  // namespace gfm

#endif  // GFM_FUNCTA_META_HPP
