#ifndef GFM_PDEFUNCTA_HPP
#define GFM_PDEFUNCTA_HPP

#include "gfm/functa_meta.hpp"
#include "gfm/modulated_inr.hpp"
#include "gfm/pde_data.hpp"

namespace gfm {

// Two modulated INRs over paired function spaces driven by one shared
// latent per sample through separate modulation maps.
class PdefunctaModel {
 public:
  static PdefunctaModel init(const InrConfig& cfg_a, const InrConfig& cfg_u,
                             uint64_t seed);

  ModulatedInr& branch_a() { return a_; }
  ModulatedInr& branch_u() { return u_; }
  const ModulatedInr& branch_a() const { return a_; }
  const ModulatedInr& branch_u() const { return u_; }
  int latent_dim() const { return a_.config().latent_dim; }

  std::vector<Parameter*> parameters();
  void invalidate_caches() const;

  // weight_a * mse_a + weight_u * mse_u for one latent node; per-branch MSEs
  // are reported through the optional out-params.
  Graph::Id build_joint_loss(Graph& g, Graph::Id z, const PairedSample& pair,
                             bool shared_trainable, double weight_a, double weight_u,
                             double* mse_a = nullptr, double* mse_u = nullptr) const;

  double joint_loss(const Tensor& z, const PairedSample& pair, double weight_a = 1.0,
                    double weight_u = 1.0) const;

 private:
  ModulatedInr a_, u_;
};

class PairedMetaTask : public MetaTask {
 public:
  PairedMetaTask(PdefunctaModel& model, const std::vector<PairedSample>& pairs,
                 double weight_a = 1.0, double weight_u = 1.0);

  const std::vector<std::string>& sample_ids() const override { return ids_; }
  Graph::Id build_sample_loss(Graph& g, Graph::Id z, const std::string& id,
                              bool shared_trainable,
                              std::vector<double>* component_mses) override;
  std::vector<Parameter*> shared_parameters() override { return model_->parameters(); }
  void shared_updated() override { model_->invalidate_caches(); }
  std::vector<double> value_peaks(const std::string& id) const override;

  const PairedSample& pair(const std::string& id) const;

 private:
  PdefunctaModel* model_;
  const std::vector<PairedSample>* pairs_;
  double weight_a_, weight_u_;
  std::vector<std::string> ids_;
  std::map<std::string, size_t> index_;
};

struct InferOptions {
  int steps = 100;
  double eta = 0.01;
  Tensor init;  // empty: zero latent
};

struct InferResult {
  Tensor predicted;  // values on the query grid
  Tensor latent;
  double fit_mse = 0.0;  // reconstruction MSE on the observed branch
};

// Fits z by auto-decoding against the observed branch only, then evaluates
// the other branch on the query coordinate grid. The unobserved side of the
// query pair is never read.
InferResult infer_forward(const PdefunctaModel& model, const FieldSample& observed_a,
                          const Tensor& query_coords, const InferOptions& opts);
InferResult infer_inverse(const PdefunctaModel& model, const FieldSample& observed_u,
                          const Tensor& query_coords, const InferOptions& opts);

}  // namespace gfm

#endif  // GFM_PDEFUNCTA_HPP
