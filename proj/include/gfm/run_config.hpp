#ifndef GFM_RUN_CONFIG_HPP
#define GFM_RUN_CONFIG_HPP

#include <map>
#include <string>
#include <vector>

#include "gfm/functa_meta.hpp"
#include "gfm/modulated_inr.hpp"
#include "gfm/pde_data.hpp"

namespace gfm {

// Sectioned key=value run configuration. Unknown sections or keys are hard
// errors. Defaults mirror the reference settings: latent 20, hidden 256,
// 4 modulated layers behind the input layer, eta_inner 0.01,
// eta_outer 0.0001, basis 32/128/32.
class RunConfig {
 public:
  static RunConfig parse_file(const std::string& path);
  static RunConfig parse_text(const std::string& text, const std::string& origin);
  static RunConfig defaults();

  const std::string& text() const { return text_; }

  bool has(const std::string& section, const std::string& key) const;
  std::string get_str(const std::string& section, const std::string& key,
                      const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  uint64_t get_u64(const std::string& section, const std::string& key,
                   uint64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;

  void set(const std::string& section, const std::string& key,
           const std::string& value);

  // Typed views assembled from the sections (GFM_SEED env handled by caller).
  BasisConfig basis_config() const;
  InrConfig inr_config(int input_dim, int output_dim) const;
  TrainConfig train_config() const;

 private:
  void check_known(const std::string& section, const std::string& key,
                   const std::string& where) const;

  std::map<std::string, std::map<std::string, std::string>> values_;
  std::string text_;
};

// "lo:hi", "lo:hi:step", or a comma list; inclusive endpoints up to a half
// step of tolerance.
std::vector<double> parse_range(const std::string& spec);

}  // namespace gfm

#endif  // GFM_RUN_CONFIG_HPP
