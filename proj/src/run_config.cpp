#include "gfm/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "gfm/common.hpp"

namespace gfm {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"model",
       {"modulation", "hidden_dim", "hidden_layers", "omega0", "latent_dim",
        "map_hidden", "linear_map"}},
      {"basis", {"n_low", "n_high", "n_phase", "random_phases", "seed"}},
      {"train",
       {"eta_inner", "eta_outer", "batch_size", "inner_k", "inner_steps", "epochs",
        "seed", "outer", "adam_beta1", "adam_beta2", "adam_eps", "loss_weight_a",
        "loss_weight_u", "checkpoint_every", "fit_steps", "fit_eta"}},
      {"data",
       {"dataset", "betas", "a_range", "k", "nx", "nt", "n", "seed", "ks_L",
        "ks_nu", "ks_dt", "ks_t_end", "ks_record_nx", "ks_record_nt",
        "ks_solver_nx", "ks_count"}},
      {"paths", {"out_dir"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void RunConfig::check_known(const std::string& section, const std::string& key,
                            const std::string& where) const {
  auto sit = schema().find(section);
  if (sit == schema().end())
    throw_config(where + ": unknown section [" + section + "]");
  if (!key.empty() && !sit->second.count(key))
    throw_config(where + ": unknown key '" + key + "' in [" + section + "]");
}

RunConfig RunConfig::parse_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  cfg.text_ = text;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw_config(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      cfg.check_known(section, "", where);
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw_config(where + ": expected key = value");
    if (section.empty()) throw_config(where + ": key outside any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    cfg.check_known(section, key, where);
    if (cfg.values_[section].count(key))
      throw_config(where + ": duplicate key '" + key + "'");
    cfg.values_[section][key] = value;
  }
  return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_io("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path);
}

RunConfig RunConfig::defaults() { return RunConfig(); }

bool RunConfig::has(const std::string& section, const std::string& key) const {
  auto sit = values_.find(section);
  return sit != values_.end() && sit->second.count(key) > 0;
}

std::string RunConfig::get_str(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  check_known(section, key, "config");
  auto sit = values_.find(section);
  if (sit == values_.end()) return fallback;
  auto kit = sit->second.find(key);
  return kit == sit->second.end() ? fallback : kit->second;
}

double RunConfig::get_double(const std::string& section, const std::string& key,
                             double fallback) const {
  const std::string v = get_str(section, key, "");
  if (v.empty()) return fallback;
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw_config("[" + section + "] " + key + ": not a number: '" + v + "'");
  }
}

int RunConfig::get_int(const std::string& section, const std::string& key,
                       int fallback) const {
  const double d = get_double(section, key, static_cast<double>(fallback));
  const int i = static_cast<int>(d);
  if (static_cast<double>(i) != d)
    throw_config("[" + section + "] " + key + ": expected integer");
  return i;
}

uint64_t RunConfig::get_u64(const std::string& section, const std::string& key,
                            uint64_t fallback) const {
  const std::string v = get_str(section, key, "");
  if (v.empty()) return fallback;
  try {
    size_t pos = 0;
    const uint64_t u = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return u;
  } catch (const std::exception&) {
    throw_config("[" + section + "] " + key + ": not an unsigned integer: '" + v + "'");
  }
}

bool RunConfig::get_bool(const std::string& section, const std::string& key,
                         bool fallback) const {
  const std::string v = get_str(section, key, "");
  if (v.empty()) return fallback;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw_config("[" + section + "] " + key + ": expected a boolean, got '" + v + "'");
}

void RunConfig::set(const std::string& section, const std::string& key,
                    const std::string& value) {
  check_known(section, key, "config override");
  values_[section][key] = value;
  text_ += "\n# override\n[" + section + "]\n" + key + " = " + value + "\n";
}

BasisConfig RunConfig::basis_config() const {
  BasisConfig b;
  b.n_low = get_int("basis", "n_low", 32);
  b.n_high = get_int("basis", "n_high", 128);
  b.n_phase = get_int("basis", "n_phase", 32);
  b.random_phases = get_bool("basis", "random_phases", false);
  b.seed = get_u64("basis", "seed", 0);
  return b;
}

InrConfig RunConfig::inr_config(int input_dim, int output_dim) const {
  InrConfig c;
  c.input_dim = input_dim;
  c.output_dim = output_dim;
  c.hidden_dim = get_int("model", "hidden_dim", 256);
  c.hidden_layers = get_int("model", "hidden_layers", 4);
  c.omega0 = get_double("model", "omega0", 30.0);
  c.kind = modulation_kind_from_string(get_str("model", "modulation", "gfm"));
  c.latent_dim = get_int("model", "latent_dim", 20);
  c.map_hidden = get_int("model", "map_hidden", 512);
  c.linear_map = get_bool("model", "linear_map", false);
  c.basis = basis_config();
  c.basis.m_points = c.hidden_dim;
  return c;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.eta_inner = get_double("train", "eta_inner", 0.01);
  t.eta_outer = get_double("train", "eta_outer", 0.0001);
  t.batch_size = get_int("train", "batch_size", 32);
  t.inner_k = get_int("train", "inner_k", 0);
  t.inner_steps = get_int("train", "inner_steps", 1);
  t.epochs = get_int("train", "epochs", 0);
  t.seed = get_u64("train", "seed", 0);
  const std::string outer = get_str("train", "outer", "sgd");
  if (outer == "sgd") t.outer = TrainConfig::Outer::Sgd;
  else if (outer == "adam") t.outer = TrainConfig::Outer::Adam;
  else throw_config("[train] outer: expected sgd or adam, got '" + outer + "'");
  t.adam_beta1 = get_double("train", "adam_beta1", 0.9);
  t.adam_beta2 = get_double("train", "adam_beta2", 0.999);
  t.adam_eps = get_double("train", "adam_eps", 1e-8);
  t.loss_weight_a = get_double("train", "loss_weight_a", 1.0);
  t.loss_weight_u = get_double("train", "loss_weight_u", 1.0);
  return t;
}

std::vector<double> parse_range(const std::string& spec) {
  if (spec.empty()) throw_config("empty range spec");
  std::vector<double> out;
  if (spec.find(',') != std::string::npos || spec.find(':') == std::string::npos) {
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw_config("range '" + spec + "': bad entry '" + item + "'");
      }
    }
    return out;
  }
  double lo = 0, hi = 0, step = 1.0;
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 2 && parts.size() != 3)
    throw_config("range '" + spec + "': expected lo:hi or lo:hi:step");
  try {
    lo = std::stod(parts[0]);
    hi = std::stod(parts[1]);
    if (parts.size() == 3) step = std::stod(parts[2]);
  } catch (const std::exception&) {
    throw_config("range '" + spec + "': bad number");
  }
  if (step <= 0.0) throw_config("range '" + spec + "': step must be positive");
  if (hi < lo) throw_config("range '" + spec + "': hi < lo");
  for (double v = lo; v <= hi + step * 0.5; v += step) out.push_back(v);
  return out;
}

}  // namespace gfm
