// Copyright 2026 The ActiveAlign Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Flat `key = value` experiment configs. Lines starting with '#' are
// comments. Every key maps onto one LoopConfig field; CLI flags use the
// same names.

#pragma once

#include <cstdio>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "activealign/harness.hpp"

namespace activealign {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ConfigMap = std::map<std::string, std::string>;

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline ConfigMap parse_config(std::istream& is) {
  ConfigMap out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (out.count(key)) throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key " + key);
    out[key] = trim(t.substr(eq + 1));
  }
  return out;
}

inline ConfigMap parse_config_text(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

namespace detail {

inline double parse_double(const std::string& k, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key " + k + ": not a number: '" + v + "'");
  }
}

inline std::uint64_t parse_uint(const std::string& k, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("config key " + k + ": not a non-negative integer: '" + v + "'");
  }
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError("config key " + k + ": out of range: '" + v + "'");
  }
}

inline bool parse_bool(const std::string& k, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key " + k + ": expected true or false: '" + v + "'");
}

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

struct ConfigKey {
  const char* name;
  const char* help;
  std::function<void(LoopConfig&, const std::string&)> set;
  std::function<std::string(const LoopConfig&)> get;
};

// Defaults follow the published experimental setup except where noted.
inline const std::vector<ConfigKey>& config_keys() {
  using detail::format_double;
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_uint;
#define AA_UINT(key, field, help)                                                                          \
  ConfigKey {                                                                                              \
    key, help, [](LoopConfig& c, const std::string& v) { c.field = static_cast<decltype(c.field)>(parse_uint(key, v)); }, \
        [](const LoopConfig& c) { return std::to_string(c.field); }                                        \
  }
#define AA_REAL(key, field, help)                                                       \
  ConfigKey {                                                                           \
    key, help, [](LoopConfig& c, const std::string& v) { c.field = parse_double(key, v); }, \
        [](const LoopConfig& c) { return format_double(c.field); }                      \
  }
#define AA_BOOL(key, field, help)                                                      \
  ConfigKey {                                                                          \
    key, help, [](LoopConfig& c, const std::string& v) { c.field = parse_bool(key, v); }, \
        [](const LoopConfig& c) { return std::string(c.field ? "true" : "false"); }    \
  }
  static const std::vector<ConfigKey> keys = {
      AA_UINT("seed", seed, "session seed; all randomness derives from it"),
      ConfigKey{"selector", "random | degree | pagerank | uncertainty | daakg_greedy | daakg_partition",
                [](LoopConfig& c, const std::string& v) {
                  try {
                    c.selector = parse_selector(v);
                  } catch (const std::invalid_argument& e) {
                    throw ConfigError(e.what());
                  }
                },
                [](const LoopConfig& c) { return std::string(selector_name(c.selector)); }},
      AA_UINT("budget", budget, "total oracle queries"),
      AA_UINT("batch", batch, "B, queries per round (100)"),
      AA_UINT("pool_n", pool_n, "N of the mutual top-N entity pool (1000 at full scale; 20 suits desk runs)"),
      AA_REAL("rho", rho, "partition threshold (0.9)"),
      AA_REAL("kappa", infer.kappa, "inference power threshold (0.8)"),
      AA_UINT("mu", infer.mu, "maximum hops of inference paths (5)"),
      AA_UINT("beam", infer.beam, "partial paths kept per node and hop; 0 searches exhaustively"),
      AA_BOOL("generic_bounds", infer.generic_bounds, "use the sampling estimator for edge bounds"),
      AA_UINT("samples", infer.samples, "samples of the generic bound estimator"),
      AA_REAL("test_fraction", test_fraction, "share of gold links held out for evaluation"),
      AA_REAL("seed_fraction", seed_fraction, "share of gold links given as seed labels"),
      AA_REAL("match_floor", match_floor, "similarity floor of the greedy matching"),
      AA_UINT("pretrain_epochs", pretrain_epochs, "joint epochs before the first round"),
      AA_UINT("finetune_epochs", finetune_epochs, "focal-loss epochs after each round"),
      AA_UINT("refresh_every", refresh_every, "feature refresh period during pretraining"),
      ConfigKey{"model", "transe | rotate",
                [](LoopConfig& c, const std::string& v) {
                  try {
                    c.embed.kind = parse_model_kind(v);
                  } catch (const std::invalid_argument& e) {
                    throw ConfigError(e.what());
                  }
                },
                [](const LoopConfig& c) { return std::string(model_kind_name(c.embed.kind)); }},
      AA_UINT("entity_dim", embed.entity_dim, "entity and relation dimension (100)"),
      AA_UINT("class_dim", embed.class_dim, "class dimension (50)"),
      AA_REAL("margin_er", embed.margin_er, "entity-relation hinge margin"),
      AA_REAL("margin_ec", embed.margin_ec, "entity-class hinge margin"),
      AA_REAL("z_ent", align.z_ent, "entity temperature (0.05)"),
      AA_REAL("z_rel", align.z_rel, "relation temperature (0.1)"),
      AA_REAL("z_cls", align.z_cls, "class temperature (0.1)"),
      AA_REAL("tau", align.tau, "semi-supervised similarity threshold (0.9)"),
      AA_REAL("gamma", align.gamma, "focal loss focus parameter (2)"),
      AA_REAL("init_noise", align.init_noise, "noise added to the identity mappings at init"),
      AA_REAL("lr", train.learning_rate, "SGD learning rate"),
      AA_UINT("batch_size", train.batch_size, "triplets per mini-batch"),
      AA_UINT("negatives", train.negatives, "corrupted triplets per positive"),
      AA_UINT("align_negatives", train.align_negatives, "negatives per labeled match"),
      AA_REAL("clip_norm", train.clip_norm, "gradient clipping norm; 0 disables"),
      AA_BOOL("use_semi", train.use_semi, "mine semi-supervised pseudo matches"),
      AA_REAL("align_weight", train.align_weight, "weight of the alignment losses"),
      AA_REAL("semi_weight", train.semi_weight, "weight of the semi-supervised loss"),
  };
#undef AA_UINT
#undef AA_REAL
#undef AA_BOOL
  return keys;
}

inline const ConfigKey* find_config_key(const std::string& name) {
  for (const ConfigKey& k : config_keys()) {
    if (name == k.name) return &k;
  }
  return nullptr;
}

// Applies every entry, then validates the result.
inline void apply_config(LoopConfig& cfg, const ConfigMap& values) {
  for (const auto& [k, v] : values) {
    const ConfigKey* key = find_config_key(k);
    if (!key) throw ConfigError("unknown config key: " + k);
    key->set(cfg, v);
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
}

// Desk-scale defaults used by the CLI unless overridden.
inline LoopConfig desk_config() {
  LoopConfig c;
  c.embed.entity_dim = 32;
  c.embed.class_dim = 16;
  c.pool_n = 20;
  return c;
}

// Every key in declaration order; reading it back reproduces `cfg`.
inline std::string dump_config(const LoopConfig& cfg) {
  std::string out;
  for (const ConfigKey& k : config_keys()) out += std::string(k.name) + " = " + k.get(cfg) + "\n";
  return out;
}

}  // namespace activealign
