// Copyright 2026 The LeakChain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "leakchain/harness/config.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

namespace leakchain::harness {

namespace {

std::string LineOf(const YAML::Node& node) {
  const auto mark = node.Mark();
  return mark.line >= 0 ? " (line " + std::to_string(mark.line + 1) + ")" : "";
}

template <typename T>
T As(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("config key '" + key + "' has an invalid value" + LineOf(node));
  }
}

template <typename T>
std::vector<T> AsList(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence()) {
    throw ConfigError("config key '" + key + "' must be a list" + LineOf(node));
  }
  std::vector<T> out;
  for (const auto& item : node) out.push_back(As<T>(item, key));
  return out;
}

Mode ParseMode(const std::string& text) {
  if (text == "verify-bound") return Mode::kVerifyBound;
  if (text == "train") return Mode::kTrain;
  if (text == "sweep") return Mode::kSweep;
  if (text == "probe") return Mode::kProbe;
  if (text == "report") return Mode::kReport;
  throw ConfigError("unknown mode '" + text + "'");
}

using Setter = std::function<void(RunConfig&, const YAML::Node&, const std::string&)>;

template <typename T>
Setter Field(T RunConfig::*member) {
  return [member](RunConfig& c, const YAML::Node& n, const std::string& k) {
    c.*member = As<T>(n, k);
  };
}

template <typename T>
Setter ListField(std::vector<T> RunConfig::*member) {
  return [member](RunConfig& c, const YAML::Node& n, const std::string& k) {
    c.*member = AsList<T>(n, k);
  };
}

const std::map<std::string, Setter>& Schema() {
  static const std::map<std::string, Setter> schema = {
      {"mode", [](RunConfig& c, const YAML::Node& n, const std::string& k) {
         c.mode = ParseMode(As<std::string>(n, k));
       }},
      {"N", Field(&RunConfig::agents)},
      {"beta", Field(&RunConfig::beta)},
      {"betas", [](RunConfig& c, const YAML::Node& n, const std::string& k) {
         c.betas = AsList<double>(n, k);
       }},
      {"selective", [](RunConfig& c, const YAML::Node& n, const std::string& k) {
         c.selective = parse_selective(As<std::string>(n, k));
       }},
      {"batch", Field(&RunConfig::batch)},
      {"iterations", Field(&RunConfig::iterations)},
      {"critic_steps", Field(&RunConfig::critic_steps)},
      {"eta_theta", Field(&RunConfig::eta_theta)},
      {"eta_psi", Field(&RunConfig::eta_psi)},
      {"clip_norm", Field(&RunConfig::clip_norm)},
      {"eval_interval", Field(&RunConfig::eval_interval)},
      {"repr_dim", Field(&RunConfig::repr_dim)},
      {"agent_hidden", Field(&RunConfig::agent_hidden)},
      {"agent_hidden_layers", Field(&RunConfig::agent_hidden_layers)},
      {"critic_hidden", Field(&RunConfig::critic_hidden)},
      {"critic_hidden_layers", Field(&RunConfig::critic_hidden_layers)},
      {"ema_rate", Field(&RunConfig::ema_rate)},
      {"public_dim", Field(&RunConfig::public_dim)},
      {"sensitive_classes", Field(&RunConfig::sensitive_classes)},
      {"label_classes", Field(&RunConfig::label_classes)},
      {"sensitive_to_input", Field(&RunConfig::sensitive_to_input)},
      {"sensitive_label_weight", Field(&RunConfig::sensitive_label_weight)},
      {"train_samples", Field(&RunConfig::train_samples)},
      {"test_samples", Field(&RunConfig::test_samples)},
      {"label_noise", Field(&RunConfig::label_noise)},
      {"probe_hidden", Field(&RunConfig::probe_hidden)},
      {"probe_steps", Field(&RunConfig::probe_steps)},
      {"probe_lr", Field(&RunConfig::probe_lr)},
      {"ot_sigma", Field(&RunConfig::ot_sigma)},
      {"mi_baseline", [](RunConfig& c, const YAML::Node& n, const std::string& k) {
         c.mi_baseline = As<double>(n, k);
       }},
      {"seeds", ListField(&RunConfig::seeds)},
      {"output_dir", Field(&RunConfig::output_dir)},
      {"sweep_betas", ListField(&RunConfig::sweep_betas)},
      {"sweep_depths", ListField(&RunConfig::sweep_depths)},
      {"sweep_selective", [](RunConfig& c, const YAML::Node& n, const std::string& k) {
         c.sweep_selective.clear();
         for (const auto& s : AsList<std::string>(n, k)) {
           c.sweep_selective.push_back(parse_selective(s));
         }
       }},
      {"verify_count", Field(&RunConfig::verify_count)},
      {"verify_n_min", Field(&RunConfig::verify_n_min)},
      {"verify_n_max", Field(&RunConfig::verify_n_max)},
      {"verify_max_alphabet", Field(&RunConfig::verify_max_alphabet)},
      {"verify_seed", Field(&RunConfig::verify_seed)},
  };
  return schema;
}

void Require(bool ok, const std::string& key, const std::string& rule) {
  if (!ok) throw ConfigError("config key '" + key + "' " + rule);
}

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::kVerifyBound: return "verify-bound";
    case Mode::kTrain: return "train";
    case Mode::kSweep: return "sweep";
    case Mode::kProbe: return "probe";
    case Mode::kReport: return "report";
  }
  return "train";
}

std::string to_string(Selective selective) {
  switch (selective) {
    case Selective::kNone: return "none";
    case Selective::kEarly: return "early";
    case Selective::kAll: return "all";
  }
  return "all";
}

Selective parse_selective(const std::string& text) {
  if (text == "none") return Selective::kNone;
  if (text == "early") return Selective::kEarly;
  if (text == "all") return Selective::kAll;
  throw ConfigError("selective must be none, early or all; got '" + text + "'");
}

void RunConfig::validate() const {
  Require(agents >= 1, "N", "must be >= 1");
  Require(beta >= 0.0 && std::isfinite(beta), "beta", "must be finite and >= 0");
  if (betas) {
    Require(static_cast<int>(betas->size()) == agents, "betas", "must have N entries");
    for (double b : *betas) Require(b >= 0.0 && std::isfinite(b), "betas", "must be >= 0");
  }
  Require(batch >= 2, "batch", "must be >= 2");
  Require(iterations >= 0, "iterations", "must be >= 0");
  Require(critic_steps >= 0, "critic_steps", "must be >= 0");
  Require(eta_theta >= 0.0, "eta_theta", "must be >= 0");
  Require(eta_psi >= 0.0, "eta_psi", "must be >= 0");
  Require(eval_interval >= 0, "eval_interval", "must be >= 0");
  Require(repr_dim >= 1, "repr_dim", "must be >= 1");
  Require(agent_hidden >= 1, "agent_hidden", "must be >= 1");
  Require(agent_hidden_layers >= 0, "agent_hidden_layers", "must be >= 0");
  Require(critic_hidden >= 1, "critic_hidden", "must be >= 1");
  Require(critic_hidden_layers >= 0, "critic_hidden_layers", "must be >= 0");
  Require(ema_rate > 0.0 && ema_rate < 1.0, "ema_rate", "must lie in (0, 1)");
  Require(public_dim >= 1, "public_dim", "must be >= 1");
  Require(sensitive_classes >= 2, "sensitive_classes", "must be >= 2");
  Require(label_classes >= 2, "label_classes", "must be >= 2");
  Require(sensitive_label_weight >= 0.0 && sensitive_label_weight <= 1.0,
          "sensitive_label_weight", "must lie in [0, 1]");
  Require(train_samples >= 2, "train_samples", "must be >= 2");
  Require(test_samples >= 4, "test_samples", "must be >= 4");
  Require(label_noise >= 0.0, "label_noise", "must be >= 0");
  Require(probe_hidden >= 1, "probe_hidden", "must be >= 1");
  Require(probe_steps >= 0, "probe_steps", "must be >= 0");
  Require(probe_lr >= 0.0, "probe_lr", "must be >= 0");
  Require(ot_sigma >= 0.0, "ot_sigma", "must be >= 0");
  if (mi_baseline) Require(*mi_baseline >= 0.0, "mi_baseline", "must be >= 0");
  Require(!seeds.empty(), "seeds", "must not be empty");
  Require(!output_dir.empty(), "output_dir", "must not be empty");
  for (double b : sweep_betas) Require(b >= 0.0 && std::isfinite(b), "sweep_betas", "must be >= 0");
  for (int n : sweep_depths) Require(n >= 1, "sweep_depths", "entries must be >= 1");
  Require(verify_count >= 0, "verify_count", "must be >= 0");
  Require(verify_n_min >= 1, "verify_n_min", "must be >= 1");
  Require(verify_n_max >= verify_n_min, "verify_n_max", "must be >= verify_n_min");
  Require(verify_max_alphabet >= 2, "verify_max_alphabet", "must be >= 2");
}

std::vector<double> RunConfig::effective_betas() const {
  std::vector<double> b = betas ? *betas : std::vector<double>(static_cast<std::size_t>(agents), beta);
  switch (selective) {
    case Selective::kAll:
      return b;
    case Selective::kNone:
      return std::vector<double>(b.size(), 0.0);
    case Selective::kEarly: {
      const std::size_t early = std::max<std::size_t>(1, b.size() / 2);
      const double total = std::accumulate(b.begin(), b.end(), 0.0);
      std::vector<double> out(b.size(), 0.0);
      for (std::size_t i = 0; i < early; ++i) out[i] = total / static_cast<double>(early);
      return out;
    }
  }
  return b;
}

double RunConfig::nominal_beta() const {
  if (!betas) return beta;
  return std::accumulate(betas->begin(), betas->end(), 0.0) / static_cast<double>(betas->size());
}

train::SyntheticTaskSpec RunConfig::task_spec(std::uint64_t seed) const {
  train::SyntheticTaskSpec t;
  t.agents = agents;
  t.public_dim = public_dim;
  t.sensitive_classes = sensitive_classes;
  t.label_classes = label_classes;
  t.sensitive_to_input = sensitive_to_input;
  t.sensitive_label_weight = sensitive_label_weight;
  t.train_samples = train_samples;
  t.test_samples = test_samples;
  t.label_noise = label_noise;
  t.seed = seed;
  return t;
}

train::TrainConfig RunConfig::train_config(std::uint64_t seed) const {
  train::TrainConfig c;
  c.betas = effective_betas();
  c.eta_theta = eta_theta;
  c.eta_psi = eta_psi;
  c.batch = batch;
  c.iterations = iterations;
  c.critic_steps = critic_steps;
  c.clip_norm = clip_norm;
  c.eval_interval = eval_interval;
  c.seed = seed;
  c.model = {repr_dim, agent_hidden, agent_hidden_layers};
  c.critic.hidden = critic_hidden;
  c.critic.hidden_layers = critic_hidden_layers;
  c.critic.ema_rate = ema_rate;
  c.critic.optim.lr = eta_psi;
  return c;
}

eval::EvalConfig RunConfig::eval_config(std::uint64_t seed) const {
  eval::EvalConfig e;
  e.probe.hidden = probe_hidden;
  e.probe.steps = probe_steps;
  e.probe.lr = probe_lr;
  e.ot_sigma = ot_sigma;
  e.seed = seed;
  return e;
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("config parse error at line " + std::to_string(e.mark.line + 1) +
                      ": " + e.msg);
  }
  RunConfig c;
  if (root.IsNull()) {
    c.validate();
    return c;
  }
  if (!root.IsMap()) throw ConfigError("config must be a mapping of keys to values");
  const auto& schema = Schema();
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    const auto it = schema.find(key);
    if (it == schema.end()) {
      throw ConfigError("unknown config key '" + key + "'" + LineOf(kv.first));
    }
    it->second(c, kv.second, key);
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  auto kv = [&](const char* key, const auto& value) { out << YAML::Key << key << YAML::Value << value; };
  auto list = [&](const char* key, const auto& values) {
    out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& v : values) out << v;
    out << YAML::EndSeq;
  };
  kv("mode", to_string(c.mode));
  kv("N", c.agents);
  kv("beta", c.beta);
  if (c.betas) list("betas", *c.betas);
  kv("selective", to_string(c.selective));
  kv("batch", c.batch);
  kv("iterations", c.iterations);
  kv("critic_steps", c.critic_steps);
  kv("eta_theta", c.eta_theta);
  kv("eta_psi", c.eta_psi);
  kv("clip_norm", c.clip_norm);
  kv("eval_interval", c.eval_interval);
  kv("repr_dim", c.repr_dim);
  kv("agent_hidden", c.agent_hidden);
  kv("agent_hidden_layers", c.agent_hidden_layers);
  kv("critic_hidden", c.critic_hidden);
  kv("critic_hidden_layers", c.critic_hidden_layers);
  kv("ema_rate", c.ema_rate);
  kv("public_dim", c.public_dim);
  kv("sensitive_classes", c.sensitive_classes);
  kv("label_classes", c.label_classes);
  kv("sensitive_to_input", c.sensitive_to_input);
  kv("sensitive_label_weight", c.sensitive_label_weight);
  kv("train_samples", c.train_samples);
  kv("test_samples", c.test_samples);
  kv("label_noise", c.label_noise);
  kv("probe_hidden", c.probe_hidden);
  kv("probe_steps", c.probe_steps);
  kv("probe_lr", c.probe_lr);
  kv("ot_sigma", c.ot_sigma);
  if (c.mi_baseline) kv("mi_baseline", *c.mi_baseline);
  list("seeds", c.seeds);
  kv("output_dir", c.output_dir);
  if (!c.sweep_betas.empty()) list("sweep_betas", c.sweep_betas);
  if (!c.sweep_depths.empty()) list("sweep_depths", c.sweep_depths);
  if (!c.sweep_selective.empty()) {
    std::vector<std::string> names;
    for (auto s : c.sweep_selective) names.push_back(to_string(s));
    list("sweep_selective", names);
  }
  kv("verify_count", c.verify_count);
  kv("verify_n_min", c.verify_n_min);
  kv("verify_n_max", c.verify_n_max);
  kv("verify_max_alphabet", c.verify_max_alphabet);
  kv("verify_seed", c.verify_seed);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string git_blob_hash(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw std::runtime_error("cannot allocate digest context");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &length) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("SHA-1 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

}  // namespace leakchain::harness
