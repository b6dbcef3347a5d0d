/*
 * Copyright 2026 The fedledger Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fedledger/config.h"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fedledger {
namespace {

using nlohmann::json;

// Reads typed fields from one JSON object and rejects any key that was not
// read.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw std::invalid_argument(path_ + " must be an object");
  }

  void done() const {
    for (const auto& [key, value] : j_.items()) {
      if (!known_.contains(key)) {
        throw std::invalid_argument("unknown config key: " + path_ + key);
      }
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    known_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument("bad type for " + path_ + key);
    }
  }

  // Accepts a number or the string "inf".
  void get_extended(const char* key, double& out) {
    known_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if (it->is_string() && it->get<std::string>() == "inf") {
      out = kInfinity;
    } else if (it->is_number()) {
      out = it->get<double>();
    } else {
      throw std::invalid_argument(path_ + key + " must be a number or \"inf\"");
    }
  }

  const json* child(const char* key) {
    known_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> known_;
};

json extended(double v) { return std::isinf(v) ? json("inf") : json(v); }

}  // namespace

std::string_view to_string(IntegrationSite s) {
  return s == IntegrationSite::kNode ? "node" : "cloud";
}

double RunConfig::threat_at(std::uint64_t round) const {
  if (threat_schedule.size() == 1) return threat_schedule.front();
  const std::size_t i = round == 0 ? 0 : static_cast<std::size_t>(round - 1);
  return threat_schedule.at(i);
}

void RunConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(fleet.n_nodes >= 1, "fleet.nodes must be >= 1");
  require(fleet.samples_per_node >= 2, "fleet.samples_per_node must be >= 2");
  require(fleet.feature_dim >= 1, "fleet.feature_dim must be >= 1");
  require(fleet.heterogeneity >= 0.0 && fleet.heterogeneity <= 1.0,
          "fleet.heterogeneity must be in [0, 1]");
  require(fleet.sensitive_feature < fleet.feature_dim,
          "fleet.sensitive_feature out of range");
  require(holdout_fraction > 0.0 && holdout_fraction < 1.0,
          "fleet.holdout_fraction must be in (0, 1)");
  require(test_samples >= 1, "fleet.test_samples must be >= 1");
  require(lr > 0.0 && std::isfinite(lr), "training.lr must be positive");
  require(epochs >= 1 && batch >= 1, "training.epochs and batch must be >= 1");
  privacy.validate();
  require(budget_cap > 0.0, "privacy.budget_cap must be > 0");
  require(epsilon_global > 0.0, "privacy.epsilon_global must be > 0");
  require(clip_global > 0.0 && std::isfinite(clip_global),
          "privacy.clip_global must be positive");
  validators.validate();
  for (const auto& [id, b] : byzantine) {
    require(validators.stakes.contains(id), "ledger.byzantine names an unknown validator");
  }
  require(committee_size >= 1 && committee_size <= validators.stakes.size(),
          "ledger.committee_size must be in [1, validators]");
  rules.validate();
  require(ticks_per_round >= 8, "clock.ticks_per_round must be >= 8");
  require(weights.w_min > 0.0 && weights.w_min < 0.5, "feedback.w_min must be in (0, 0.5)");
  require(weights.n_ref > 0.0, "feedback.n_ref must be > 0");
  require(correction.lr > 0.0 && correction.steps >= 1 && correction.batch >= 1,
          "feedback correction settings invalid");
  require(explain.n_repeats >= 1, "feedback.explain_repeats must be >= 1");
  require(validator_epochs >= 1, "feedback.validator_epochs must be >= 1");
  require(!threat_schedule.empty(), "threat_schedule must not be empty");
  require(threat_schedule.size() == 1 || threat_schedule.size() >= rounds,
          "threat_schedule must have one entry or one per round");
  for (double t : threat_schedule) {
    require(t >= 0.0 && t <= 1.0, "threat_schedule entries must be in [0, 1]");
  }
  require(attacks.injections >= 1, "attacks.injections must be >= 1");
  require(attacks.poison_factor > 0.0 && attacks.poison_boundary_factor > 0.0,
          "attacks poison factors must be > 0");
  require(attacks.baseline_rounds >= 1, "attacks.baseline_rounds must be >= 1");
  require(!attacks.seeds.empty(), "attacks.seeds must not be empty");
}

RunConfig parse_config(const json& j) {
  RunConfig cfg;
  bool window_set = false;
  {
    Section top(j, "");
    top.get("seed", cfg.seed);
    top.get("rounds", cfg.rounds);
    top.get("threat_schedule", cfg.threat_schedule);
    top.get("output_dir", cfg.output_dir);

    if (const json* f = top.child("fleet")) {
      Section s(*f, "fleet.");
      s.get("nodes", cfg.fleet.n_nodes);
      s.get("samples_per_node", cfg.fleet.samples_per_node);
      s.get("feature_dim", cfg.fleet.feature_dim);
      s.get("heterogeneity", cfg.fleet.heterogeneity);
      s.get("label_noise", cfg.fleet.label_noise);
      s.get("sensitive_feature", cfg.fleet.sensitive_feature);
      s.get("holdout_fraction", cfg.holdout_fraction);
      s.get("test_samples", cfg.test_samples);
      s.done();
    }
    if (const json* t = top.child("training")) {
      Section s(*t, "training.");
      s.get("lr", cfg.lr);
      s.get("epochs", cfg.epochs);
      s.get("batch", cfg.batch);
      s.done();
    }
    if (const json* p = top.child("privacy")) {
      Section s(*p, "privacy.");
      s.get("epsilon_min", cfg.privacy.epsilon_min);
      s.get_extended("epsilon_max", cfg.privacy.epsilon_max);
      s.get("delta", cfg.privacy.delta);
      s.get("clip_norm", cfg.privacy.clip_norm);
      s.get("stall_relax", cfg.privacy.stall_relax);
      s.get("stall_improvement", cfg.privacy.stall_improvement);
      s.get("stall_window", cfg.privacy.stall_window);
      s.get("budget_cap", cfg.budget_cap);
      s.get_extended("epsilon_global", cfg.epsilon_global);
      s.get("clip_global", cfg.clip_global);
      s.done();
    }
    if (const json* m = top.child("masking")) {
      Section s(*m, "masking.");
      s.get("strength_min", cfg.privacy.mask_strength_min);
      s.get("strength_max", cfg.privacy.mask_strength_max);
      s.done();
    }
    if (const json* l = top.child("ledger")) {
      Section s(*l, "ledger.");
      s.get("validators", cfg.validators.stakes);
      s.get("quorum_fraction", cfg.validators.quorum_fraction);
      s.get("committee_size", cfg.committee_size);
      std::map<std::string, std::string> byz;
      s.get("byzantine", byz);
      for (const auto& [id, name] : byz) {
        auto b = validator_behavior_from_string(name);
        if (!b) throw std::invalid_argument("unknown validator behavior: " + name);
        cfg.byzantine[id] = *b;
      }
      window_set = l->contains("freshness_window");
      s.get("freshness_window", cfg.rules.freshness_window);
      s.get("max_update_norm", cfg.rules.max_update_norm);
      s.get("max_declared_samples", cfg.rules.max_declared_samples);
      s.done();
    }
    if (const json* c = top.child("clock")) {
      Section s(*c, "clock.");
      s.get("ticks_per_round", cfg.ticks_per_round);
      s.done();
    }
    if (const json* fb = top.child("feedback")) {
      Section s(*fb, "feedback.");
      std::string site = std::string(to_string(cfg.integration_site));
      s.get("integration_site", site);
      if (site == "node") {
        cfg.integration_site = IntegrationSite::kNode;
      } else if (site == "cloud") {
        cfg.integration_site = IntegrationSite::kCloud;
      } else {
        throw std::invalid_argument("feedback.integration_site must be node or cloud");
      }
      s.get("w_min", cfg.weights.w_min);
      s.get("n_ref", cfg.weights.n_ref);
      s.get("correction_lr", cfg.correction.lr);
      s.get("correction_steps", cfg.correction.steps);
      s.get("correction_batch", cfg.correction.batch);
      std::string method = std::string(to_string(cfg.explain.method));
      s.get("explain_method", method);
      if (method == "permutation") {
        cfg.explain.method = ExplainMethod::kPermutation;
      } else if (method == "local_surrogate") {
        cfg.explain.method = ExplainMethod::kLocalSurrogate;
      } else {
        throw std::invalid_argument(
            "feedback.explain_method must be permutation or local_surrogate");
      }
      s.get("explain_repeats", cfg.explain.n_repeats);
      s.get("validator_epochs", cfg.validator_epochs);
      s.get("explanations_per_node", cfg.explanations_per_node);
      s.done();
    }
    if (const json* a = top.child("attacks")) {
      Section s(*a, "attacks.");
      s.get("enabled", cfg.attacks.enabled);
      s.get("injections", cfg.attacks.injections);
      s.get("poison_factor", cfg.attacks.poison_factor);
      s.get("poison_boundary_factor", cfg.attacks.poison_boundary_factor);
      s.get("baseline_rounds", cfg.attacks.baseline_rounds);
      s.get("seeds", cfg.attacks.seeds);
      s.done();
    }
    top.done();
  }
  cfg.fleet.seed = cfg.seed;
  cfg.rules.epsilon_cap = cfg.budget_cap;
  if (!window_set) cfg.rules.freshness_window = 2 * cfg.ticks_per_round;
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(j);
}

json config_to_json(const RunConfig& cfg) {
  json byz = json::object();
  for (const auto& [id, b] : cfg.byzantine) byz[id] = to_string(b);
  return {
      {"seed", cfg.seed},
      {"rounds", cfg.rounds},
      {"fleet",
       {{"nodes", cfg.fleet.n_nodes},
        {"samples_per_node", cfg.fleet.samples_per_node},
        {"feature_dim", cfg.fleet.feature_dim},
        {"heterogeneity", cfg.fleet.heterogeneity},
        {"label_noise", cfg.fleet.label_noise},
        {"sensitive_feature", cfg.fleet.sensitive_feature},
        {"holdout_fraction", cfg.holdout_fraction},
        {"test_samples", cfg.test_samples}}},
      {"training", {{"lr", cfg.lr}, {"epochs", cfg.epochs}, {"batch", cfg.batch}}},
      {"privacy",
       {{"epsilon_min", cfg.privacy.epsilon_min},
        {"epsilon_max", extended(cfg.privacy.epsilon_max)},
        {"delta", cfg.privacy.delta},
        {"clip_norm", cfg.privacy.clip_norm},
        {"stall_relax", cfg.privacy.stall_relax},
        {"stall_improvement", cfg.privacy.stall_improvement},
        {"stall_window", cfg.privacy.stall_window},
        {"budget_cap", cfg.budget_cap},
        {"epsilon_global", extended(cfg.epsilon_global)},
        {"clip_global", cfg.clip_global}}},
      {"masking",
       {{"strength_min", cfg.privacy.mask_strength_min},
        {"strength_max", cfg.privacy.mask_strength_max}}},
      {"ledger",
       {{"validators", cfg.validators.stakes},
        {"quorum_fraction", cfg.validators.quorum_fraction},
        {"committee_size", cfg.committee_size},
        {"byzantine", byz},
        {"freshness_window", cfg.rules.freshness_window},
        {"max_update_norm", cfg.rules.max_update_norm},
        {"max_declared_samples", cfg.rules.max_declared_samples}}},
      {"clock", {{"ticks_per_round", cfg.ticks_per_round}}},
      {"feedback",
       {{"integration_site", to_string(cfg.integration_site)},
        {"w_min", cfg.weights.w_min},
        {"n_ref", cfg.weights.n_ref},
        {"correction_lr", cfg.correction.lr},
        {"correction_steps", cfg.correction.steps},
        {"correction_batch", cfg.correction.batch},
        {"explain_method", to_string(cfg.explain.method)},
        {"explain_repeats", cfg.explain.n_repeats},
        {"validator_epochs", cfg.validator_epochs},
        {"explanations_per_node", cfg.explanations_per_node}}},
      {"threat_schedule", cfg.threat_schedule},
      {"output_dir", cfg.output_dir},
      {"attacks",
       {{"enabled", cfg.attacks.enabled},
        {"injections", cfg.attacks.injections},
        {"poison_factor", cfg.attacks.poison_factor},
        {"poison_boundary_factor", cfg.attacks.poison_boundary_factor},
        {"baseline_rounds", cfg.attacks.baseline_rounds},
        {"seeds", cfg.attacks.seeds}}},
  };
}

}  // namespace fedledger
