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

#include "fedledger/orchestrator.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <utility>

#include <nlohmann/json.hpp>

#include "fedledger/encoding.h"
#include "fedledger/kernels.h"
#include "fedledger/messages.h"
#include "fedledger/rng.h"

namespace fedledger {
namespace {

// Stream tags for derive_seed.
enum : std::uint64_t {
  kTagSplit = 1,
  kTagTest,
  kTagKeys,
  kTagValidators,
  kTagValidatorModel,
  kTagTrain,
  kTagNoise,
  kTagMask,
  kTagGlobalNoise,
  kTagCommittee,
  kTagExplain,
  kTagCorrection,
  kTagSender,
};

ModelParams unflatten(std::span<const double> flat, std::uint64_t version) {
  ModelParams p;
  p.weights.assign(flat.begin(), flat.end() - 1);
  p.bias = flat.back();
  p.version = version;
  return p;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

nlohmann::json number_or_inf(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

}  // namespace

Result<LedgerBlock, AppendFailure> LedgerSandbox::append(
    std::span<const std::uint8_t> payload, const Digest& payload_hash,
    const BlockMeta& meta) {
  ContractState state;
  state.seen = seen;
  state.budget = &budget;
  state.now = now;
  const CommitteeConfig committee{committee_size,
                                  derive_seed(seed, {kTagCommittee, chain.size()})};
  auto result = append_block(chain, payload, payload_hash, meta, *pool, committee,
                             rules, state);
  seen = state.seen;
  return result;
}

Simulation::Simulation(RunConfig cfg)
    : cfg_(std::move(cfg)), budget_(cfg_.budget_cap) {
  cfg_.validate();
  fleet_ = generate_fleet(cfg_.fleet);

  std::vector<NodeId> ids;
  for (const auto& p : fleet_.partitions) {
    ids.push_back(p.node_id);
    splits_.emplace(p.node_id,
                    split_partition(p, cfg_.holdout_fraction,
                                    derive_seed(cfg_.seed, {kTagSplit, p.node_id.value})));
    // Model 2: the node's independent validator, trained once on its holdout.
    const LocalSplit& s = splits_.at(p.node_id);
    ModelParams m2 = ModelParams::zeros(fleet_.feature_dim);
    const TrainConfig tc{cfg_.lr, cfg_.validator_epochs, cfg_.batch,
                         derive_seed(cfg_.seed, {kTagValidatorModel, p.node_id.value})};
    apply_delta(m2, train_local(m2, s.holdout, tc).grad);
    validator_models_.emplace(p.node_id, std::move(m2));
  }
  test_set_ = sample_population(fleet_, derive_seed(cfg_.seed, {kTagTest}),
                                cfg_.test_samples);

  keys_ = KeyRegistry::derive(derive_seed(cfg_.seed, {kTagKeys}), ids);
  std::vector<std::string> parties = {kAggregatorParty, kLedgerParty};
  for (NodeId id : ids) parties.push_back(party_name(id));
  for (std::size_t i = 0; i < parties.size(); ++i) {
    senders_.try_emplace(parties[i], parties[i],
                         derive_seed(cfg_.seed, {kTagSender, i}));
    receivers_.try_emplace(parties[i], parties[i], &keys_,
                           cfg_.rules.freshness_window);
  }

  pool_ = std::make_shared<const ValidatorPool>(
      cfg_.validators, derive_seed(cfg_.seed, {kTagValidators}), cfg_.byzantine);
  ledger_state_.budget = &budget_;

  global_ = ModelParams::zeros(fleet_.feature_dim);
  const Bytes genesis = encode_model(global_);
  const Digest genesis_hash = canonical_hash(genesis);
  chain_ = make_genesis_chain(genesis_hash);
  payload_store_[genesis_hash] = genesis;
}

Receiver& Simulation::receiver(const std::string& party) {
  auto it = receivers_.find(party);
  if (it == receivers_.end()) {
    throw std::invalid_argument("unknown party: " + party);
  }
  return it->second;
}

LedgerSandbox Simulation::ledger_sandbox() const {
  LedgerSandbox s;
  s.chain = chain_;
  s.seen = ledger_state_.seen;
  s.budget = budget_;
  s.pool = pool_;
  s.rules = cfg_.rules;
  s.committee_size = cfg_.committee_size;
  s.seed = cfg_.seed;
  s.now = now_;
  return s;
}

std::uint64_t Simulation::tick(std::uint64_t phase) const {
  return round_ * cfg_.ticks_per_round + phase;
}

FreshnessTag Simulation::fresh_tag(const std::string& from, std::uint64_t phase) {
  return senders_.at(from).fresh_tag(tick(phase), round_);
}

const WireRecord& Simulation::send(const std::string& from, const std::string& to,
                                   const std::string& channel,
                                   const FreshnessTag& tag, Bytes payload) {
  const crypto::Key* key = keys_.lookup(from, to);
  if (key == nullptr) throw Error("no channel key for " + from + "->" + to);
  WireRecord rec;
  rec.channel = channel;
  rec.envelope = senders_.at(from).seal(*key, to, tag, payload);
  rec.wire = encode_envelope(rec.envelope);
  rec.plaintext = std::move(payload);
  trace_.push_back(std::move(rec));
  return trace_.back();
}

std::optional<Bytes> Simulation::deliver(const WireRecord& rec,
                                         std::uint64_t phase,
                                         RoundReport& report) {
  now_ = tick(phase);
  const Envelope env = decode_envelope(rec.wire);
  auto opened = receiver(env.receiver).accept(env, now_);
  if (!opened.ok()) {
    report.rejected.push_back(
        {env.sender, "channel", std::string(to_string(opened.error()))});
    return std::nullopt;
  }
  return std::move(opened).value();
}

std::optional<LedgerBlock> Simulation::log_record(const BlockMeta& meta,
                                                  Bytes payload,
                                                  std::uint64_t phase,
                                                  RoundReport& report) {
  const Digest hash = canonical_hash(payload);
  const FreshnessTag tag = fresh_tag(kAggregatorParty, phase);
  const std::string channel =
      meta.kind == BlockKind::kLocalUpdate   ? "ledger_submit"
      : meta.kind == BlockKind::kGlobalModel ? "global_log"
                                             : "feedback_log";
  const WireRecord& rec = send(kAggregatorParty, kLedgerParty, channel, tag,
                               encode_submission({meta, hash, std::move(payload)}));
  auto opened = deliver(rec, phase, report);
  if (!opened) return std::nullopt;

  Submission sub = decode_submission(*opened);
  ledger_state_.now = now_;
  const CommitteeConfig committee{
      cfg_.committee_size, derive_seed(cfg_.seed, {kTagCommittee, chain_.size()})};
  auto appended = append_block(chain_, sub.payload, sub.payload_hash, sub.meta, *pool_,
                               committee, cfg_.rules, ledger_state_);
  if (!appended.ok()) {
    report.rejected.push_back({sub.meta.origin, "ledger", describe(appended.error())});
    return std::nullopt;
  }
  payload_store_[sub.payload_hash] = std::move(sub.payload);
  ++report.blocks_appended;
  return appended.value();
}

RoundReport Simulation::run_round() {
  ++round_;
  trace_.clear();
  edge_updates_.clear();

  RoundReport report;
  report.round = round_;
  const std::uint64_t r = round_;
  const double threat = cfg_.threat_at(r);
  const std::size_t payload_len = fleet_.feature_dim + 1;
  const std::uint64_t next_version = global_.version + 1;

  // Phase 0 at each node: train, assess context, clip, noise.
  std::vector<PrivacyContext> contexts;
  for (const auto& part : fleet_.partitions) {
    const NodeId id = part.node_id;
    const LocalSplit& split = splits_.at(id);
    const TrainConfig tc{cfg_.lr, cfg_.epochs, cfg_.batch,
                         derive_seed(cfg_.seed, {kTagTrain, r, id.value})};
    GradientUpdate u = train_local(global_, split.train, tc);
    auto& history = loss_history_[id];
    history.push_back(u.loss_trace.back());
    const PrivacyContext ctx =
        assess_context(part.sensitivity, threat, history, cfg_.privacy);

    NodeRoundStats stats;
    stats.node = id;
    stats.epsilon = ctx.epsilon;
    if (ctx.noise_enabled() && !budget_.can_afford(id, ctx.epsilon)) {
      // Sits the round out before masks are agreed.
      report.rejected.push_back({party_name(id), "budget", "over_budget"});
      report.nodes.push_back(stats);
      continue;
    }
    stats.participated = true;
    report.nodes.push_back(stats);

    EdgeUpdate e;
    e.node = id;
    e.raw = u.grad;
    const GradientUpdate clipped = clip_update(u, ctx.clip_norm);
    e.clipped = clipped.grad;
    e.update_norm = kernels::norm2(e.clipped);
    const GradientUpdate noised = add_dp_noise(
        clipped, ctx, derive_seed(cfg_.seed, {kTagNoise, r, id.value}));
    e.noised = noised.grad;
    e.n_samples = split.train.size();
    e.weighted = e.noised;
    kernels::scale(static_cast<double>(e.n_samples), e.weighted);
    e.epsilon = ctx.epsilon;
    edge_updates_.push_back(std::move(e));
    contexts.push_back(ctx);
    report.participants.push_back(id);
  }

  auto finish = [&](RoundReport& rep) -> RoundReport {
    const Evaluation ev = evaluate(global_, test_set_);
    rep.model_version = global_.version;
    rep.global_accuracy = ev.accuracy;
    rep.global_loss = ev.mean_loss;
    rep.global_fpr = ev.false_positive_rate;
    for (const auto& p : fleet_.partitions) {
      rep.epsilon_spent[p.node_id] = budget_.spent(p.node_id);
    }
    if (cfg_.attacks.enabled) {
      AttackProbe probe;
      for (const auto& rec : std::vector<WireRecord>(trace_)) {
        if (rec.channel != "update") continue;
        // Replay the genuine envelope, then a tampered copy.
        Envelope replay = decode_envelope(rec.wire);
        ++probe.injected;
        if (!receiver(replay.receiver).accept(replay, now_).ok()) ++probe.detected;
        Envelope tampered = replay;
        if (!tampered.ciphertext.empty()) tampered.ciphertext[0] ^= 0x01;
        ++probe.injected;
        if (!receiver(tampered.receiver).accept(tampered, now_).ok()) {
          ++probe.detected;
        }
      }
      rep.attacks = probe;
    }
    return rep;
  };

  auto abort_round = [&](const std::string& reason) -> RoundReport {
    report.aborted = true;
    report.abort_reason = reason;
    return finish(report);
  };

  if (edge_updates_.empty()) return abort_round("no node could afford this round");

  // Shared mask strength: the strongest context, scaled to the largest
  // sample-weighted update.
  double max_norm = 0.0;
  double strength = 0.0;
  for (std::size_t i = 0; i < edge_updates_.size(); ++i) {
    max_norm = std::max(max_norm, kernels::norm2(edge_updates_[i].weighted));
    strength = std::max(strength, contexts[i].mask_strength);
  }
  strength = scaled_mask_strength(strength, max_norm);
  const auto masks =
      derive_masks(derive_seed(cfg_.seed, {kTagMask}), r, report.participants,
                   payload_len, strength);

  // Phase 0: P -> C. trace_ grows below, so keep copies of the uploads.
  std::vector<WireRecord> uploads;
  for (EdgeUpdate& e : edge_updates_) {
    const std::string party = party_name(e.node);
    const FreshnessTag tag = fresh_tag(party, 0);
    const GradientUpdate weighted{e.weighted, e.n_samples, {}};
    e.masked = apply_mask(weighted, masks.at(e.node), tag);
    edge_hashes_[{r, e.node}] = e.masked.payload_hash;
    const double charged = std::isinf(e.epsilon) ? 0.0 : e.epsilon;
    uploads.push_back(send(party, kAggregatorParty, "update", tag,
                           encode_update_message({e.masked, charged, e.update_norm})));
  }

  // Phase 1: C admits updates and logs each one through B.
  std::vector<MaskedUpdate> admitted;
  for (const WireRecord& rec : uploads) {
    auto opened = deliver(rec, 1, report);
    if (!opened) continue;
    UpdateMessage msg = decode_update_message(*opened);
    BlockMeta meta;
    meta.kind = BlockKind::kLocalUpdate;
    meta.origin = party_name(msg.masked.node_id);
    meta.round = r;
    meta.model_version = next_version;
    meta.freshness = msg.masked.freshness;
    meta.epsilon_charged = msg.epsilon;
    meta.n_samples = msg.masked.n_samples;
    meta.update_norm = msg.update_norm;
    if (log_record(meta, encode_vector(msg.masked.payload), 1, report)) {
      admitted.push_back(std::move(msg.masked));
    }
  }
  for (const auto& e : edge_updates_) {
    report.epsilon_charged[e.node] = 0.0;
  }
  for (const auto& block : chain_) {
    if (block.meta.kind != BlockKind::kLocalUpdate || block.meta.round != r) continue;
    if (auto id = parse_party(block.meta.origin)) {
      report.epsilon_charged[*id] = block.meta.epsilon_charged;
    }
  }

  // Phase 2: aggregation at C.
  GlobalUpdate g;
  try {
    PreprocessResult pre = preprocess_updates(std::move(admitted), payload_len);
    for (const auto& d : pre.dropped) {
      report.rejected.push_back({party_name(d.node), "preprocess", d.reason});
    }
    const Vector sum = smpc_sum(pre.kept, report.participants);
    std::size_t total = 0;
    for (const auto& m : pre.kept) total += m.n_samples;
    const GlobalUpdate raw = fedavg_from_sum(sum, total, global_);
    g = privacy_adjust_global(raw, global_, cfg_.epsilon_global,
                              cfg_.privacy.delta, cfg_.clip_global,
                              derive_seed(cfg_.seed, {kTagGlobalNoise, r}));
    g.round = r;
  } catch (const RoundAbort& e) {
    return abort_round(e.what());
  }

  BlockMeta gmeta;
  gmeta.kind = BlockKind::kGlobalModel;
  gmeta.origin = kAggregatorParty;
  gmeta.round = r;
  gmeta.model_version = g.params.version;
  gmeta.freshness = fresh_tag(kAggregatorParty, 2);
  gmeta.n_samples = g.total_samples;
  if (!log_record(gmeta, encode_model(g.params), 2, report)) {
    return abort_round("global model rejected by the ledger");
  }
  global_ = g.params;

  // Phase 3: C -> P distribution.
  std::vector<WireRecord> dist;
  for (const auto& p : fleet_.partitions) {
    const std::string party = party_name(p.node_id);
    dist.push_back(send(kAggregatorParty, party, "distribute",
                        fresh_tag(kAggregatorParty, 3), encode_model(global_)));
  }
  std::map<NodeId, ModelParams> received;
  for (const WireRecord& rec : dist) {
    if (auto opened = deliver(rec, 3, report)) {
      received.emplace(*parse_party(rec.envelope.receiver), decode_model(*opened));
    }
  }

  run_feedback(received, g, report);
  return finish(report);
}

void Simulation::run_feedback(const std::map<NodeId, ModelParams>& received,
                              const GlobalUpdate& g, RoundReport& report) {
  const std::uint64_t r = round_;
  std::vector<std::size_t> counts;
  for (const auto& p : fleet_.partitions) {
    if (std::find(g.contributing_nodes.begin(), g.contributing_nodes.end(),
                  p.node_id) != g.contributing_nodes.end()) {
      counts.push_back(splits_.at(p.node_id).train.size());
    }
  }
  const GlobalStats gstats{g.total_samples,
                           counts.empty() ? 0.0 : sample_diversity(counts)};

  std::vector<double> agreement, consistency, int_acc, int_fpr;
  std::vector<WireRecord> uploads;
  for (auto& stats : report.nodes) {
    auto it = received.find(stats.node);
    if (it == received.end()) continue;
    const NodeId id = stats.node;
    const ModelParams& y = it->second;
    const LocalSplit& split = splits_.at(id);

    ExplainConfig ecfg = cfg_.explain;
    ecfg.seed = derive_seed(cfg_.seed, {kTagExplain, r, id.value});
    const ValidationReport vr =
        validate_predictions(y, validator_models_.at(id), split.train, ecfg);
    std::vector<Sample> flagged;
    for (std::size_t idx : vr.flagged) flagged.push_back(split.train[idx]);

    CorrectionConfig ccfg = cfg_.correction;
    ccfg.seed = derive_seed(cfg_.seed, {kTagCorrection, r, id.value});
    const FeedbackUpdate fb =
        local_correction(y, flagged, split.holdout, ccfg, vr.mean_stability);
    const IntegrationWeights w = compute_weights(fb.quality, gstats, cfg_.weights);

    stats.agreement_rate = vr.agreement_rate;
    stats.explanation_consistency = vr.explanation_consistency;
    stats.flagged = vr.flagged.size();
    stats.accuracy_gain = fb.quality.accuracy_gain;
    stats.w_local = w.w_local;
    stats.w_global = w.w_global;
    agreement.push_back(vr.agreement_rate);
    consistency.push_back(vr.explanation_consistency);

    const std::size_t n_expl = std::min(cfg_.explanations_per_node,
                                        vr.explanations.size());
    for (std::size_t k = 0; k < n_expl; ++k) {
      const Explanation& ex = vr.explanations[k];
      explanations_.push_back({{"round", r},
                               {"node", party_name(id)},
                               {"model_version", y.version},
                               {"sample_id", ex.sample_id},
                               {"method", std::string(to_string(ex.method))},
                               {"attributions", ex.attributions},
                               {"stability", ex.stability},
                               {"top_feature", top_feature(ex)}});
    }

    // x: the corrected local model, rebased on y so both sides of the
    // combination are full parameter vectors.
    const Vector yflat = flatten(y);
    Vector xflat = yflat;
    kernels::add(fb.delta, xflat);
    const std::string party = party_name(id);
    if (cfg_.integration_site == IntegrationSite::kNode) {
      const FeedbackUpdate x{xflat, fb.quality};
      const ModelParams integrated =
          unflatten(integrate(x, yflat, w), y.version);
      const Evaluation ev = evaluate(integrated, test_set_);
      stats.integrated_accuracy = ev.accuracy;
      stats.integrated_fpr = ev.false_positive_rate;
      int_acc.push_back(ev.accuracy);
      int_fpr.push_back(ev.false_positive_rate);
      uploads.push_back(send(party, kAggregatorParty, "feedback",
                             fresh_tag(party, 4),
                             encode_feedback({integrated, fb.quality,
                                              split.train.size()})));
    } else {
      uploads.push_back(send(party, kAggregatorParty, "feedback",
                             fresh_tag(party, 4),
                             encode_feedback({unflatten(xflat, y.version),
                                              fb.quality, split.train.size()})));
    }
  }

  // Phase 4-5: C receives feedback and logs it through B.
  Vector x_sum;
  std::size_t x_total = 0;
  FeedbackQuality q_sum;
  std::size_t n_feedback = 0;
  for (const WireRecord& rec : uploads) {
    auto opened = deliver(rec, 4, report);
    if (!opened) continue;
    const FeedbackMessage msg = decode_feedback(*opened);
    if (cfg_.integration_site == IntegrationSite::kNode) {
      BlockMeta meta;
      meta.kind = BlockKind::kFeedback;
      meta.origin = rec.envelope.sender;
      meta.round = r;
      meta.model_version = msg.model.version;
      meta.freshness = rec.envelope.freshness;
      meta.n_samples = msg.n_samples;
      log_record(meta, encode_model(msg.model), 5, report);
    } else {
      Vector xw = flatten(msg.model);
      kernels::scale(static_cast<double>(msg.n_samples), xw);
      if (x_sum.empty()) x_sum.assign(xw.size(), 0.0);
      kernels::add(xw, x_sum);
      x_total += msg.n_samples;
      q_sum.accuracy_gain += msg.quality.accuracy_gain;
      q_sum.explanation_stability += msg.quality.explanation_stability;
      ++n_feedback;
    }
  }

  if (cfg_.integration_site == IntegrationSite::kCloud && n_feedback > 0 &&
      x_total > 0) {
    kernels::scale(1.0 / static_cast<double>(x_total), x_sum);
    const double nf = static_cast<double>(n_feedback);
    const FeedbackQuality q{q_sum.accuracy_gain / nf,
                            q_sum.explanation_stability / nf};
    const IntegrationWeights w = compute_weights(q, gstats, cfg_.weights);
    const FeedbackUpdate x{x_sum, q};
    const ModelParams integrated =
        unflatten(integrate(x, flatten(global_), w), global_.version);
    BlockMeta meta;
    meta.kind = BlockKind::kFeedback;
    meta.origin = kAggregatorParty;
    meta.round = r;
    meta.model_version = integrated.version;
    meta.freshness = fresh_tag(kAggregatorParty, 5);
    meta.n_samples = x_total;
    if (log_record(meta, encode_model(integrated), 5, report)) {
      global_ = integrated;
      const Evaluation ev = evaluate(integrated, test_set_);
      for (auto& stats : report.nodes) {
        if (!received.contains(stats.node)) continue;
        stats.w_local = w.w_local;
        stats.w_global = w.w_global;
        stats.integrated_accuracy = ev.accuracy;
        stats.integrated_fpr = ev.false_positive_rate;
        int_acc.push_back(ev.accuracy);
        int_fpr.push_back(ev.false_positive_rate);
      }
    }
  }

  report.agreement_rate_mean = mean_of(agreement);
  report.explanation_consistency_mean = mean_of(consistency);
  report.integrated_accuracy_mean = mean_of(int_acc);
  report.integrated_fpr_mean = mean_of(int_fpr);
}

nlohmann::json report_to_json(const RoundReport& r) {
  nlohmann::json j;
  j["round"] = r.round;
  j["aborted"] = r.aborted;
  if (r.aborted) j["abort_reason"] = r.abort_reason;
  j["model_version"] = r.model_version;
  j["global_accuracy"] = r.global_accuracy;
  j["global_loss"] = r.global_loss;
  j["global_fpr"] = r.global_fpr;
  auto& parts = j["participants"] = nlohmann::json::array();
  for (NodeId id : r.participants) parts.push_back(party_name(id));
  auto& charged = j["epsilon_charged"] = nlohmann::json::object();
  for (const auto& [id, e] : r.epsilon_charged) charged[party_name(id)] = e;
  auto& spent = j["epsilon_spent"] = nlohmann::json::object();
  for (const auto& [id, e] : r.epsilon_spent) spent[party_name(id)] = e;
  j["blocks_appended"] = r.blocks_appended;
  auto& rej = j["rejected"] = nlohmann::json::array();
  for (const auto& x : r.rejected) {
    rej.push_back({{"party", x.party}, {"stage", x.stage}, {"reason", x.reason}});
  }
  j["agreement_rate"] = r.agreement_rate_mean;
  j["explanation_consistency"] = r.explanation_consistency_mean;
  j["integrated_accuracy"] = r.integrated_accuracy_mean;
  j["integrated_fpr"] = r.integrated_fpr_mean;
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for (const auto& n : r.nodes) {
    nodes.push_back({{"node", party_name(n.node)},
                     {"participated", n.participated},
                     {"epsilon", number_or_inf(n.epsilon)},
                     {"w_local", n.w_local},
                     {"w_global", n.w_global},
                     {"agreement_rate", n.agreement_rate},
                     {"explanation_consistency", n.explanation_consistency},
                     {"flagged", n.flagged},
                     {"accuracy_gain", n.accuracy_gain},
                     {"integrated_accuracy", n.integrated_accuracy},
                     {"integrated_fpr", n.integrated_fpr}});
  }
  if (r.attacks) {
    j["attacks"] = {{"injected", r.attacks->injected},
                    {"detected", r.attacks->detected}};
  }
  return j;
}

RunResult run(const RunConfig& cfg) {
  Simulation sim(cfg);
  RunResult out;
  for (std::size_t i = 0; i < cfg.rounds; ++i) out.reports.push_back(sim.run_round());
  out.chain = sim.chain();
  out.final_model = sim.global_model();
  for (const auto& p : sim.fleet().partitions) {
    out.epsilon_spent[p.node_id] = sim.budget().spent(p.node_id);
  }
  out.explanations = sim.explanation_records();
  return out;
}

std::filesystem::path resolve_output_dir(const RunConfig& cfg) {
  if (const char* env = std::getenv("FEDLEDGER_OUTPUT_DIR"); env && *env) {
    return env;
  }
  return cfg.output_dir;
}

void write_artifacts(const RunResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw Error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("metrics.jsonl");
    for (const auto& r : result.reports) f << report_to_json(r).dump() << '\n';
  }
  {
    auto f = open("summary.csv");
    f << "round,aborted,model_version,global_accuracy,global_loss,global_fpr,"
         "participants,blocks_appended,rejections,agreement_rate,"
         "explanation_consistency,integrated_accuracy,integrated_fpr,"
         "max_epsilon_spent\n";
    for (const auto& r : result.reports) {
      double max_spent = 0.0;
      for (const auto& [id, e] : r.epsilon_spent) max_spent = std::max(max_spent, e);
      f << r.round << ',' << (r.aborted ? 1 : 0) << ',' << r.model_version << ','
        << r.global_accuracy << ',' << r.global_loss << ',' << r.global_fpr << ','
        << r.participants.size() << ',' << r.blocks_appended << ','
        << r.rejected.size() << ',' << r.agreement_rate_mean << ','
        << r.explanation_consistency_mean << ',' << r.integrated_accuracy_mean
        << ',' << r.integrated_fpr_mean << ',' << max_spent << '\n';
    }
  }
  {
    auto f = open("chain.json");
    f << chain_to_json(result.chain).dump(2) << '\n';
  }
  {
    auto f = open("explanations.jsonl");
    for (const auto& e : result.explanations) f << e.dump() << '\n';
  }
}

}  // namespace fedledger
