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

// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fedledger/adversary.h"
#include "fedledger/aggregation.h"
#include "fedledger/kernels.h"
#include "fedledger/masking.h"
#include "fedledger/orchestrator.h"
#include "fedledger/privacy.h"
#include "fedledger/xai.h"

namespace fedledger {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Vector random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Vector v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

Outcome mask_cancellation() {
  Rng rng = make_rng(1001);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::uint64_t seed = rng();
    const std::size_t n = 1 + rng() % 32;
    const std::size_t dim = 1 + rng() % 64;
    std::vector<NodeId> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back({static_cast<std::uint32_t>(i + 1)});
    const auto masks = derive_masks(seed, t, ids, dim, 10.0);
    std::vector<MaskedUpdate> masked;
    Vector raw_sum(dim, 0.0);
    for (NodeId id : ids) {
      const Vector g = random_vector(rng, dim);
      kernels::add(g, raw_sum);
      masked.push_back(apply_mask({g, 1, {}}, masks.at(id), {}));
    }
    const Vector s = smpc_sum(masked, ids);
    for (std::size_t j = 0; j < dim; ++j) worst = std::max(worst, std::abs(s[j] - raw_sum[j]));
  }
  return {worst <= 1e-9, fmt("100 triples, max |masked sum - raw sum| = %.3g (bound 1e-9)", worst)};
}

Outcome fedavg_oracle() {
  const FleetDataset fleet = generate_fleet(11, 5, 150, 8, 0.5);
  Rng init = make_rng(3);
  const ModelParams base{random_vector(init, 8, 0.3), 0.1, 0};
  const double lr = 0.5;
  std::vector<NodeId> ids;
  std::vector<MaskedUpdate> masked;
  std::vector<Sample> pooled;
  std::size_t total = 0;
  std::map<NodeId, Vector> weighted;
  for (const auto& p : fleet.partitions) {
    ids.push_back(p.node_id);
    pooled.insert(pooled.end(), p.samples.begin(), p.samples.end());
    const GradientUpdate u = train_local(base, p, {lr, 1, p.samples.size(), 1});
    Vector w = u.grad;
    kernels::scale(static_cast<double>(u.n_samples), w);
    weighted[p.node_id] = w;
    total += u.n_samples;
  }
  const auto masks = derive_masks(77, 1, ids, 9, 5.0);
  for (NodeId id : ids) masked.push_back(apply_mask({weighted[id], 1, {}}, masks.at(id), {}));
  const GlobalUpdate fed = fedavg_from_sum(smpc_sum(masked, ids), total, base);
  const GradientUpdate central = train_local(base, pooled, {lr, 1, pooled.size(), 1});
  ModelParams c = base;
  apply_delta(c, central.grad);
  double worst = std::abs(fed.params.bias - c.bias);
  for (std::size_t j = 0; j < 8; ++j) {
    worst = std::max(worst, std::abs(fed.params.weights[j] - c.weights[j]));
  }
  return {worst <= 1e-6,
          fmt("5 nodes, masked secure sum vs pooled full-batch step: max diff %.3g (bound 1e-6)",
              worst)};
}

Outcome gradient_check() {
  Rng rng = make_rng(303);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 1 + rng() % 16;
    const ModelParams p{random_vector(rng, d), random_vector(rng, 1)[0], 0};
    std::vector<Sample> batch;
    for (std::size_t i = 0; i < 1 + rng() % 5; ++i) {
      batch.push_back({random_vector(rng, d), static_cast<int>(rng() % 2)});
    }
    const Vector analytic = log_loss_gradient(p, batch);
    Vector numeric(d + 1);
    const double h = 1e-5;
    for (std::size_t j = 0; j <= d; ++j) {
      ModelParams a = p, b = p;
      (j < d ? a.weights[j] : a.bias) += h;
      (j < d ? b.weights[j] : b.bias) -= h;
      numeric[j] = (mean_log_loss(a, batch) - mean_log_loss(b, batch)) / (2 * h);
    }
    Vector diff = analytic;
    kernels::sub(numeric, diff);
    worst = std::max(worst, kernels::norm2(diff) / std::max(kernels::norm2(numeric), 1e-8));
  }
  return {worst < 1e-5, fmt("100 cases, max relative error %.3g (bound 1e-5)", worst)};
}

Outcome dp_calibration() {
  const double sigma = gaussian_sigma(1.0, 1e-5, 1.0);
  const double closed_form = std::sqrt(2.0 * std::log(1.25 / 1e-5));
  PrivacyContext ctx;
  ctx.epsilon = 1.0;
  ctx.delta = 1e-5;
  ctx.clip_norm = 1.0;
  const std::size_t n = 100000;
  const GradientUpdate noisy = add_dp_noise({Vector(n - 1, 0.0), 1, {}}, ctx, 4242);
  double sum = 0, sq = 0;
  for (double x : noisy.grad) {
    sum += x;
    sq += x * x;
  }
  const double m = static_cast<double>(noisy.grad.size());
  const double sd = std::sqrt(sq / m - (sum / m) * (sum / m));
  const double rel = std::abs(sd - closed_form) / closed_form;

  PrivacyContext inf;
  Rng rng = make_rng(9);
  const GradientUpdate u{random_vector(rng, 64), 1, {}};
  const bool passthrough = add_dp_noise(u, inf, 1).grad == u.grad;
  return {std::abs(sigma - closed_form) < 1e-12 && rel <= 0.02 && passthrough,
          fmt("sigma %.6f, empirical std %.6f (%.2f%% off, bound 2%%), eps=inf bit-identical: %s",
              sigma, sd, 100 * rel, passthrough ? "yes" : "no")};
}

Outcome tamper_evidence() {
  RunConfig cfg;
  Simulation sim(cfg);
  while (sim.chain().size() < 50) sim.run_round();
  const Chain chain(sim.chain().begin(), sim.chain().begin() + 50);
  if (verify_chain(chain)) return {false, "baseline chain does not verify"};
  Rng rng = make_rng(55);
  std::size_t tried = 0, caught = 0;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    for (BlockField f : kAllBlockFields) {
      const std::size_t bits = field_bits(chain[i], f);
      if (bits == 0) continue;
      std::vector<std::size_t> pick(bits);
      for (std::size_t b = 0; b < bits; ++b) pick[b] = b;
      std::shuffle(pick.begin(), pick.end(), rng);
      pick.resize(std::min<std::size_t>(10, bits));
      for (std::size_t b : pick) {
        Chain bad = chain;
        mutate_block_field(bad[i], f, b);
        ++tried;
        caught += verify_chain(bad) == std::optional<std::size_t>(i);
      }
    }
  }
  return {tried > 0 && caught == tried,
          fmt("50 blocks, %zu single-bit mutations, %zu located at the mutated index", tried,
              caught)};
}

Outcome attack_suite() {
  RunConfig cfg;
  const std::vector<std::uint64_t> seeds = {cfg.seed};
  const AttackSuiteResult r = run_attack_suite(cfg, seeds);
  std::ostringstream s;
  bool ok = r.all_passed();
  for (const AttackReport& a : r.reports) {
    s << to_string(a.kind) << ' ' << a.detected << '/' << a.injected;
    if (a.adversarial_appended != 0) s << " (appended " << a.adversarial_appended << ')';
    s << "; ";
    ok = ok && a.injected == cfg.attacks.injections && a.adversarial_appended == 0;
  }
  return {ok, s.str() + "zero adversarial blocks appended"};
}

Outcome learning_sanity() {
  RunConfig cfg;
  cfg.rounds = 50;
  cfg.privacy.epsilon_max = kInfinity;
  const RunResult r = run(cfg);
  const double acc = r.reports.back().global_accuracy;
  return {acc >= 0.90, fmt("4x200, dim 8, 50 rounds, eps=inf: held-out accuracy %.4f (bar 0.90)", acc)};
}

Outcome monotonicity() {
  const std::vector<double> levels = {8.0, 2.0, 1.0, 0.5};
  std::vector<double> means;
  for (double e : levels) {
    double sum = 0.0;
    for (std::uint64_t s = 1; s <= 5; ++s) {
      RunConfig cfg;
      cfg.seed = s;
      cfg.fleet.seed = s;
      cfg.rounds = 50;
      cfg.privacy.epsilon_max = e;
      cfg.privacy.epsilon_min = e / 16.0;
      cfg.budget_cap = static_cast<double>(cfg.rounds) * e;
      cfg.rules.epsilon_cap = cfg.budget_cap;
      sum += run(cfg).reports.back().global_accuracy;
    }
    means.push_back(sum / 5.0);
  }
  int inversions = 0;
  bool within = true;
  for (std::size_t i = 1; i < means.size(); ++i) {
    if (means[i] > means[i - 1]) {
      ++inversions;
      within = within && means[i] - means[i - 1] <= 0.01;
    }
  }
  return {inversions == 0 || (inversions == 1 && within),
          fmt("eps_max 8/2/1/0.5 (eps_min = eps_max/16), mean acc over 5 seeds "
              "%.4f/%.4f/%.4f/%.4f, %d inversion(s)",
              means[0], means[1], means[2], means[3], inversions)};
}

Outcome weighted_integration() {
  // Hand-computed: 0.5*[2,6] + 0.5*[4,8] = [3,7]; 0.25*[4,0,-8] + 0.75*[0,4,8] = [1,3,4].
  const bool eq1 = integrate({{2, 6}, {}}, Vector{4, 8}, {0.5, 0.5}) == Vector{3, 7};
  const bool eq2 = integrate({{4, 0, -8}, {}}, Vector{0, 4, 8}, {0.25, 0.75}) == Vector{1, 3, 4};
  bool convex = true;
  double worst_gap = -1.0;
  std::size_t checked = 0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    RunConfig cfg;
    cfg.seed = s;
    cfg.fleet.seed = s;
    const RunResult r = run(cfg);
    for (const RoundReport& rep : r.reports) {
      for (const NodeRoundStats& n : rep.nodes) {
        if (!n.participated) continue;
        convex = convex && std::abs(n.w_local + n.w_global - 1.0) <= 1e-12;
        ++checked;
      }
    }
    const RoundReport& last = r.reports.back();
    worst_gap = std::max(worst_gap, last.integrated_fpr_mean - last.global_fpr);
  }
  return {eq1 && eq2 && convex && checked > 0 && worst_gap <= 0.01,
          fmt("hand vectors exact: %s; w_L + w_G = 1 in %zu node reports: %s; "
              "max(integrated FPR - global FPR) over 5 seeds %+.4f (bound +0.01)",
              eq1 && eq2 ? "yes" : "no", checked, convex ? "yes" : "no", worst_gap)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  const auto root = std::filesystem::temp_directory_path() / "fedledger_acceptance_det";
  std::filesystem::remove_all(root);
  RunConfig cfg;
  write_artifacts(run(cfg), root / "a");
  write_artifacts(run(cfg), root / "b");
  bool same = true;
  for (const char* f : {"metrics.jsonl", "summary.csv", "chain.json", "explanations.jsonl"}) {
    const std::string a = slurp(root / "a" / f);
    same = same && !a.empty() && a == slurp(root / "b" / f);
  }
  std::filesystem::remove_all(root);
  return {same, "two runs of the default config: metrics, summary, chain and explanations byte-identical"};
}

Outcome pos_statistics() {
  ValidatorSet v;
  v.stakes = {{"a", 1.0}, {"b", 1.0}, {"c", 2.0}};
  std::map<std::string, int> hits;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    hits[select_committee(v, derive_seed(2024, {static_cast<std::uint64_t>(i)}), 1)[0]]++;
  }
  const double fa = hits["a"] / double(n), fb = hits["b"] / double(n), fc = hits["c"] / double(n);
  const bool ok =
      std::abs(fa - 0.25) <= 0.01 && std::abs(fb - 0.25) <= 0.01 && std::abs(fc - 0.5) <= 0.01;
  return {ok, fmt("stakes (1,1,2), 1e5 draws: %.4f/%.4f/%.4f (target 0.25/0.25/0.50 +-0.01)", fa,
                  fb, fc)};
}

Outcome xai_sanity() {
  Rng rng = make_rng(12);
  std::vector<Vector> bg;
  std::vector<Sample> samples;
  for (int i = 0; i < 100; ++i) {
    bg.push_back(random_vector(rng, 4));
    samples.push_back({bg.back(), i % 2});
  }
  const ModelParams m{{1.5, 0.0, -2.0, 0.7}, 0.2, 0};
  double worst = 0.0;
  for (const auto& s : samples) {
    worst = std::max(worst, explain(m, s.features, bg, 8, 1).attributions[1]);
  }
  const ValidationReport r = validate_predictions(m, m, samples, {});
  const bool ok = worst < 0.01 && r.agreement_rate == 1.0 && r.flagged.empty();
  return {ok, fmt("zero-weight attribution max %.3g (bound 0.01); identical models: agreement "
                  "%.2f, %zu flagged",
                  worst, r.agreement_rate, r.flagged.size())};
}

}  // namespace
}  // namespace fedledger

int main() {
  using namespace fedledger;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"mask cancellation", mask_cancellation},
      {"fedavg oracle equivalence", fedavg_oracle},
      {"gradient correctness", gradient_check},
      {"dp noise calibration", dp_calibration},
      {"tamper evidence", tamper_evidence},
      {"replay/mitm/spoof suite", attack_suite},
      {"learning sanity", learning_sanity},
      {"privacy-utility monotonicity", monotonicity},
      {"weighted integration", weighted_integration},
      {"determinism", determinism},
      {"pos committee statistics", pos_statistics},
      {"xai sanity", xai_sanity},
  };
  std::printf("simd=%s\n", std::string(kernels::isa_name(kernels::active_isa())).c_str());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
