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

#include "fedledger/cli.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fedledger/adversary.h"
#include "fedledger/config.h"
#include "fedledger/kernels.h"
#include "fedledger/ledger.h"
#include "fedledger/orchestrator.h"

namespace fedledger {
namespace {

// Usage errors carry their one-line diagnostic.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RunConfig read_config(const std::string& path) {
  try {
    return load_config(path);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

int cmd_run(const std::string& config_path, std::ostream& out) {
  const RunConfig cfg = read_config(config_path);
  const RunResult result = run(cfg);
  const auto dir = resolve_output_dir(cfg);
  write_artifacts(result, dir);
  const auto bad = verify_chain(result.chain);
  out << "rounds=" << result.reports.size() << " blocks=" << result.chain.size()
      << " simd=" << kernels::isa_name(kernels::active_isa());
  if (!result.reports.empty()) {
    out << " final_accuracy=" << result.reports.back().global_accuracy;
  }
  out << " output=" << dir.string() << '\n';
  if (bad) {
    out << "FirstBadIndex: " << *bad << '\n';
    return kExitValidationFailure;
  }
  return kExitOk;
}

int cmd_attack(const std::string& config_path, std::vector<std::uint64_t> seeds,
               std::ostream& out) {
  const RunConfig cfg = read_config(config_path);
  if (seeds.empty()) seeds = cfg.attacks.seeds;
  const AttackSuiteResult suite = run_attack_suite(cfg, seeds);
  const nlohmann::json j = suite_to_json(suite);
  const auto dir = resolve_output_dir(cfg);
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "attack_report.json") << j.dump(2) << '\n';
  for (const auto& r : suite.reports) {
    out << (r.passed() ? "PASS " : "FAIL ") << to_string(r.kind) << ' '
        << r.detected << '/' << r.injected << '\n';
  }
  for (const auto& p : suite.probes) {
    out << (p.accepted == p.expected_accepted ? "PASS " : "FAIL ")
        << "poison_boundary factor=" << p.factor << ' ' << p.notes << '\n';
  }
  return suite.all_passed() ? kExitOk : kExitValidationFailure;
}

int cmd_verify(const std::string& chain_path, std::ostream& out) {
  std::ifstream in(chain_path);
  if (!in) throw UsageError("cannot open chain: " + chain_path);
  Chain chain;
  try {
    chain = chain_from_json(nlohmann::json::parse(in));
  } catch (const std::exception& e) {
    throw UsageError("malformed chain file: " + std::string(e.what()));
  }
  if (const auto bad = verify_chain(chain)) {
    out << "FirstBadIndex: " << *bad << '\n';
    return kExitValidationFailure;
  }
  out << "OK " << chain.size() << " blocks\n";
  return kExitOk;
}

int cmd_explain(const std::string& run_dir, const std::string& node,
                std::ostream& out) {
  std::string party = node;
  if (!parse_party(party)) party = "P" + node;
  if (!parse_party(party)) throw UsageError("bad node id: " + node);
  const auto path = std::filesystem::path(run_dir) / "explanations.jsonl";
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  std::size_t found = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("malformed explanations file: " + std::string(e.what()));
    }
    if (j.value("node", "") == party) {
      out << j.dump() << '\n';
      ++found;
    }
  }
  if (found == 0) {
    out << "no explanations for " << party << '\n';
    return kExitValidationFailure;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Federated learning with privacy tuning, masking and a validated ledger"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "run the simulation and write artifacts");
  run_cmd->add_option("--config", config_path, "run configuration (JSON)")->required();

  std::string attack_config;
  std::vector<std::uint64_t> seeds;
  auto* attack_cmd = app.add_subcommand("attack", "run the adversary suite");
  attack_cmd->add_option("--config", attack_config, "run configuration (JSON)")
      ->required();
  attack_cmd->add_option("--seeds", seeds, "seeds (default: attacks.seeds)")
      ->delimiter(',');

  std::string chain_path;
  auto* ledger_cmd = app.add_subcommand("ledger", "ledger tools");
  ledger_cmd->require_subcommand(1);
  auto* verify_cmd = ledger_cmd->add_subcommand("verify", "verify an exported chain");
  verify_cmd->add_option("--chain", chain_path, "chain.json")->required();

  std::string run_dir, node;
  auto* explain_cmd = app.add_subcommand("explain", "print a node's explanations");
  explain_cmd->add_option("--run", run_dir, "run output directory")->required();
  explain_cmd->add_option("--node", node, "node id, e.g. P1 or 1")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(config_path, out);
    if (*attack_cmd) return cmd_attack(attack_config, seeds, out);
    if (*verify_cmd) return cmd_verify(chain_path, out);
    if (*explain_cmd) return cmd_explain(run_dir, node, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidationFailure;
  }
  err << "usage error: no subcommand\n";
  return kExitUsage;
}

}  // namespace fedledger
