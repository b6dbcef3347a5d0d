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

#ifndef FEDLEDGER_CLI_H_
#define FEDLEDGER_CLI_H_

#include <iosfwd>

namespace fedledger {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailure = 1;
inline constexpr int kExitUsage = 2;

// Subcommands:
//   run --config <path>
//   attack --config <path> [--seeds a,b,...]
//   ledger verify --chain <path>
//   explain --run <dir> --node <id>
// Returns 0 on success, 1 on a validation failure (tampered chain, failed
// attack check, no explanations for the node), 2 on bad usage (unknown
// flags, unreadable or invalid config).
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace fedledger

#endif  // FEDLEDGER_CLI_H_
