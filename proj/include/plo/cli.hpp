/*
 * Copyright 2026 The PLO Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PLO_CLI_HPP
#define PLO_CLI_HPP

#include <ostream>

namespace plo {

/// Exit codes of the command line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,       // run failed or a verification check failed
  kExitInvalidConfig = 2, // bad arguments, missing or invalid config
  kExitCheckpoint = 3,    // corrupt checkpoint or architecture mismatch
};

/**
 * Entry point of the `plo` tool:
 *
 *   plo train   [--config PATH] [--seed N]... [--out DIR]
 *   plo eval    --checkpoint PATH [--config PATH] [--out DIR]
 *   plo verify  [--seed N] [--instances N]
 *   plo compare [--config PATH] [--seed N]... [--out DIR] [--synthetic]
 *
 * Progress goes to `out`, diagnostics to `err`.
 */
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace plo

#endif // PLO_CLI_HPP
