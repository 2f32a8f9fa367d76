//
// Copyright 2026 The CLDP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Subcommand implementations. Each returns a process exit code.

#ifndef CLDP_TOOLS_COMMANDS_H_
#define CLDP_TOOLS_COMMANDS_H_

#include <ostream>
#include <string>

#include "absl/status/status.h"
#include "config.h"

namespace cldp::tools {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitInfeasible = 3;

struct CommandContext {
  std::ostream* out;
  std::ostream* err;
  std::string output_dir;
};

int RunMeanEst(const Config& config, const CommandContext& ctx);
int RunAccountant(const Config& config, const CommandContext& ctx);
int RunBounds(const Config& config, const CommandContext& ctx);
int RunTrain(const Config& config, const CommandContext& ctx);
int RunSelftest(const Config& config, const CommandContext& ctx);

// Prints the status and maps its code to an exit code: invalid argument to
// validation, failed precondition and out of range to infeasible.
int ReportError(const absl::Status& status, const CommandContext& ctx);

}  // namespace cldp::tools

#endif  // CLDP_TOOLS_COMMANDS_H_
