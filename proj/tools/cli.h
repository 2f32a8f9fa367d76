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

// Entry point of the cldp command-line tool, callable from tests.

#ifndef CLDP_TOOLS_CLI_H_
#define CLDP_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace cldp::tools {

// Parses argv (argv[0] is the program name), runs the subcommand and returns
// the exit code. The default output directory comes from CLDP_OUTPUT_DIR.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace cldp::tools

#endif  // CLDP_TOOLS_CLI_H_
