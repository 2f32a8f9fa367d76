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

#include "cli.h"

#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "absl/strings/str_format.h"
#include "commands.h"
#include "config.h"

namespace cldp::tools {
namespace {

struct SubcommandFlags {
  std::string config_file;
  std::vector<std::string> overrides;
  std::optional<double> seed;
  std::string out_dir;
};

// Numbers print in %g form so integral defaults read as integers.
std::string FormatDefault(const Json& value) {
  if (value.is_number()) return absl::StrFormat("%g", value.get<double>());
  if (value.is_array()) {
    std::string joined;
    for (const Json& item : value) {
      if (!joined.empty()) joined += ",";
      joined += FormatDefault(item);
    }
    return joined;
  }
  if (value.is_null()) return "unset";
  return value.dump();
}

std::string Describe(const std::string& command) {
  std::ostringstream os;
  os << "config keys:";
  for (const auto& [key, spec] : *SchemaFor(command)) {
    os << "\n  " << key << ": " << spec.help << " (default "
       << FormatDefault(spec.default_value) << ")";
  }
  return os.str();
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Communication-limited local differential privacy toolkit"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"mean-est", "Empirical MSE of private mean estimation over a grid"},
      {"accountant", "Central (epsilon, delta) with full provenance"},
      {"bounds", "Closed-form risk, second-moment and convergence bounds"},
      {"train", "Private federated SGD on a convex task"},
      {"selftest", "Quick internal consistency checks"},
  };
  std::map<std::string, SubcommandFlags> flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    SubcommandFlags& f = flags[name];
    CLI::App* sub = app.add_subcommand(name, help);
    sub->footer(Describe(name));
    sub->add_option("-c,--config", f.config_file, "JSON config file");
    sub->add_option("-s,--set", f.overrides, "key=value override (repeatable)");
    sub->add_option("--seed", f.seed, "seed override")->type_name("INT");
    sub->add_option("-o,--out", f.out_dir,
                    "output directory (default $CLDP_OUTPUT_DIR or .)");
    subs[name] = sub;
  }

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  if (!argv_rev.empty()) argv_rev.pop_back();
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << e.what() << "\n";
      return kExitOk;
    }
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  }

  for (const auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    SubcommandFlags& f = flags[name];
    std::optional<std::string> file;
    if (!f.config_file.empty()) file = f.config_file;
    auto config = Config::Build(name, file, f.overrides);
    CommandContext ctx{&out, &err, "."};
    if (!config.ok()) return ReportError(config.status(), ctx);
    if (f.seed) config->SetNumber("seed", *f.seed);
    if (!f.out_dir.empty()) {
      ctx.output_dir = f.out_dir;
    } else if (const char* env = std::getenv("CLDP_OUTPUT_DIR");
               env != nullptr && *env != '\0') {
      ctx.output_dir = env;
    }
    if (name == "mean-est") return RunMeanEst(*config, ctx);
    if (name == "accountant") return RunAccountant(*config, ctx);
    if (name == "bounds") return RunBounds(*config, ctx);
    if (name == "train") return RunTrain(*config, ctx);
    return RunSelftest(*config, ctx);
  }
  err << "no subcommand given\n";
  return kExitValidation;
}

}  // namespace cldp::tools
