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

// Experiment configuration for the command-line tool: typed defaults per
// subcommand, a JSON config file, "key=value" overrides, a canonical hash,
// and CSV output helpers.

#ifndef CLDP_TOOLS_CONFIG_H_
#define CLDP_TOOLS_CONFIG_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"

namespace cldp::tools {

using Json = nlohmann::json;

enum class ValueKind {
  kNumber,          // one number; "inf" allowed
  kNumberList,      // scalar or array of numbers
  kNullableNumber,  // number or null
  kString,
  kBool,
};

struct KeySpec {
  ValueKind kind;
  Json default_value;
  std::string help;
};

using Schema = std::map<std::string, KeySpec>;

// Per-subcommand schemas. Unknown subcommands return nullptr.
const Schema* SchemaFor(const std::string& command);

class Config {
 public:
  // Layers defaults, then the file (if any), then overrides in order. Every
  // unknown key is reported in one error.
  static absl::StatusOr<Config> Build(
      const std::string& command, const std::optional<std::string>& file,
      const std::vector<std::string>& overrides);

  double Number(const std::string& key) const;
  std::int64_t Int(const std::string& key) const;
  std::vector<double> Numbers(const std::string& key) const;
  std::optional<double> MaybeNumber(const std::string& key) const;
  std::string String(const std::string& key) const;
  bool Bool(const std::string& key) const;

  void SetNumber(const std::string& key, double value);
  void SetString(const std::string& key, const std::string& value);

  // Sorted-key compact JSON of every value.
  std::string Canonical() const;
  // FNV-1a 64 of Canonical(), 16 hex digits.
  std::string Hash() const;
  const std::string& command() const { return command_; }

 private:
  std::string command_;
  Json values_;
};

// Integral-valued check with a message naming the key.
absl::Status RequireInteger(const Config& config, const std::string& key,
                            std::int64_t min_value);

std::string FormatDouble(double v);

// Quotes a CSV cell when it contains a comma, quote or newline.
std::string CsvCell(const std::string& text);

// Writes a fresh CSV: a comment line with command and config hash, a header
// row, then the rows. Truncates any existing file.
absl::Status WriteCsv(const std::string& path, const Config& config,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows);

}  // namespace cldp::tools

#endif  // CLDP_TOOLS_CONFIG_H_
