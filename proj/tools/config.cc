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

#include "config.h"

#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "cldp/status_macros.h"

namespace cldp::tools {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Json List(const std::vector<Json>& items) { return Json(items); }

const std::map<std::string, Schema>& AllSchemas() {
  static const auto* schemas = new std::map<std::string, Schema>{
      {"mean-est",
       {
           {"n", {ValueKind::kNumberList, List({1000.0}), "clients"}},
           {"d", {ValueKind::kNumberList, List({32.0}), "dimension"}},
           {"epsilon0", {ValueKind::kNumberList, List({1.0}), "local epsilon"}},
           {"p", {ValueKind::kNumberList, List({1.0}), "ball norm order"}},
           {"a", {ValueKind::kNumber, 1.0, "ball radius"}},
           {"trials", {ValueKind::kNumber, 200.0, "trials per dataset"}},
           {"datasets", {ValueKind::kNumber, 20.0, "datasets per cell"}},
           {"mix_prob", {ValueKind::kNullableNumber, nullptr, "l1 arm prob"}},
           {"model", {ValueKind::kString, "worst", "worst | probabilistic"}},
           {"seed", {ValueKind::kNumber, 1.0, "master seed"}},
           {"threads", {ValueKind::kNumber, 0.0, "worker threads, 0 = auto"}},
       }},
      {"accountant",
       {
           {"epsilon0", {ValueKind::kNumber, 0.4, "local epsilon"}},
           {"delta", {ValueKind::kNumber, 1e-6, "target delta"}},
           {"T", {ValueKind::kNumber, 1000.0, "rounds"}},
           {"m", {ValueKind::kNumber, 10000.0, "clients"}},
           {"k", {ValueKind::kNumber, 10000.0, "clients per round"}},
           {"r", {ValueKind::kNumber, 1.0, "samples per client"}},
           {"s", {ValueKind::kNumber, 1.0, "samples per client per round"}},
           {"bound", {ValueKind::kString, "erlingsson",
                      "erlingsson | balle | both"}},
           {"balle_c", {ValueKind::kNumber, 1.0, "balle bound constant"}},
           {"target_epsilon",
            {ValueKind::kNullableNumber, nullptr, "calibrate epsilon0"}},
       }},
      {"bounds",
       {
           {"p", {ValueKind::kNumberList, List({1.0, 2.0, "inf"}), "norms"}},
           {"d", {ValueKind::kNumberList, List({16.0}), "dimension"}},
           {"n", {ValueKind::kNumberList, List({1000.0}), "sample size"}},
           {"epsilon0", {ValueKind::kNumberList, List({1.0}), "local eps"}},
           {"T", {ValueKind::kNumberList, List({1000.0}), "rounds"}},
           {"a", {ValueKind::kNumber, 1.0, "ball radius"}},
           {"mix_prob", {ValueKind::kNullableNumber, nullptr, "l1 arm prob"}},
           {"L", {ValueKind::kNumber, 1.0, "Lipschitz constant"}},
           {"D", {ValueKind::kNumber, 1.0, "constraint diameter"}},
           {"q", {ValueKind::kNumber, 1.0, "sampling probability"}},
           {"model", {ValueKind::kString, "worst", "worst | probabilistic"}},
       }},
      {"train",
       {
           {"m", {ValueKind::kNumber, 100.0, "clients"}},
           {"r", {ValueKind::kNumber, 10.0, "points per client"}},
           {"k", {ValueKind::kNumber, 20.0, "clients per round"}},
           {"s", {ValueKind::kNumber, 1.0, "points per client per round"}},
           {"d", {ValueKind::kNumber, 20.0, "synthetic dimension"}},
           {"T", {ValueKind::kNumber, 2000.0, "rounds"}},
           {"epsilon0", {ValueKind::kNumber, 8.0, "local epsilon, inf = off"}},
           {"delta", {ValueKind::kNumber, 1e-5, "target delta"}},
           {"p", {ValueKind::kNumber, 2.0, "gradient norm order"}},
           {"clip", {ValueKind::kNumber, 1.0, "clip radius C"}},
           {"D", {ValueKind::kNumber, 8.0, "constraint diameter"}},
           {"mix_prob", {ValueKind::kNumber, 0.0, "l1 arm prob"}},
           {"task", {ValueKind::kString, "logistic", "logistic | linear_abs"}},
           {"accountant", {ValueKind::kString, "erlingsson",
                           "erlingsson | balle | none"}},
           {"balle_c", {ValueKind::kNumber, 1.0, "balle bound constant"}},
           {"data", {ValueKind::kString, "", "dataset path, empty = synthetic"}},
           {"planted_norm", {ValueKind::kNumber, 4.0, "synthetic |theta*|"}},
           {"data_seed", {ValueKind::kNumber, 1.0, "synthetic data seed"}},
           {"seed", {ValueKind::kNumber, 1.0, "training seed"}},
           {"wire_roundtrip", {ValueKind::kBool, false, "decode frames"}},
           {"reference_iterations",
            {ValueKind::kNumber, 4000.0, "iterations of the F* solver"}},
       }},
      {"selftest", {{"seed", {ValueKind::kNumber, 1.0, "master seed"}}}},
  };
  return *schemas;
}

double AsDouble(const Json& v) {
  return v.is_string() ? kInf : v.get<double>();
}

absl::Status ParseNumberText(const std::string& key, absl::string_view text,
                             Json* out) {
  const std::string lower =
      absl::AsciiStrToLower(absl::StripAsciiWhitespace(text));
  if (lower == "inf" || lower == "infinity") {
    *out = "inf";
    return absl::OkStatus();
  }
  double v = 0.0;
  if (!absl::SimpleAtod(lower, &v) || std::isnan(v)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "key '%s': '%s' is not a number", key, std::string(text)));
  }
  if (std::isinf(v)) {
    *out = "inf";
  } else {
    *out = v;
  }
  return absl::OkStatus();
}

absl::Status NormalizeNumber(const std::string& key, const Json& v, Json* out) {
  if (v.is_number()) {
    const double d = v.get<double>();
    if (std::isinf(d)) {
      *out = "inf";
    } else {
      *out = d;
    }
    return absl::OkStatus();
  }
  if (v.is_string()) return ParseNumberText(key, v.get<std::string>(), out);
  return absl::InvalidArgumentError(
      absl::StrFormat("key '%s' expects a number", key));
}

absl::Status NormalizeJson(const std::string& key, const KeySpec& spec,
                           const Json& v, Json* out) {
  switch (spec.kind) {
    case ValueKind::kNumber:
      return NormalizeNumber(key, v, out);
    case ValueKind::kNullableNumber:
      if (v.is_null()) {
        *out = nullptr;
        return absl::OkStatus();
      }
      return NormalizeNumber(key, v, out);
    case ValueKind::kNumberList: {
      Json list = Json::array();
      if (!v.is_array()) {
        Json one;
        CLDP_RETURN_IF_ERROR(NormalizeNumber(key, v, &one));
        list.push_back(one);
      } else {
        if (v.empty()) {
          return absl::InvalidArgumentError(
              absl::StrFormat("key '%s' needs at least one value", key));
        }
        for (const Json& e : v) {
          Json one;
          CLDP_RETURN_IF_ERROR(NormalizeNumber(key, e, &one));
          list.push_back(one);
        }
      }
      *out = std::move(list);
      return absl::OkStatus();
    }
    case ValueKind::kString:
      if (!v.is_string()) {
        return absl::InvalidArgumentError(
            absl::StrFormat("key '%s' expects a string", key));
      }
      *out = v;
      return absl::OkStatus();
    case ValueKind::kBool:
      if (!v.is_boolean()) {
        return absl::InvalidArgumentError(
            absl::StrFormat("key '%s' expects true or false", key));
      }
      *out = v;
      return absl::OkStatus();
  }
  return absl::InternalError("unhandled value kind");
}

absl::Status ParseOverride(const std::string& key, const KeySpec& spec,
                           const std::string& text, Json* out) {
  switch (spec.kind) {
    case ValueKind::kNumber:
      return ParseNumberText(key, text, out);
    case ValueKind::kNullableNumber: {
      const std::string lower = absl::AsciiStrToLower(text);
      if (lower == "null" || lower == "none") {
        *out = nullptr;
        return absl::OkStatus();
      }
      return ParseNumberText(key, text, out);
    }
    case ValueKind::kNumberList: {
      Json list = Json::array();
      for (absl::string_view part : absl::StrSplit(text, ',')) {
        Json one;
        CLDP_RETURN_IF_ERROR(ParseNumberText(key, part, &one));
        list.push_back(one);
      }
      *out = std::move(list);
      return absl::OkStatus();
    }
    case ValueKind::kString:
      *out = text;
      return absl::OkStatus();
    case ValueKind::kBool: {
      const std::string lower = absl::AsciiStrToLower(text);
      if (lower == "true" || lower == "1") {
        *out = true;
      } else if (lower == "false" || lower == "0") {
        *out = false;
      } else {
        return absl::InvalidArgumentError(
            absl::StrFormat("key '%s': '%s' is not a boolean", key, text));
      }
      return absl::OkStatus();
    }
  }
  return absl::InternalError("unhandled value kind");
}

}  // namespace

const Schema* SchemaFor(const std::string& command) {
  const auto& all = AllSchemas();
  auto it = all.find(command);
  return it == all.end() ? nullptr : &it->second;
}

absl::StatusOr<Config> Config::Build(const std::string& command,
                                     const std::optional<std::string>& file,
                                     const std::vector<std::string>& overrides) {
  const Schema* schema = SchemaFor(command);
  if (schema == nullptr) {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown subcommand '", command, "'"));
  }
  Config config;
  config.command_ = command;
  config.values_ = Json::object();
  for (const auto& [key, spec] : *schema) {
    CLDP_RETURN_IF_ERROR(
        NormalizeJson(key, spec, spec.default_value, &config.values_[key]));
  }

  std::vector<std::string> unknown;
  if (file) {
    std::ifstream in(*file);
    if (!in) {
      return absl::InvalidArgumentError(
          absl::StrCat("cannot open config file ", *file));
    }
    const std::string text(std::istreambuf_iterator<char>(in), {});
    Json parsed = Json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded() || !parsed.is_object()) {
      return absl::InvalidArgumentError(
          absl::StrCat("config file ", *file, " is not a JSON object"));
    }
    for (const auto& [key, value] : parsed.items()) {
      auto it = schema->find(key);
      if (it == schema->end()) {
        unknown.push_back(key);
        continue;
      }
      CLDP_RETURN_IF_ERROR(
          NormalizeJson(key, it->second, value, &config.values_[key]));
    }
  }
  for (const std::string& item : overrides) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("override '", item, "' is not key=value"));
    }
    const std::string key = item.substr(0, eq);
    auto it = schema->find(key);
    if (it == schema->end()) {
      unknown.push_back(key);
      continue;
    }
    CLDP_RETURN_IF_ERROR(ParseOverride(key, it->second, item.substr(eq + 1),
                                       &config.values_[key]));
  }
  if (!unknown.empty()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "unknown config keys for ", command, ": ", absl::StrJoin(unknown, ", ")));
  }
  return config;
}

double Config::Number(const std::string& key) const {
  return AsDouble(values_.at(key));
}

std::int64_t Config::Int(const std::string& key) const {
  return static_cast<std::int64_t>(std::llround(Number(key)));
}

std::vector<double> Config::Numbers(const std::string& key) const {
  std::vector<double> out;
  for (const Json& v : values_.at(key)) out.push_back(AsDouble(v));
  return out;
}

std::optional<double> Config::MaybeNumber(const std::string& key) const {
  const Json& v = values_.at(key);
  if (v.is_null()) return std::nullopt;
  return AsDouble(v);
}

std::string Config::String(const std::string& key) const {
  return values_.at(key).get<std::string>();
}

bool Config::Bool(const std::string& key) const {
  return values_.at(key).get<bool>();
}

void Config::SetNumber(const std::string& key, double value) {
  values_[key] = std::isinf(value) ? Json("inf") : Json(value);
}

void Config::SetString(const std::string& key, const std::string& value) {
  values_[key] = value;
}

std::string Config::Canonical() const {
  Json doc = {{"command", command_}, {"values", values_}};
  return doc.dump();
}

std::string Config::Hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : Canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return absl::StrFormat("%016x", h);
}

absl::Status RequireInteger(const Config& config, const std::string& key,
                            std::int64_t min_value) {
  const double v = config.Number(key);
  if (!std::isfinite(v) || v != std::floor(v) ||
      v < static_cast<double>(min_value)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "key '%s' must be an integer >= %d, got %g", key, min_value, v));
  }
  return absl::OkStatus();
}

std::string FormatDouble(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return absl::StrFormat("%.17g", v);
}

std::string CsvCell(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

absl::Status WriteCsv(const std::string& path, const Config& config,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::string out = absl::StrFormat("# cldp %s config_hash=%s\n",
                                    config.command(), config.Hash());
  absl::StrAppend(&out, absl::StrJoin(header, ","), "\n");
  for (const auto& row : rows) absl::StrAppend(&out, absl::StrJoin(row, ","), "\n");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  f << out;
  if (!f) return absl::DataLossError(absl::StrCat("short write to ", path));
  return absl::OkStatus();
}

}  // namespace cldp::tools
