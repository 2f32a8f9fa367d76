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

#include "cldp/dataset.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "cldp/rng.h"
#include "cldp/status_macros.h"

namespace cldp {
namespace {

constexpr char kMagic[4] = {'C', 'L', 'D', 'P'};
constexpr std::uint32_t kVersion = 1;

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

void PutF64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(bits >> (8 * i)));
}

std::uint64_t GetLe(const std::string& in, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= std::uint64_t{static_cast<unsigned char>(in[at + i])} << (8 * i);
  }
  return v;
}

absl::StatusOr<std::string> Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  return std::string(std::istreambuf_iterator<char>(in), {});
}

absl::Status Spit(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) return absl::DataLossError(absl::StrCat("short write to ", path));
  return absl::OkStatus();
}

Dataset Shell(std::int64_t m, std::int64_t r, int d) {
  Dataset data;
  data.dim = d;
  data.clients.resize(m);
  for (std::int64_t i = 0; i < m; ++i) {
    data.clients[i].client_id = i;
    data.clients[i].points.resize(r);
  }
  return data;
}

}  // namespace

absl::Status Dataset::Validate() const {
  if (dim < 1) return absl::InvalidArgumentError("dataset dimension must be >= 1");
  if (clients.empty()) return absl::InvalidArgumentError("dataset has no clients");
  const std::size_t r = clients[0].points.size();
  if (r == 0) return absl::InvalidArgumentError("clients hold no points");
  for (std::size_t i = 0; i < clients.size(); ++i) {
    const ClientDataset& c = clients[i];
    if (c.client_id != static_cast<std::int64_t>(i)) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "client at position %d has id %d", i, c.client_id));
    }
    if (c.points.size() != r) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "client %d holds %d points, expected %d", i, c.points.size(), r));
    }
    for (const DataPoint& p : c.points) {
      if (p.features.size() != static_cast<std::size_t>(dim)) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "client %d has a point of dimension %d, expected %d", i,
            p.features.size(), dim));
      }
      if (!AllFinite(p.features) || !std::isfinite(p.label)) {
        return absl::InvalidArgumentError(
            absl::StrFormat("client %d has a non-finite point", i));
      }
    }
  }
  return absl::OkStatus();
}

Dataset GenerateSynthetic(const SyntheticSpec& spec, Vec* planted) {
  Rng rng(DeriveSeed(spec.seed, {0x5eed}));
  Vec theta(spec.d);
  for (double& v : theta) v = StandardNormal(rng);
  const double tn = NormP(theta, 2.0);
  for (double& v : theta) v *= spec.planted_norm / tn;

  Dataset data = Shell(spec.m, spec.r, spec.d);
  for (ClientDataset& c : data.clients) {
    for (DataPoint& p : c.points) {
      p.features.resize(spec.d);
      double norm = 0.0;
      do {
        for (double& v : p.features) v = StandardNormal(rng);
        norm = NormP(p.features, 2.0);
      } while (norm == 0.0);
      for (double& v : p.features) v /= norm;
      const double prob = 1.0 / (1.0 + std::exp(-Dot(theta, p.features)));
      p.label = Bernoulli(rng, prob) ? 1.0 : -1.0;
    }
  }
  if (planted != nullptr) *planted = std::move(theta);
  return data;
}

absl::Status WriteDatasetBinary(const Dataset& data, const std::string& path) {
  CLDP_RETURN_IF_ERROR(data.Validate());
  std::string out(kMagic, sizeof(kMagic));
  PutU32(out, kVersion);
  PutU32(out, static_cast<std::uint32_t>(data.num_clients()));
  PutU32(out, static_cast<std::uint32_t>(data.points_per_client()));
  PutU32(out, static_cast<std::uint32_t>(data.dim));
  for (const ClientDataset& c : data.clients) {
    for (const DataPoint& p : c.points) {
      for (double v : p.features) PutF64(out, v);
      PutF64(out, p.label);
    }
  }
  return Spit(path, out);
}

absl::StatusOr<Dataset> ReadDatasetBinary(const std::string& path) {
  CLDP_ASSIGN_OR_RETURN(std::string in, Slurp(path));
  if (in.size() < 20 || std::memcmp(in.data(), kMagic, 4) != 0) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": not a dataset file (bad magic)"));
  }
  const auto version = GetLe(in, 4, 4);
  if (version != kVersion) {
    return absl::InvalidArgumentError(
        absl::StrFormat("%s: unsupported version %d", path, version));
  }
  const auto m = static_cast<std::int64_t>(GetLe(in, 8, 4));
  const auto r = static_cast<std::int64_t>(GetLe(in, 12, 4));
  const auto d = static_cast<int>(GetLe(in, 16, 4));
  if (m < 1 || r < 1 || d < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": header has a zero dimension"));
  }
  const std::size_t expected =
      20 + static_cast<std::size_t>(m) * r * (static_cast<std::size_t>(d) + 1) * 8;
  if (in.size() != expected) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "%s: %d bytes, header implies %d", path, in.size(), expected));
  }
  Dataset data = Shell(m, r, d);
  std::size_t at = 20;
  for (ClientDataset& c : data.clients) {
    for (DataPoint& p : c.points) {
      p.features.resize(d);
      for (double& v : p.features) {
        v = std::bit_cast<double>(GetLe(in, at, 8));
        at += 8;
      }
      p.label = std::bit_cast<double>(GetLe(in, at, 8));
      at += 8;
    }
  }
  CLDP_RETURN_IF_ERROR(data.Validate());
  return data;
}

absl::Status WriteDatasetCsv(const Dataset& data, const std::string& path) {
  CLDP_RETURN_IF_ERROR(data.Validate());
  std::string out = absl::StrFormat("m,r,d\n%d,%d,%d\nclient", data.num_clients(),
                                    data.points_per_client(), data.dim);
  for (int j = 0; j < data.dim; ++j) absl::StrAppend(&out, ",x", j);
  out += ",label\n";
  for (const ClientDataset& c : data.clients) {
    for (const DataPoint& p : c.points) {
      absl::StrAppend(&out, c.client_id);
      for (double v : p.features) absl::StrAppendFormat(&out, ",%.17g", v);
      absl::StrAppendFormat(&out, ",%.17g\n", p.label);
    }
  }
  return Spit(path, out);
}

absl::StatusOr<Dataset> ReadDatasetCsv(const std::string& path) {
  CLDP_ASSIGN_OR_RETURN(std::string in, Slurp(path));
  std::vector<std::string> lines = absl::StrSplit(in, '\n', absl::SkipEmpty());
  for (std::string& l : lines) absl::StripTrailingAsciiWhitespace(&l);
  if (lines.size() < 3 || lines[0] != "m,r,d") {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": expected a 'm,r,d' header line"));
  }
  std::vector<std::string> dims = absl::StrSplit(lines[1], ',');
  std::int64_t m = 0, r = 0;
  int d = 0;
  if (dims.size() != 3 || !absl::SimpleAtoi(dims[0], &m) ||
      !absl::SimpleAtoi(dims[1], &r) || !absl::SimpleAtoi(dims[2], &d) ||
      m < 1 || r < 1 || d < 1) {
    return absl::InvalidArgumentError(absl::StrCat(path, ": bad m,r,d values"));
  }
  if (lines.size() != 3 + static_cast<std::size_t>(m * r)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "%s: %d records, header implies %d", path, lines.size() - 3, m * r));
  }
  Dataset data = Shell(m, r, d);
  for (std::int64_t row = 0; row < m * r; ++row) {
    std::vector<std::string> cells = absl::StrSplit(lines[3 + row], ',');
    std::int64_t client = -1;
    if (cells.size() != static_cast<std::size_t>(d) + 2 ||
        !absl::SimpleAtoi(cells[0], &client) || client != row / r) {
      return absl::InvalidArgumentError(
          absl::StrFormat("%s: malformed record %d", path, row));
    }
    DataPoint& p = data.clients[client].points[row % r];
    p.features.resize(d);
    for (int j = 0; j < d; ++j) {
      if (!absl::SimpleAtod(cells[1 + j], &p.features[j])) {
        return absl::InvalidArgumentError(
            absl::StrFormat("%s: bad number in record %d", path, row));
      }
    }
    if (!absl::SimpleAtod(cells[d + 1], &p.label)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("%s: bad label in record %d", path, row));
    }
  }
  CLDP_RETURN_IF_ERROR(data.Validate());
  return data;
}

absl::StatusOr<Dataset> ReadDataset(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
    return ReadDatasetCsv(path);
  }
  return ReadDatasetBinary(path);
}

}  // namespace cldp
