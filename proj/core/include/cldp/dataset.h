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

// Federated datasets: every client holds the same number of labeled points.
//
// Binary layout (little-endian):
//   char[4]  magic "CLDP"
//   uint32   version (1)
//   uint32   m, r, d
//   m * r records, client-major, each d float64 features then a float64 label
//
// CSV layout:
//   m,r,d
//   <m>,<r>,<d>
//   client,x0,...,x{d-1},label
//   one row per record, client-major

#ifndef CLDP_DATASET_H_
#define CLDP_DATASET_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "cldp/linalg.h"

namespace cldp {

struct DataPoint {
  Vec features;
  double label = 0.0;
};

struct ClientDataset {
  std::int64_t client_id = 0;
  std::vector<DataPoint> points;
};

struct Dataset {
  int dim = 0;
  std::vector<ClientDataset> clients;

  std::int64_t num_clients() const {
    return static_cast<std::int64_t>(clients.size());
  }
  std::int64_t points_per_client() const {
    return clients.empty() ? 0
                           : static_cast<std::int64_t>(clients[0].points.size());
  }
  // Checks the balanced shape, ids 0..m-1, dimensions and finiteness.
  absl::Status Validate() const;
};

struct SyntheticSpec {
  std::int64_t m = 100;
  std::int64_t r = 10;
  int d = 20;
  // Norm of the planted parameter.
  double planted_norm = 4.0;
  std::uint64_t seed = 1;
};

// Features uniform on the unit l2 sphere. Labels in {-1, +1} with
// Pr[y = +1] = sigmoid(theta* . x) for a planted theta* of the given norm.
Dataset GenerateSynthetic(const SyntheticSpec& spec, Vec* planted = nullptr);

absl::Status WriteDatasetBinary(const Dataset& data, const std::string& path);
absl::StatusOr<Dataset> ReadDatasetBinary(const std::string& path);
absl::Status WriteDatasetCsv(const Dataset& data, const std::string& path);
absl::StatusOr<Dataset> ReadDatasetCsv(const std::string& path);
// Picks the reader from the extension (.csv, anything else binary).
absl::StatusOr<Dataset> ReadDataset(const std::string& path);

}  // namespace cldp

#endif  // CLDP_DATASET_H_
