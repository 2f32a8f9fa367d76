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

// Simulated federated private SGD. Each round samples k of m clients, each
// sampled client samples s of its r points, clips and privatizes one gradient
// per point, the server shuffles all k*s messages, averages their decodings
// and takes a projected step onto the l2 ball of diameter D.

#ifndef CLDP_FEDSIM_H_
#define CLDP_FEDSIM_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "cldp/accountant.h"
#include "cldp/dataset.h"
#include "cldp/linalg.h"
#include "cldp/mechanisms.h"
#include "cldp/message.h"
#include "cldp/rng.h"
#include "cldp/tasks.h"
#include "cldp/wire.h"

namespace cldp {

// k distinct ids from [0, m), ascending.
std::vector<std::int64_t> SampleClients(std::int64_t m, std::int64_t k,
                                        Rng& rng);
// s distinct indices from [0, r), ascending.
std::vector<std::int64_t> SampleData(std::int64_t r, std::int64_t s, Rng& rng);

// Uniform Fisher-Yates permutation in place.
template <typename T>
void Shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[UniformIndex(rng, i)]);
  }
}

struct TrainConfig {
  SamplingParams params;
  std::int64_t rounds = 1;
  // kInfinity disables privatization and compression.
  double epsilon0 = 1.0;
  double delta = 1e-5;
  // Gradient norm and clip radius C.
  double p = 2.0;
  double clip = 1.0;
  // Probability of the l1 arm when p is not 1, 2 or inf.
  double mix_prob = 0.0;
  // Diameter of the centered l2 constraint ball.
  double diameter = 2.0;
  TaskKind task = TaskKind::kLogistic;
  std::uint64_t seed = 1;
  // Shuffle bound used for the reported budget. Unset: no guarantee.
  std::optional<ShuffleBound> accountant = ShuffleBound::Erlingsson();
  // Decode every frame from its bytes before aggregating.
  bool wire_roundtrip = false;
  // Record the full-dataset loss in the traces.
  bool track_loss = true;

  bool Private() const { return !std::isinf(epsilon0); }
  absl::Status Validate() const;
};

struct RoundTrace {
  std::int64_t t = 0;
  std::vector<std::int64_t> clients;
  std::int64_t exact_bits = 0;
  double expected_bits = 0.0;
  double loss_before = 0.0;
  double loss_after = 0.0;
  double grad_norm = 0.0;
  double epsilon_so_far = 0.0;
};

struct TrainResult {
  Vec theta;
  PrivacyBudget budget;
  std::vector<RoundTrace> traces;
  std::int64_t clipped = 0;
  std::int64_t gradients = 0;
  std::vector<std::string> warnings;
};

// What one sampled client hands to the shuffler. Private runs fill messages
// and frames; the non-private baseline fills plain.
struct LocalOutput {
  std::vector<MechanismMessage> messages;
  std::vector<std::vector<std::uint8_t>> frames;
  std::vector<Vec> plain;
  std::int64_t bits = 0;
  std::int64_t clipped = 0;
};

// Mechanism used for gradients clipped to the l_p ball of radius C.
absl::StatusOr<Mechanism> GradientMechanism(const TrainConfig& cfg, int dim);

absl::StatusOr<LocalOutput> LocalRound(const ClientDataset& client,
                                       std::span<const double> theta,
                                       const TrainConfig& cfg,
                                       const Mechanism* mechanism, Rng& rng);

// Mean of the decoded messages. Fails unless exactly expected_count arrive.
absl::StatusOr<Vec> Aggregate(std::span<const MechanismMessage> messages,
                              const Mechanism& mechanism,
                              std::size_t expected_count);

// Step size scale G from the second-moment bound of the configured family.
absl::StatusOr<double> StepScale(const TrainConfig& cfg, int dim);

absl::StatusOr<TrainResult> Train(const TrainConfig& cfg, const Dataset& data);

}  // namespace cldp

#endif  // CLDP_FEDSIM_H_
