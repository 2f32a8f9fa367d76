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

// Privacy accounting for the shuffled federated model: per-sample local
// epsilon0 -> per-round (eps, delta) through shuffling and two-level
// subsampling -> T-round central (eps, delta) through strong composition.
//
// All logarithms are natural.

#ifndef CLDP_ACCOUNTANT_H_
#define CLDP_ACCOUNTANT_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace cldp {

// m clients, k sampled per round, r samples per client, s sampled per client.
struct SamplingParams {
  std::int64_t m = 1;
  std::int64_t k = 1;
  std::int64_t r = 1;
  std::int64_t s = 1;

  absl::Status Validate() const;
  double q1() const { return static_cast<double>(k) / static_cast<double>(m); }
  double q2() const { return static_cast<double>(s) / static_cast<double>(r); }
  double q() const { return q1() * q2(); }
  std::int64_t n() const { return m * r; }
  // Messages per shuffled batch.
  std::int64_t batch() const { return k * s; }
};

struct PrivacyPair {
  double epsilon = 0.0;
  double delta = 0.0;
};

// Which amplification-by-shuffling bound to use.
//   kErlingsson: eps = 12 eps0 sqrt(ln(1/delta) / m). Requires eps0 < 1/2,
//                delta in (0, 1/100), m >= 1000. The default for guarantees.
//   kBalle:      eps = c min{eps0, 1} e^eps0 sqrt(ln(1/delta) / m). Requires
//                eps0 <= ln(m / ln(1/delta)) / 2. The published bound hides c
//                in O(.), so results are diagnostic only.
struct ShuffleBound {
  enum class Kind { kErlingsson, kBalle };
  Kind kind = Kind::kErlingsson;
  double balle_constant = 1.0;

  static ShuffleBound Erlingsson() { return {}; }
  static ShuffleBound Balle(double c = 1.0) { return {Kind::kBalle, c}; }
  std::string Name() const;
  bool IsGuarantee() const { return kind == Kind::kErlingsson; }
};

// One stage of the chain eps0 -> eps~ -> eps_bar -> eps.
struct ProvenanceStep {
  std::string stage;    // "local", "shuffle", "subsample", "compose"
  std::string rule;     // bound that produced this stage
  std::string formula;  // human-readable formula with substituted values
  double epsilon = 0.0;
  double delta = 0.0;
};

struct PrivacyBudget {
  double epsilon0 = 0.0;
  double shuffle_epsilon = 0.0;  // eps~
  double shuffle_delta = 0.0;    // delta~
  double round_epsilon = 0.0;    // eps_bar
  double round_delta = 0.0;      // delta_bar
  double composition_delta = 0.0;  // delta'
  double epsilon = 0.0;
  double delta = 0.0;
  std::int64_t rounds = 0;
  std::string shuffle_bound;
  // False for diagnostic bounds, or when privatization is disabled.
  bool guarantee = true;
  std::vector<ProvenanceStep> provenance;
  std::vector<std::string> warnings;
};

// ln(1 + q (e^eps - 1)), q delta. q in (0, 1].
absl::StatusOr<PrivacyPair> AmplifyBySubsampling(double epsilon, double delta,
                                                 double q);

// eps~ for a batch of batch_size eps0-LDP messages shuffled together.
absl::StatusOr<double> AmplifyByShuffling(double epsilon0, double delta,
                                          std::int64_t batch_size,
                                          const ShuffleBound& bound);

// Per-round (eps_bar, delta_bar) at shuffle failure probability delta~.
// s = 1: the subsampling factor is q = ks/(mr). s > 1: only q2 = s/r is
// available for epsilon (client sampling amplification is not proven); delta
// still scales by q.
absl::StatusOr<PrivacyPair> PerRoundBudget(double epsilon0,
                                           double shuffle_delta,
                                           const SamplingParams& params,
                                           const ShuffleBound& bound);

// sqrt(2 T ln(1/delta')) eps + T eps (e^eps - 1), T delta + delta'.
absl::StatusOr<PrivacyPair> StrongComposition(double round_epsilon,
                                              double round_delta,
                                              std::int64_t rounds,
                                              double composition_delta);

// Full chain with delta~ = delta / (2 q T) and delta' = delta / 2, so that the
// reported delta equals the target.
absl::StatusOr<PrivacyBudget> EndToEnd(double epsilon0, double delta,
                                       std::int64_t rounds,
                                       const SamplingParams& params,
                                       const ShuffleBound& bound);

// Largest eps0 whose end-to-end epsilon does not exceed target_epsilon, to
// relative tolerance 1e-9. Fails with kOutOfRange ("infeasible") when no eps0
// allowed by the bound's preconditions brackets the target.
absl::StatusOr<double> CalibrateEpsilon0(double target_epsilon, double delta,
                                         std::int64_t rounds,
                                         const SamplingParams& params,
                                         const ShuffleBound& bound);

}  // namespace cldp

#endif  // CLDP_ACCOUNTANT_H_
