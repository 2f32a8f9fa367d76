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

// Closed-form risk, communication and convergence bounds for private
// mean estimation and private SGD.

#ifndef CLDP_BOUNDS_H_
#define CLDP_BOUNDS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "cldp/linalg.h"

namespace cldp {

struct RiskQuery {
  double p = 2.0;
  std::int64_t d = 1;
  std::int64_t n = 1;
  double a = 1.0;
  double epsilon0 = 1.0;
  // Probability of the l1 arm when mixing two mechanisms.
  std::optional<double> mix_prob;

  absl::Status Validate() const;
};

enum class RiskModel {
  kWorstCase,      // fixed data in the ball
  kProbabilistic,  // data drawn from a distribution on the ball
};

// Achievable mean squared error. For p in {1, 2, inf} without mix_prob this is
// the direct mechanism bound; with mix_prob (p < inf) it is
//   pbar d^(2-2/p) r1 + (1 - pbar) max{d^(1-2/p), 1} r2.
absl::StatusOr<double> RiskUpper(const RiskQuery& q, RiskModel model);

// Order-only lower bound with the hidden constant set to 1:
//   p <= 2: a^2 min{1, d / (n eps0^2)}
//   p >  2: a^2 d^(1-2/p) min{1, d / (n min{eps0, eps0^2})}
absl::StatusOr<double> RiskLower(const RiskQuery& q);

// Given the decoded value of each of the 2^b < d mechanism outputs, returns
// an input in the l_p sphere of radius a orthogonal to every decoded value.
// Among the null-space basis vectors and the projections of coordinate axes
// onto the null space it picks the one with the largest l2 / l_p ratio.
absl::StatusOr<Vec> CommAdversary(std::span<const Vec> decoder_table,
                                  double p, double a);

// L^2 max{d^(1-2/p), 1} (1 + c d / (q n) ratio^2), c = 4 for p in {1, inf}
// and 14 otherwise. epsilon0 = inf gives ratio 1.
absl::StatusOr<double> GSquared(double lipschitz, std::int64_t d, double p,
                                double q, std::int64_t n, double epsilon0);

// 2 D G (2 + ln T) / sqrt(T).
absl::StatusOr<double> ConvergenceBound(double lipschitz, double diameter,
                                        std::int64_t d, double p,
                                        std::int64_t rounds, double q,
                                        std::int64_t n, double epsilon0);

struct ConvergencePreset {
  std::int64_t rounds = 0;
  double q = 1.0;
  double epsilon0 = 0.0;
  double bound = 0.0;
};

// p = 2, T = ceil(n / q), eps0 = eps sqrt(n / (q T ln(2qT/delta) ln(2/delta))).
absl::StatusOr<ConvergencePreset> OptimalRatePreset(double lipschitz,
                                                    double diameter,
                                                    std::int64_t d,
                                                    std::int64_t n, double q,
                                                    double epsilon,
                                                    double delta);

// p = 2, q = 1, T = ceil(n / ln^2 n) at the given eps0.
absl::StatusOr<ConvergencePreset> FullParticipationPreset(
    double lipschitz, double diameter, std::int64_t d, std::int64_t n,
    double epsilon0);

}  // namespace cldp

#endif  // CLDP_BOUNDS_H_
