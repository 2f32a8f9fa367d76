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

// Dense vector primitives: norms, clipping, the normalized Walsh-Hadamard
// transform and Euclidean ball projection.

#ifndef CLDP_LINALG_H_
#define CLDP_LINALG_H_

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace cldp {

using Vec = std::vector<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Tolerance for identities that hold exactly in real arithmetic.
inline constexpr double kExactTolerance = 1e-12;
// Tolerance for transform round trips.
inline constexpr double kTransformTolerance = 1e-10;

// The l_p ball of the given radius in R^dim. p may be kInfinity.
struct BallSpec {
  double p = 2.0;
  double radius = 1.0;
  int dim = 1;

  absl::Status Validate() const;
  // ||x||_p <= radius * (1 + 1e-12). x must be finite and of length dim.
  bool Contains(std::span<const double> x) const;
};

bool AllFinite(std::span<const double> x);
bool IsValidNormOrder(double p);

// l_p norm without input validation. p in [1, inf].
double NormP(std::span<const double> x, double p);

// Validated l_p norm.
absl::StatusOr<double> PNorm(std::span<const double> x, double p);

// g / max{1, ||g||_p / c}. The result equals g exactly when ||g||_p <= c.
absl::StatusOr<Vec> Clip(std::span<const double> g, double p, double c);

bool IsPowerOfTwo(std::size_t n);
std::size_t NextPowerOfTwo(std::size_t n);

// In-place unnormalized transform x <- H_d x. x.size() must be a power of 2.
void FwhtInPlace(std::span<double> x);

// (1/sqrt(d)) H_d x in O(d log d). Involution on R^d.
absl::StatusOr<Vec> FwhtNormalized(std::span<const double> x);

// Column j of the Sylvester Hadamard matrix H_d: entry i is
// (-1)^popcount(i & j).
Vec HadamardColumn(std::size_t d, std::size_t j);
inline double HadamardEntry(std::size_t i, std::size_t j) {
  return (__builtin_popcountll(i & j) & 1) ? -1.0 : 1.0;
}

double Dot(std::span<const double> a, std::span<const double> b);

// Euclidean projection onto {v : ||v - center||_2 <= radius}.
absl::StatusOr<Vec> ProjectL2Ball(std::span<const double> theta,
                                  std::span<const double> center,
                                  double radius);

}  // namespace cldp

#endif  // CLDP_LINALG_H_
