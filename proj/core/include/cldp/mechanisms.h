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

// Communication-limited locally private mean-estimation mechanisms.
//
//   R1    l1 ball. Normalized Hadamard rotation, one coordinate, one signed
//         bit. Output alphabet: 2 d' atoms, d' = next power of two >= d.
//   Priv  l2 ball. Randomized hemisphere sampling on a sphere of radius M.
//   Quan  Unbiased sparse quantization of a vector of l2 norm <= M into d
//         signed coordinate draws.
//   R2    Quan(Priv(x)).
//   RInf  l-infinity ball. One coordinate, one signed bit.
//   Rp    lp ball, p in [1, inf). With probability mix_prob runs R1 at radius
//         a d^(1-1/p), otherwise R2 at radius a max{d^(1/2-1/p), 1}.
//
// Every decoder is unbiased: E[Decode(Encode(x))] = x for x in the ball.
// The server estimates the mean by averaging decoded messages.

#ifndef CLDP_MECHANISMS_H_
#define CLDP_MECHANISMS_H_

#include <span>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "cldp/linalg.h"
#include "cldp/message.h"
#include "cldp/rng.h"

namespace cldp {

enum class MechanismFamily { kR1, kR2, kRInf, kRp };

std::string_view FamilyName(MechanismFamily family);
absl::StatusOr<MechanismFamily> ParseFamily(std::string_view name);

// The natural family for an l_p ball: p=1 -> R1, p=2 -> R2, p=inf -> RInf,
// otherwise Rp.
MechanismFamily FamilyForNorm(double p);

struct MechanismSpec {
  BallSpec ball;
  double epsilon0 = 1.0;
  // Probability of the l1 arm. Only read by Rp.
  double mix_prob = 0.0;

  absl::Status Validate(MechanismFamily family) const;
};

// (e^eps + 1) / (e^eps - 1).
double PrivacyRatio(double epsilon0);

// Radius of the sphere Priv samples from:
//   M = a (sqrt(pi)/2) d Gamma((d+1)/2) / Gamma(d/2 + 1) (e^eps+1)/(e^eps-1).
double PrivRadius(int dim, double radius, double epsilon0);

// --- R1 -------------------------------------------------------------------

// Dimension of the Hadamard alphabet: d rounded up to a power of two.
std::size_t R1PaddedDim(int dim);

absl::StatusOr<IndexSign> R1Encode(std::span<const double> x,
                                   const MechanismSpec& spec, Rng& rng);
absl::StatusOr<Vec> R1Decode(const IndexSign& msg, const MechanismSpec& spec);

// Closed-form law of R1 on input x, indexed by IndexSign::Atom().
absl::StatusOr<std::vector<double>> R1AtomProbabilities(
    std::span<const double> x, const MechanismSpec& spec);

// --- Priv / Quan / R2 ------------------------------------------------------

absl::StatusOr<Vec> Priv(std::span<const double> x, const MechanismSpec& spec,
                         Rng& rng);

absl::StatusOr<SparseSigned> Quan(std::span<const double> x, double radius,
                                  Rng& rng);
absl::StatusOr<Vec> QuanDecode(const SparseSigned& msg, double radius,
                               int dim);

absl::StatusOr<SparseSigned> R2Encode(std::span<const double> x,
                                      const MechanismSpec& spec, Rng& rng);
absl::StatusOr<Vec> R2Decode(const SparseSigned& msg,
                             const MechanismSpec& spec);

// --- R-infinity ------------------------------------------------------------

absl::StatusOr<IndexSign> RInfEncode(std::span<const double> x,
                                     const MechanismSpec& spec, Rng& rng);
absl::StatusOr<Vec> RInfDecode(const IndexSign& msg,
                               const MechanismSpec& spec);
absl::StatusOr<std::vector<double>> RInfAtomProbabilities(
    std::span<const double> x, const MechanismSpec& spec);

// --- Rp --------------------------------------------------------------------

// Inner specs the two arms run with (inflated radii).
MechanismSpec RpL1ArmSpec(const MechanismSpec& spec);
MechanismSpec RpL2ArmSpec(const MechanismSpec& spec);

absl::StatusOr<MixTagged> RpEncode(std::span<const double> x,
                                   const MechanismSpec& spec, Rng& rng);
absl::StatusOr<Vec> RpDecode(const MixTagged& msg, const MechanismSpec& spec);

// --- Family dispatch and server-side averaging ------------------------------

class Mechanism {
 public:
  static absl::StatusOr<Mechanism> Create(MechanismFamily family,
                                          const MechanismSpec& spec);

  MechanismFamily family() const { return family_; }
  const MechanismSpec& spec() const { return spec_; }
  int dim() const { return spec_.ball.dim; }

  absl::StatusOr<MechanismMessage> Encode(std::span<const double> x,
                                          Rng& rng) const;
  absl::StatusOr<Vec> Decode(const MechanismMessage& msg) const;

  // (1/n) sum_i Decode(msg_i). Fails on an empty list.
  absl::StatusOr<Vec> MeanEstimate(
      std::span<const MechanismMessage> messages) const;

 private:
  Mechanism(MechanismFamily family, const MechanismSpec& spec)
      : family_(family), spec_(spec) {}

  MechanismFamily family_;
  MechanismSpec spec_;
};

}  // namespace cldp

#endif  // CLDP_MECHANISMS_H_
