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

// Finite-alphabet outputs of the private quantizers.

#ifndef CLDP_MESSAGE_H_
#define CLDP_MESSAGE_H_

#include <cstdint>
#include <variant>
#include <vector>

namespace cldp {

// One signed Hadamard column (R1) or signed basis vector (R-infinity).
struct IndexSign {
  std::uint32_t index = 0;
  int sign = 1;  // +1 or -1

  // Position in the 2n-atom alphabet: 2 * index + (sign > 0).
  std::uint64_t Atom() const { return 2u * std::uint64_t{index} + (sign > 0); }
  static IndexSign FromAtom(std::uint64_t atom) {
    return {static_cast<std::uint32_t>(atom >> 1), (atom & 1) ? 1 : -1};
  }
  friend bool operator==(const IndexSign&, const IndexSign&) = default;
};

// d signed coordinate draws of Quan. Repetition is allowed. A zero message
// (from an all-zero input) carries d copies of (0, +1) and decodes to 0.
struct SparseSigned {
  std::vector<IndexSign> samples;
  bool zero = false;

  friend bool operator==(const SparseSigned&, const SparseSigned&) = default;
};

enum class ArmTag : std::uint8_t { kL1 = 1, kL2 = 2 };

// Output of the two-arm lp mixture. kL1 carries IndexSign, kL2 SparseSigned.
struct MixTagged {
  ArmTag arm = ArmTag::kL1;
  std::variant<IndexSign, SparseSigned> inner;

  friend bool operator==(const MixTagged&, const MixTagged&) = default;
};

using MechanismMessage = std::variant<IndexSign, SparseSigned, MixTagged>;

}  // namespace cldp

#endif  // CLDP_MESSAGE_H_
