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

// Bit-exact encodings of mechanism messages.
//
// Index-sign atoms use ceil(log2 d) + 1 bits: the index big-endian followed by
// a sign bit (1 for +). A multiset of s atoms over an alphabet of size B is
// sent as its rank among all C(s+B-1, s) multisets, using the combinatorial
// number system on the nondecreasing atom sequence.
//
// Frame layout, one per shuffled message:
//   [1 byte tag][2 bytes payload bit length, big-endian][payload, zero padded]

#ifndef CLDP_WIRE_H_
#define CLDP_WIRE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "boost/multiprecision/cpp_int.hpp"
#include "cldp/accountant.h"
#include "cldp/mechanisms.h"
#include "cldp/message.h"

namespace cldp {

using BigInt = boost::multiprecision::cpp_int;
using Bits = std::vector<bool>;

enum class FrameTag : std::uint8_t {
  kIndexSign = 1,
  kSparseSigned = 2,
  kSparseZero = 3,
  kIndexSignBatch = 4,
  kMixL1 = 5,
  kMixL2 = 6,
  kMixL2Zero = 7,
};

// "1011" style rendering, most significant bit first.
std::string BitsToString(const Bits& bits);

// ceil(log2 n) for n >= 1.
int CeilLog2(std::uint64_t n);

// ceil(log2 d) + 1.
int IndexSignBits(std::uint64_t dim);

absl::StatusOr<Bits> EncodeIndexSign(const IndexSign& msg, std::uint64_t dim);
absl::StatusOr<IndexSign> DecodeIndexSign(const Bits& bits, std::uint64_t dim);

struct HistogramCode {
  BigInt rank;
  std::uint64_t s = 0;
  std::uint64_t alphabet = 0;
  int bit_length = 0;
};

BigInt Binomial(std::uint64_t n, std::uint64_t k);
// C(s + B - 1, s).
BigInt MultisetCount(std::uint64_t s, std::uint64_t alphabet);
// ceil(log2 C(s + B - 1, s)), exact.
int HistogramBitLength(std::uint64_t s, std::uint64_t alphabet);
// s (log2 e + log2((s + B - 1) / s)).
double HistogramEnvelopeBits(std::uint64_t s, std::uint64_t alphabet);

absl::StatusOr<HistogramCode> HistogramPack(
    std::span<const std::uint64_t> atoms, std::uint64_t alphabet);
// Returns the multiset in nondecreasing order.
absl::StatusOr<std::vector<std::uint64_t>> HistogramUnpack(
    const HistogramCode& code);

// The rank as exactly code.bit_length bits, most significant first.
Bits HistogramToBits(const HistogramCode& code);
absl::StatusOr<HistogramCode> HistogramFromBits(const Bits& bits,
                                                std::uint64_t s,
                                                std::uint64_t alphabet);

// Everything a receiver needs besides the frame itself.
struct WireContext {
  MechanismFamily family = MechanismFamily::kR1;
  int dim = 1;
};

// Dimension of the index alphabet for index-sign messages of a family
// (padded for R1 and the l1 arm of Rp).
std::uint64_t IndexDim(const WireContext& ctx, ArmTag arm = ArmTag::kL1);

// Payload bits of a single message.
absl::StatusOr<int> MessageBits(const MechanismMessage& msg,
                                const WireContext& ctx);

absl::StatusOr<std::vector<std::uint8_t>> EncodeFrame(
    const MechanismMessage& msg, const WireContext& ctx);
absl::StatusOr<MechanismMessage> DecodeFrame(
    std::span<const std::uint8_t> frame, const WireContext& ctx);

// A client's s index-sign messages packed as one histogram over the b-bit
// alphabet, B = 2^b with b = IndexSignBits(index_dim).
absl::StatusOr<std::vector<std::uint8_t>> EncodeIndexSignBatch(
    std::span<const IndexSign> msgs, std::uint64_t index_dim);
absl::StatusOr<std::vector<IndexSign>> DecodeIndexSignBatch(
    std::span<const std::uint8_t> frame, std::uint64_t s,
    std::uint64_t index_dim);

// Payload bit length read from a frame header.
absl::StatusOr<int> FramePayloadBits(std::span<const std::uint8_t> frame);

struct CommunicationCost {
  // T (k/m) s (log2 e + log2((s + 2^b - 1) / s)).
  double expected_envelope_bits = 0.0;
  // T (k/m) times the exact per-round cost of one participating client.
  double expected_exact_bits = 0.0;
  // b for s = 1, else ceil(log2 C(s + 2^b - 1, s)).
  int exact_bits_per_round = 0;
};

absl::StatusOr<CommunicationCost> ExpectedBitsPerClient(
    const SamplingParams& params, int bits_per_message, std::int64_t rounds);

}  // namespace cldp

#endif  // CLDP_WIRE_H_
