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

#include "cldp/wire.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "absl/strings/str_format.h"
#include "cldp/status_macros.h"

namespace cldp {
namespace {

constexpr std::size_t kHeaderBytes = 3;
constexpr int kMaxPayloadBits = 0xffff;

void AppendUint(Bits& bits, std::uint64_t value, int width) {
  for (int i = width - 1; i >= 0; --i) bits.push_back((value >> i) & 1u);
}

std::uint64_t ReadUint(const Bits& bits, std::size_t offset, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v = (v << 1) | bits[offset + i];
  return v;
}

absl::StatusOr<std::vector<std::uint8_t>> MakeFrame(FrameTag tag,
                                                    const Bits& payload) {
  if (payload.size() > static_cast<std::size_t>(kMaxPayloadBits)) {
    return absl::OutOfRangeError(absl::StrFormat(
        "payload of %d bits exceeds the 16-bit frame length field",
        payload.size()));
  }
  std::vector<std::uint8_t> out(kHeaderBytes + (payload.size() + 7) / 8, 0);
  out[0] = static_cast<std::uint8_t>(tag);
  out[1] = static_cast<std::uint8_t>(payload.size() >> 8);
  out[2] = static_cast<std::uint8_t>(payload.size() & 0xff);
  for (std::size_t i = 0; i < payload.size(); ++i) {
    if (payload[i]) out[kHeaderBytes + i / 8] |= 0x80u >> (i % 8);
  }
  return out;
}

struct ParsedFrame {
  FrameTag tag;
  Bits payload;
};

absl::StatusOr<ParsedFrame> ParseFrame(std::span<const std::uint8_t> frame) {
  if (frame.size() < kHeaderBytes) {
    return absl::InvalidArgumentError("frame shorter than its header");
  }
  const std::uint8_t tag = frame[0];
  if (tag < 1 || tag > 7) {
    return absl::InvalidArgumentError(
        absl::StrFormat("unknown frame tag %d", tag));
  }
  const std::size_t nbits = (std::size_t{frame[1]} << 8) | frame[2];
  if (frame.size() != kHeaderBytes + (nbits + 7) / 8) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "frame of %d bytes does not match its %d-bit payload", frame.size(),
        nbits));
  }
  ParsedFrame parsed{static_cast<FrameTag>(tag), Bits(nbits)};
  for (std::size_t i = 0; i < nbits; ++i) {
    parsed.payload[i] = (frame[kHeaderBytes + i / 8] >> (7 - i % 8)) & 1u;
  }
  for (std::size_t i = nbits; i < 8 * (frame.size() - kHeaderBytes); ++i) {
    if ((frame[kHeaderBytes + i / 8] >> (7 - i % 8)) & 1u) {
      return absl::InvalidArgumentError("nonzero frame padding");
    }
  }
  return parsed;
}

Bits Slice(const Bits& bits, std::size_t from) {
  return Bits(bits.begin() + static_cast<std::ptrdiff_t>(from), bits.end());
}

// d samples over the 2d-atom alphabet.
absl::StatusOr<Bits> EncodeSparse(const SparseSigned& msg, int dim) {
  if (msg.samples.size() != static_cast<std::size_t>(dim)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "sparse message has %d samples, expected %d", msg.samples.size(), dim));
  }
  std::vector<std::uint64_t> atoms;
  atoms.reserve(msg.samples.size());
  for (const IndexSign& m : msg.samples) atoms.push_back(m.Atom());
  CLDP_ASSIGN_OR_RETURN(HistogramCode code,
                        HistogramPack(atoms, 2 * std::uint64_t(dim)));
  return HistogramToBits(code);
}

absl::StatusOr<SparseSigned> DecodeSparse(const Bits& bits, int dim) {
  CLDP_ASSIGN_OR_RETURN(
      HistogramCode code,
      HistogramFromBits(bits, std::uint64_t(dim), 2 * std::uint64_t(dim)));
  CLDP_ASSIGN_OR_RETURN(std::vector<std::uint64_t> atoms,
                        HistogramUnpack(code));
  SparseSigned msg;
  msg.samples.reserve(atoms.size());
  for (std::uint64_t a : atoms) msg.samples.push_back(IndexSign::FromAtom(a));
  return msg;
}

SparseSigned ZeroSparse(int dim) {
  SparseSigned msg;
  msg.samples.assign(dim, IndexSign{0, 1});
  msg.zero = true;
  return msg;
}

// Largest c in [lo, hi] with C(c, k) <= rank; C(lo, k) <= rank is assumed.
std::uint64_t LargestBelow(const BigInt& rank, std::uint64_t k,
                           std::uint64_t lo, std::uint64_t hi) {
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo + 1) / 2;
    if (Binomial(mid, k) <= rank) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

}  // namespace

std::string BitsToString(const Bits& bits) {
  std::string s;
  s.reserve(bits.size());
  for (bool b : bits) s.push_back(b ? '1' : '0');
  return s;
}

int CeilLog2(std::uint64_t n) {
  if (n <= 1) return 0;
  return 64 - std::countl_zero(n - 1);
}

int IndexSignBits(std::uint64_t dim) { return CeilLog2(dim) + 1; }

absl::StatusOr<Bits> EncodeIndexSign(const IndexSign& msg, std::uint64_t dim) {
  if (dim < 1) return absl::InvalidArgumentError("dimension must be >= 1");
  if (msg.index >= dim) {
    return absl::OutOfRangeError(absl::StrFormat(
        "index %d out of range for dimension %d", msg.index, dim));
  }
  if (msg.sign != 1 && msg.sign != -1) {
    return absl::InvalidArgumentError("sign must be +1 or -1");
  }
  Bits bits;
  bits.reserve(IndexSignBits(dim));
  AppendUint(bits, msg.index, CeilLog2(dim));
  bits.push_back(msg.sign > 0);
  return bits;
}

absl::StatusOr<IndexSign> DecodeIndexSign(const Bits& bits,
                                          std::uint64_t dim) {
  if (dim < 1) return absl::InvalidArgumentError("dimension must be >= 1");
  const int width = CeilLog2(dim);
  if (bits.size() != static_cast<std::size_t>(width + 1)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "index-sign payload has %d bits, expected %d", bits.size(),
        width + 1));
  }
  const std::uint64_t index = ReadUint(bits, 0, width);
  if (index >= dim) {
    return absl::OutOfRangeError(absl::StrFormat(
        "decoded index %d out of range for dimension %d", index, dim));
  }
  return IndexSign{static_cast<std::uint32_t>(index), bits[width] ? 1 : -1};
}

BigInt Binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  BigInt result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result *= n - k + i;
    result /= i;
  }
  return result;
}

BigInt MultisetCount(std::uint64_t s, std::uint64_t alphabet) {
  if (alphabet == 0) return s == 0 ? 1 : 0;
  return Binomial(s + alphabet - 1, s);
}

int HistogramBitLength(std::uint64_t s, std::uint64_t alphabet) {
  const BigInt count = MultisetCount(s, alphabet);
  if (count <= 1) return 0;
  return static_cast<int>(boost::multiprecision::msb(BigInt(count - 1))) + 1;
}

double HistogramEnvelopeBits(std::uint64_t s, std::uint64_t alphabet) {
  const double sd = static_cast<double>(s);
  return sd * (std::numbers::log2e +
               std::log2((sd + static_cast<double>(alphabet) - 1.0) / sd));
}

absl::StatusOr<HistogramCode> HistogramPack(
    std::span<const std::uint64_t> atoms, std::uint64_t alphabet) {
  if (atoms.empty()) {
    return absl::InvalidArgumentError("histogram needs at least one atom");
  }
  if (alphabet < 1) return absl::InvalidArgumentError("empty alphabet");
  std::vector<std::uint64_t> sorted(atoms.begin(), atoms.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.back() >= alphabet) {
    return absl::OutOfRangeError(absl::StrFormat(
        "atom %d outside alphabet of size %d", sorted.back(), alphabet));
  }
  HistogramCode code;
  code.s = sorted.size();
  code.alphabet = alphabet;
  code.bit_length = HistogramBitLength(code.s, alphabet);
  for (std::uint64_t i = 0; i < sorted.size(); ++i) {
    code.rank += Binomial(sorted[i] + i, i + 1);
  }
  return code;
}

absl::StatusOr<std::vector<std::uint64_t>> HistogramUnpack(
    const HistogramCode& code) {
  if (code.s < 1 || code.alphabet < 1) {
    return absl::InvalidArgumentError("histogram needs s >= 1 and B >= 1");
  }
  if (code.rank < 0 || code.rank >= MultisetCount(code.s, code.alphabet)) {
    return absl::OutOfRangeError("histogram rank out of range");
  }
  std::vector<std::uint64_t> atoms(code.s);
  BigInt rank = code.rank;
  std::uint64_t hi = code.s + code.alphabet - 2;
  for (std::uint64_t i = code.s; i-- > 0;) {
    const std::uint64_t c = LargestBelow(rank, i + 1, i, hi);
    rank -= Binomial(c, i + 1);
    atoms[i] = c - i;
    if (c > 0) hi = c - 1;
  }
  return atoms;
}

Bits HistogramToBits(const HistogramCode& code) {
  Bits bits(code.bit_length);
  for (int i = 0; i < code.bit_length; ++i) {
    bits[i] = boost::multiprecision::bit_test(
        code.rank, static_cast<unsigned>(code.bit_length - 1 - i));
  }
  return bits;
}

absl::StatusOr<HistogramCode> HistogramFromBits(const Bits& bits,
                                                std::uint64_t s,
                                                std::uint64_t alphabet) {
  HistogramCode code;
  code.s = s;
  code.alphabet = alphabet;
  code.bit_length = HistogramBitLength(s, alphabet);
  if (bits.size() != static_cast<std::size_t>(code.bit_length)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "histogram payload has %d bits, expected %d", bits.size(),
        code.bit_length));
  }
  for (bool b : bits) {
    code.rank <<= 1;
    if (b) code.rank |= 1;
  }
  if (code.rank >= MultisetCount(s, alphabet)) {
    return absl::OutOfRangeError("histogram rank out of range");
  }
  return code;
}

std::uint64_t IndexDim(const WireContext& ctx, ArmTag arm) {
  switch (ctx.family) {
    case MechanismFamily::kR1:
      return R1PaddedDim(ctx.dim);
    case MechanismFamily::kRInf:
    case MechanismFamily::kR2:
      return ctx.dim;
    case MechanismFamily::kRp:
      return arm == ArmTag::kL1 ? R1PaddedDim(ctx.dim) : ctx.dim;
  }
  return ctx.dim;
}

absl::StatusOr<int> MessageBits(const MechanismMessage& msg,
                                const WireContext& ctx) {
  CLDP_ASSIGN_OR_RETURN(std::vector<std::uint8_t> frame,
                        EncodeFrame(msg, ctx));
  return FramePayloadBits(frame);
}

absl::StatusOr<std::vector<std::uint8_t>> EncodeFrame(
    const MechanismMessage& msg, const WireContext& ctx) {
  if (ctx.dim < 1) return absl::InvalidArgumentError("dimension must be >= 1");
  if (const auto* is = std::get_if<IndexSign>(&msg)) {
    if (ctx.family != MechanismFamily::kR1 &&
        ctx.family != MechanismFamily::kRInf) {
      return absl::InvalidArgumentError(
          "index-sign message for a family that does not emit one");
    }
    CLDP_ASSIGN_OR_RETURN(Bits bits, EncodeIndexSign(*is, IndexDim(ctx)));
    return MakeFrame(FrameTag::kIndexSign, bits);
  }
  if (const auto* ss = std::get_if<SparseSigned>(&msg)) {
    if (ctx.family != MechanismFamily::kR2) {
      return absl::InvalidArgumentError(
          "sparse message for a family that does not emit one");
    }
    if (ss->zero) return MakeFrame(FrameTag::kSparseZero, {});
    CLDP_ASSIGN_OR_RETURN(Bits bits, EncodeSparse(*ss, ctx.dim));
    return MakeFrame(FrameTag::kSparseSigned, bits);
  }
  const auto& mix = std::get<MixTagged>(msg);
  if (ctx.family != MechanismFamily::kRp) {
    return absl::InvalidArgumentError(
        "mixed message for a family that does not emit one");
  }
  // The arm is one payload bit so that the bit count is honest; the tag
  // repeats it for readability of dumps.
  Bits bits{mix.arm == ArmTag::kL2};
  if (mix.arm == ArmTag::kL1) {
    const auto* is = std::get_if<IndexSign>(&mix.inner);
    if (is == nullptr) {
      return absl::InvalidArgumentError("l1 arm must carry an index-sign");
    }
    CLDP_ASSIGN_OR_RETURN(Bits inner,
                          EncodeIndexSign(*is, IndexDim(ctx, ArmTag::kL1)));
    bits.insert(bits.end(), inner.begin(), inner.end());
    return MakeFrame(FrameTag::kMixL1, bits);
  }
  const auto* ss = std::get_if<SparseSigned>(&mix.inner);
  if (ss == nullptr) {
    return absl::InvalidArgumentError("l2 arm must carry a sparse message");
  }
  if (ss->zero) return MakeFrame(FrameTag::kMixL2Zero, bits);
  CLDP_ASSIGN_OR_RETURN(Bits inner, EncodeSparse(*ss, ctx.dim));
  bits.insert(bits.end(), inner.begin(), inner.end());
  return MakeFrame(FrameTag::kMixL2, bits);
}

absl::StatusOr<MechanismMessage> DecodeFrame(
    std::span<const std::uint8_t> frame, const WireContext& ctx) {
  if (ctx.dim < 1) return absl::InvalidArgumentError("dimension must be >= 1");
  CLDP_ASSIGN_OR_RETURN(ParsedFrame parsed, ParseFrame(frame));
  const bool is_mix = parsed.tag == FrameTag::kMixL1 ||
                      parsed.tag == FrameTag::kMixL2 ||
                      parsed.tag == FrameTag::kMixL2Zero;
  if (is_mix != (ctx.family == MechanismFamily::kRp)) {
    return absl::InvalidArgumentError("frame tag does not match the family");
  }
  switch (parsed.tag) {
    case FrameTag::kIndexSign: {
      if (ctx.family == MechanismFamily::kR2) {
        return absl::InvalidArgumentError("r2 never sends index-sign frames");
      }
      CLDP_ASSIGN_OR_RETURN(IndexSign m,
                            DecodeIndexSign(parsed.payload, IndexDim(ctx)));
      return MechanismMessage{m};
    }
    case FrameTag::kSparseSigned:
    case FrameTag::kSparseZero: {
      if (ctx.family != MechanismFamily::kR2) {
        return absl::InvalidArgumentError("sparse frame for a non-r2 family");
      }
      if (parsed.tag == FrameTag::kSparseZero) {
        if (!parsed.payload.empty()) {
          return absl::InvalidArgumentError("zero frame with a payload");
        }
        return MechanismMessage{ZeroSparse(ctx.dim)};
      }
      CLDP_ASSIGN_OR_RETURN(SparseSigned m,
                            DecodeSparse(parsed.payload, ctx.dim));
      return MechanismMessage{m};
    }
    case FrameTag::kIndexSignBatch:
      return absl::InvalidArgumentError(
          "batch frames carry several messages; use DecodeIndexSignBatch");
    case FrameTag::kMixL1:
    case FrameTag::kMixL2:
    case FrameTag::kMixL2Zero: {
      if (parsed.payload.empty()) {
        return absl::InvalidArgumentError("mixed frame without an arm bit");
      }
      const bool l2 = parsed.payload[0];
      if (l2 != (parsed.tag != FrameTag::kMixL1)) {
        return absl::InvalidArgumentError("arm bit contradicts the frame tag");
      }
      const Bits rest = Slice(parsed.payload, 1);
      if (!l2) {
        CLDP_ASSIGN_OR_RETURN(IndexSign m,
                              DecodeIndexSign(rest, IndexDim(ctx, ArmTag::kL1)));
        return MechanismMessage{MixTagged{ArmTag::kL1, m}};
      }
      if (parsed.tag == FrameTag::kMixL2Zero) {
        if (!rest.empty()) {
          return absl::InvalidArgumentError("zero frame with a payload");
        }
        return MechanismMessage{MixTagged{ArmTag::kL2, ZeroSparse(ctx.dim)}};
      }
      CLDP_ASSIGN_OR_RETURN(SparseSigned m, DecodeSparse(rest, ctx.dim));
      return MechanismMessage{MixTagged{ArmTag::kL2, m}};
    }
  }
  return absl::InternalError("unreachable frame tag");
}

absl::StatusOr<std::vector<std::uint8_t>> EncodeIndexSignBatch(
    std::span<const IndexSign> msgs, std::uint64_t index_dim) {
  if (msgs.empty()) return absl::InvalidArgumentError("empty batch");
  const int b = IndexSignBits(index_dim);
  if (b >= 63) return absl::OutOfRangeError("index alphabet too large");
  std::vector<std::uint64_t> atoms;
  atoms.reserve(msgs.size());
  for (const IndexSign& m : msgs) {
    if (m.index >= index_dim) {
      return absl::OutOfRangeError(absl::StrFormat(
          "index %d out of range for dimension %d", m.index, index_dim));
    }
    atoms.push_back(m.Atom());
  }
  CLDP_ASSIGN_OR_RETURN(HistogramCode code,
                        HistogramPack(atoms, std::uint64_t{1} << b));
  return MakeFrame(FrameTag::kIndexSignBatch, HistogramToBits(code));
}

absl::StatusOr<std::vector<IndexSign>> DecodeIndexSignBatch(
    std::span<const std::uint8_t> frame, std::uint64_t s,
    std::uint64_t index_dim) {
  CLDP_ASSIGN_OR_RETURN(ParsedFrame parsed, ParseFrame(frame));
  if (parsed.tag != FrameTag::kIndexSignBatch) {
    return absl::InvalidArgumentError("not a batch frame");
  }
  const int b = IndexSignBits(index_dim);
  CLDP_ASSIGN_OR_RETURN(
      HistogramCode code,
      HistogramFromBits(parsed.payload, s, std::uint64_t{1} << b));
  CLDP_ASSIGN_OR_RETURN(std::vector<std::uint64_t> atoms,
                        HistogramUnpack(code));
  std::vector<IndexSign> out;
  out.reserve(atoms.size());
  for (std::uint64_t a : atoms) {
    IndexSign m = IndexSign::FromAtom(a);
    if (m.index >= index_dim) {
      return absl::OutOfRangeError("batch atom outside the index alphabet");
    }
    out.push_back(m);
  }
  return out;
}

absl::StatusOr<int> FramePayloadBits(std::span<const std::uint8_t> frame) {
  if (frame.size() < kHeaderBytes) {
    return absl::InvalidArgumentError("frame shorter than its header");
  }
  return (int{frame[1]} << 8) | frame[2];
}

absl::StatusOr<CommunicationCost> ExpectedBitsPerClient(
    const SamplingParams& params, int bits_per_message, std::int64_t rounds) {
  CLDP_RETURN_IF_ERROR(params.Validate());
  if (bits_per_message < 1 || bits_per_message > 62) {
    return absl::InvalidArgumentError("bits per message must be in [1, 62]");
  }
  if (rounds < 1) return absl::InvalidArgumentError("rounds must be >= 1");
  const std::uint64_t alphabet = std::uint64_t{1} << bits_per_message;
  const auto s = static_cast<std::uint64_t>(params.s);
  const double scale = static_cast<double>(rounds) * params.q1();
  CommunicationCost cost;
  cost.exact_bits_per_round =
      s == 1 ? bits_per_message : HistogramBitLength(s, alphabet);
  cost.expected_envelope_bits = scale * HistogramEnvelopeBits(s, alphabet);
  cost.expected_exact_bits = scale * cost.exact_bits_per_round;
  return cost;
}

}  // namespace cldp
