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

#include "cldp/mechanisms.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <type_traits>

#include "absl/strings/str_format.h"
#include "cldp/status_macros.h"

namespace cldp {
namespace {

double ClampProbability(double p) { return std::clamp(p, 0.0, 1.0); }

absl::Status CheckInBall(std::span<const double> x, const BallSpec& ball) {
  if (static_cast<int>(x.size()) != ball.dim) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "input has dimension %d, mechanism expects %d", x.size(), ball.dim));
  }
  if (!AllFinite(x)) {
    return absl::InvalidArgumentError("input has a non-finite entry");
  }
  const double norm = NormP(x, ball.p);
  if (norm > ball.radius * (1.0 + kExactTolerance)) {
    return absl::OutOfRangeError(absl::StrFormat(
        "input outside the l_%g ball: norm %.17g > radius %.17g (clip first)",
        ball.p, norm, ball.radius));
  }
  return absl::OkStatus();
}

// Probability of the + sign for a coordinate value v in [-a, a].
double PlusProbability(double v, double a, double epsilon0) {
  return ClampProbability(0.5 + 0.5 * (v / a) * std::tanh(0.5 * epsilon0));
}

absl::Status CheckIndex(std::uint32_t index, std::size_t limit) {
  if (index >= limit) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "message index %d outside alphabet of size %d", index, limit));
  }
  return absl::OkStatus();
}

Vec PadTo(std::span<const double> x, std::size_t n) {
  Vec out(n, 0.0);
  std::copy(x.begin(), x.end(), out.begin());
  return out;
}

}  // namespace

std::string_view FamilyName(MechanismFamily family) {
  switch (family) {
    case MechanismFamily::kR1:
      return "r1";
    case MechanismFamily::kR2:
      return "r2";
    case MechanismFamily::kRInf:
      return "rinf";
    case MechanismFamily::kRp:
      return "rp";
  }
  return "unknown";
}

absl::StatusOr<MechanismFamily> ParseFamily(std::string_view name) {
  if (name == "r1") return MechanismFamily::kR1;
  if (name == "r2") return MechanismFamily::kR2;
  if (name == "rinf") return MechanismFamily::kRInf;
  if (name == "rp") return MechanismFamily::kRp;
  return absl::InvalidArgumentError(
      absl::StrFormat("unknown mechanism '%s' (r1, r2, rinf, rp)", std::string(name)));
}

MechanismFamily FamilyForNorm(double p) {
  if (p == 1.0) return MechanismFamily::kR1;
  if (p == 2.0) return MechanismFamily::kR2;
  if (std::isinf(p)) return MechanismFamily::kRInf;
  return MechanismFamily::kRp;
}

absl::Status MechanismSpec::Validate(MechanismFamily family) const {
  CLDP_RETURN_IF_ERROR(ball.Validate());
  if (!(epsilon0 > 0.0) || !std::isfinite(epsilon0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "local privacy epsilon0 must be positive and finite, got %g",
        epsilon0));
  }
  switch (family) {
    case MechanismFamily::kR1:
      if (ball.p != 1.0) {
        return absl::InvalidArgumentError("R1 requires an l1 ball");
      }
      break;
    case MechanismFamily::kR2:
      if (ball.p != 2.0) {
        return absl::InvalidArgumentError("R2 requires an l2 ball");
      }
      break;
    case MechanismFamily::kRInf:
      if (!std::isinf(ball.p)) {
        return absl::InvalidArgumentError("RInf requires an l-inf ball");
      }
      break;
    case MechanismFamily::kRp:
      if (std::isinf(ball.p)) {
        return absl::InvalidArgumentError(
            "Rp requires a finite norm order; use RInf for l-inf");
      }
      if (!(mix_prob >= 0.0 && mix_prob <= 1.0)) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "mixture probability must lie in [0, 1], got %g", mix_prob));
      }
      break;
  }
  return absl::OkStatus();
}

double PrivacyRatio(double epsilon0) { return 1.0 / std::tanh(0.5 * epsilon0); }

double PrivRadius(int dim, double radius, double epsilon0) {
  const double d = dim;
  const double gamma_ratio =
      std::exp(std::lgamma(0.5 * (d + 1.0)) - std::lgamma(0.5 * d + 1.0));
  return radius * 0.5 * std::sqrt(std::numbers::pi) * d * gamma_ratio *
         PrivacyRatio(epsilon0);
}

// --- R1 -------------------------------------------------------------------

std::size_t R1PaddedDim(int dim) {
  return NextPowerOfTwo(static_cast<std::size_t>(dim));
}

absl::StatusOr<std::vector<double>> R1AtomProbabilities(
    std::span<const double> x, const MechanismSpec& spec) {
  CLDP_RETURN_IF_ERROR(spec.Validate(MechanismFamily::kR1));
  CLDP_RETURN_IF_ERROR(CheckInBall(x, spec.ball));
  const std::size_t n = R1PaddedDim(spec.ball.dim);
  CLDP_ASSIGN_OR_RETURN(Vec y, FwhtNormalized(PadTo(x, n)));
  const double root_n = std::sqrt(static_cast<double>(n));
  std::vector<double> probs(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    const double plus =
        PlusProbability(root_n * y[j], spec.ball.radius, spec.epsilon0);
    probs[IndexSign{static_cast<std::uint32_t>(j), +1}.Atom()] = plus / n;
    probs[IndexSign{static_cast<std::uint32_t>(j), -1}.Atom()] =
        (1.0 - plus) / n;
  }
  return probs;
}

absl::StatusOr<IndexSign> R1Encode(std::span<const double> x,
                                   const MechanismSpec& spec, Rng& rng) {
  CLDP_RETURN_IF_ERROR(spec.Validate(MechanismFamily::kR1));
  CLDP_RETURN_IF_ERROR(CheckInBall(x, spec.ball));
  const std::size_t n = R1PaddedDim(spec.ball.dim);
  const std::size_t j = UniformIndex(rng, n);
  // Only coordinate j of H x is needed.
  double hx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) hx += HadamardEntry(i, j) * x[i];
  // sqrt(n) * y_j = (H x)_j.
  const double plus = PlusProbability(hx, spec.ball.radius, spec.epsilon0);
  return IndexSign{static_cast<std::uint32_t>(j),
                   Bernoulli(rng, plus) ? +1 : -1};
}

absl::StatusOr<Vec> R1Decode(const IndexSign& msg, const MechanismSpec& spec) {
  CLDP_RETURN_IF_ERROR(spec.Validate(MechanismFamily::kR1));
  CLDP_RETURN_IF_ERROR(CheckIndex(msg.index, R1PaddedDim(spec.ball.dim)));
  const double scale =
      msg.sign * spec.ball.radius * PrivacyRatio(spec.epsilon0);
  Vec out(spec.ball.dim);
  for (int i = 0; i < spec.ball.dim; ++i) {
    out[i] = scale * HadamardEntry(static_cast<std::size_t>(i), msg.index);
  }
  return out;
}

// --- Priv / Quan / R2 ------------------------------------------------------

absl::StatusOr<Vec> Priv(std::span<const double> x, const MechanismSpec& spec,
                         Rng& rng) {
  CLDP_RETURN_IF_ERROR(spec.ball.Validate());
  if (spec.ball.p != 2.0) {
    return absl::InvalidArgumentError("Priv requires an l2 ball");
  }
  if (!(spec.epsilon0 > 0.0) || !std::isfinite(spec.epsilon0)) {
    return absl::InvalidArgumentError("epsilon0 must be positive and finite");
  }
  CLDP_RETURN_IF_ERROR(CheckInBall(x, spec.ball));
  const int d = spec.ball.dim;
  const double a = spec.ball.radius;

  // Direction x~ = +-a x/||x||; for x = 0 any direction works, both signs
  // are equally likely.
  const double norm = NormP(x, 2.0);
  Vec direction(d);
  if (norm > 0.0) {
    for (int i = 0; i < d; ++i) direction[i] = x[i] / norm;
  } else {
    for (double& v : direction) v = StandardNormal(rng);
  }
  const bool keep = Bernoulli(rng, ClampProbability(0.5 + 0.5 * norm / a));
  if (!keep) {
    for (double& v : direction) v = -v;
  }

  const bool same_side =
      Bernoulli(rng, std::exp(spec.epsilon0) / (std::exp(spec.epsilon0) + 1.0));
  const double m = PrivRadius(d, a, spec.epsilon0);
  Vec z(d);
  double z_norm = 0.0;
  do {
    for (double& v : z) v = StandardNormal(rng);
    z_norm = NormP(z, 2.0);
  } while (z_norm == 0.0);
  const double side = Dot(z, direction);
  const bool on_positive_side = side > 0.0;
  const double flip = (on_positive_side == same_side) ? 1.0 : -1.0;
  for (double& v : z) v = flip * m * v / z_norm;
  return z;
}

absl::StatusOr<SparseSigned> Quan(std::span<const double> x, double radius,
                                  Rng& rng) {
  if (!(radius > 0.0)) {
    return absl::InvalidArgumentError("Quan radius must be positive");
  }
  if (x.empty() || !AllFinite(x)) {
    return absl::InvalidArgumentError("Quan input must be finite, non-empty");
  }
  const std::size_t d = x.size();
  const double l2 = NormP(x, 2.0);
  if (l2 > radius * (1.0 + kExactTolerance)) {
    return absl::OutOfRangeError(absl::StrFormat(
        "Quan input l2 norm %.17g exceeds radius %.17g", l2, radius));
  }
  const double l1 = NormP(x, 1.0);
  SparseSigned msg;
  if (l1 == 0.0) {
    msg.zero = true;
    msg.samples.assign(d, IndexSign{0, +1});
    return msg;
  }
  const double root_d = std::sqrt(static_cast<double>(d));
  const bool keep =
      Bernoulli(rng, ClampProbability(0.5 + 0.5 * l1 / (radius * root_d)));
  const int flip = keep ? 1 : -1;

  std::vector<double> cdf(d);
  double acc = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    acc += std::abs(x[i]) / l1;
    cdf[i] = acc;
  }
  msg.samples.reserve(d);
  for (std::size_t s = 0; s < d; ++s) {
    const double u = UniformUnit(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t coord = static_cast<std::size_t>(it - cdf.begin());
    if (coord >= d) coord = d - 1;
    const int sign = (x[coord] > 0.0 ? 1 : -1) * flip;
    msg.samples.push_back(IndexSign{static_cast<std::uint32_t>(coord), sign});
  }
  return msg;
}

absl::StatusOr<Vec> QuanDecode(const SparseSigned& msg, double radius,
                               int dim) {
  if (static_cast<int>(msg.samples.size()) != dim) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "sparse message has %d samples, expected %d", msg.samples.size(),
        dim));
  }
  Vec out(dim, 0.0);
  if (msg.zero) return out;
  const double weight = radius / std::sqrt(static_cast<double>(dim));
  for (const IndexSign& s : msg.samples) {
    CLDP_RETURN_IF_ERROR(CheckIndex(s.index, static_cast<std::size_t>(dim)));
    out[s.index] += s.sign * weight;
  }
  return out;
}

absl::StatusOr<SparseSigned> R2Encode(std::span<const double> x,
                                      const MechanismSpec& spec, Rng& rng) {
  CLDP_RETURN_IF_ERROR(spec.Validate(MechanismFamily::kR2));
  CLDP_ASSIGN_OR_RETURN(Vec y, Priv(x, spec, rng));
  const double m = PrivRadius(spec.ball.dim, spec.ball.radius, spec.epsilon0);
  return Quan(y, m, rng);
}

absl::StatusOr<Vec> R2Decode(const SparseSigned& msg,
                             const MechanismSpec& spec) {
  CLDP_RETURN_IF_ERROR(spec.Validate(MechanismFamily::kR2));
  const double m = PrivRadius(spec.ball.dim, spec.ball.radius, spec.epsilon0);
  return QuanDecode(msg, m, spec.ball.dim);
}

// --- R-infinity ------------------------------------------------------------

absl::StatusOr<std::vector<double>> RInfAtomProbabilities(
    std::span<const double> x, const MechanismSpec& spec) {
  CLDP_RETURN_IF_ERROR(spec.Validate(MechanismFamily::kRInf));
  CLDP_RETURN_IF_ERROR(CheckInBall(x, spec.ball));
  const std::size_t d = x.size();
  std::vector<double> probs(2 * d);
  for (std::size_t j = 0; j < d; ++j) {
    const double plus = PlusProbability(x[j], spec.ball.radius, spec.epsilon0);
    probs[IndexSign{static_cast<std::uint32_t>(j), +1}.Atom()] = plus / d;
    probs[IndexSign{static_cast<std::uint32_t>(j), -1}.Atom()] =
        (1.0 - plus) / d;
  }
  return probs;
}

absl::StatusOr<IndexSign> RInfEncode(std::span<const double> x,
                                     const MechanismSpec& spec, Rng& rng) {
  CLDP_RETURN_IF_ERROR(spec.Validate(MechanismFamily::kRInf));
  CLDP_RETURN_IF_ERROR(CheckInBall(x, spec.ball));
  const std::size_t j = UniformIndex(rng, x.size());
  const double plus = PlusProbability(x[j], spec.ball.radius, spec.epsilon0);
  return IndexSign{static_cast<std::uint32_t>(j),
                   Bernoulli(rng, plus) ? +1 : -1};
}

absl::StatusOr<Vec> RInfDecode(const IndexSign& msg,
                               const MechanismSpec& spec) {
  CLDP_RETURN_IF_ERROR(spec.Validate(MechanismFamily::kRInf));
  const int d = spec.ball.dim;
  CLDP_RETURN_IF_ERROR(CheckIndex(msg.index, static_cast<std::size_t>(d)));
  Vec out(d, 0.0);
  out[msg.index] =
      msg.sign * spec.ball.radius * d * PrivacyRatio(spec.epsilon0);
  return out;
}

// --- Rp --------------------------------------------------------------------

MechanismSpec RpL1ArmSpec(const MechanismSpec& spec) {
  const double d = spec.ball.dim;
  MechanismSpec arm = spec;
  arm.ball.p = 1.0;
  arm.ball.radius = spec.ball.radius * std::pow(d, 1.0 - 1.0 / spec.ball.p);
  return arm;
}

MechanismSpec RpL2ArmSpec(const MechanismSpec& spec) {
  const double d = spec.ball.dim;
  MechanismSpec arm = spec;
  arm.ball.p = 2.0;
  arm.ball.radius =
      spec.ball.radius * std::max(std::pow(d, 0.5 - 1.0 / spec.ball.p), 1.0);
  return arm;
}

absl::StatusOr<MixTagged> RpEncode(std::span<const double> x,
                                   const MechanismSpec& spec, Rng& rng) {
  CLDP_RETURN_IF_ERROR(spec.Validate(MechanismFamily::kRp));
  CLDP_RETURN_IF_ERROR(CheckInBall(x, spec.ball));
  // Norm inequalities put x inside the inflated arm balls; the tolerance in
  // CheckInBall absorbs rounding of the inflated radius.
  if (Bernoulli(rng, spec.mix_prob)) {
    CLDP_ASSIGN_OR_RETURN(IndexSign inner, R1Encode(x, RpL1ArmSpec(spec), rng));
    return MixTagged{ArmTag::kL1, inner};
  }
  CLDP_ASSIGN_OR_RETURN(SparseSigned inner,
                        R2Encode(x, RpL2ArmSpec(spec), rng));
  return MixTagged{ArmTag::kL2, std::move(inner)};
}

absl::StatusOr<Vec> RpDecode(const MixTagged& msg, const MechanismSpec& spec) {
  CLDP_RETURN_IF_ERROR(spec.Validate(MechanismFamily::kRp));
  if (msg.arm == ArmTag::kL1) {
    const auto* inner = std::get_if<IndexSign>(&msg.inner);
    if (inner == nullptr) {
      return absl::InvalidArgumentError(
          "mixture message tagged l1 does not carry an index-sign payload");
    }
    return R1Decode(*inner, RpL1ArmSpec(spec));
  }
  if (msg.arm == ArmTag::kL2) {
    const auto* inner = std::get_if<SparseSigned>(&msg.inner);
    if (inner == nullptr) {
      return absl::InvalidArgumentError(
          "mixture message tagged l2 does not carry a sparse payload");
    }
    return R2Decode(*inner, RpL2ArmSpec(spec));
  }
  return absl::InvalidArgumentError("unknown mixture arm tag");
}

// --- Mechanism --------------------------------------------------------------

absl::StatusOr<Mechanism> Mechanism::Create(MechanismFamily family,
                                            const MechanismSpec& spec) {
  CLDP_RETURN_IF_ERROR(spec.Validate(family));
  return Mechanism(family, spec);
}

absl::StatusOr<MechanismMessage> Mechanism::Encode(std::span<const double> x,
                                                   Rng& rng) const {
  switch (family_) {
    case MechanismFamily::kR1: {
      CLDP_ASSIGN_OR_RETURN(IndexSign m, R1Encode(x, spec_, rng));
      return MechanismMessage{m};
    }
    case MechanismFamily::kR2: {
      CLDP_ASSIGN_OR_RETURN(SparseSigned m, R2Encode(x, spec_, rng));
      return MechanismMessage{std::move(m)};
    }
    case MechanismFamily::kRInf: {
      CLDP_ASSIGN_OR_RETURN(IndexSign m, RInfEncode(x, spec_, rng));
      return MechanismMessage{m};
    }
    case MechanismFamily::kRp: {
      CLDP_ASSIGN_OR_RETURN(MixTagged m, RpEncode(x, spec_, rng));
      return MechanismMessage{std::move(m)};
    }
  }
  return absl::InternalError("unhandled mechanism family");
}

absl::StatusOr<Vec> Mechanism::Decode(const MechanismMessage& msg) const {
  switch (family_) {
    case MechanismFamily::kR1:
      if (const auto* m = std::get_if<IndexSign>(&msg)) {
        return R1Decode(*m, spec_);
      }
      break;
    case MechanismFamily::kR2:
      if (const auto* m = std::get_if<SparseSigned>(&msg)) {
        return R2Decode(*m, spec_);
      }
      break;
    case MechanismFamily::kRInf:
      if (const auto* m = std::get_if<IndexSign>(&msg)) {
        return RInfDecode(*m, spec_);
      }
      break;
    case MechanismFamily::kRp:
      if (const auto* m = std::get_if<MixTagged>(&msg)) {
        return RpDecode(*m, spec_);
      }
      break;
  }
  return absl::InvalidArgumentError(absl::StrFormat(
      "message variant does not match mechanism %s", std::string(FamilyName(family_))));
}

absl::StatusOr<Vec> Mechanism::MeanEstimate(
    std::span<const MechanismMessage> messages) const {
  if (messages.empty()) {
    return absl::InvalidArgumentError("mean estimate of an empty message list");
  }
  Vec sum(dim(), 0.0);
  for (const MechanismMessage& msg : messages) {
    CLDP_ASSIGN_OR_RETURN(Vec v, Decode(msg));
    for (int i = 0; i < dim(); ++i) sum[i] += v[i];
  }
  const double inv = 1.0 / static_cast<double>(messages.size());
  for (double& v : sum) v *= inv;
  return sum;
}

}  // namespace cldp
