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

#include "cldp/fedsim.h"

#include <cmath>
#include <numeric>
#include <utility>

#include "absl/strings/str_format.h"
#include "cldp/bounds.h"
#include "cldp/status_macros.h"

namespace cldp {
namespace {

constexpr std::uint64_t kServerStream = ~std::uint64_t{0};
constexpr int kFloatBits = 64;

std::vector<std::int64_t> SampleSubset(std::int64_t n, std::int64_t k,
                                       Rng& rng) {
  std::vector<std::int64_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::int64_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::int64_t>(
                           UniformIndex(rng, static_cast<std::uint64_t>(n - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

bool EmitsIndexSign(MechanismFamily family) {
  return family == MechanismFamily::kR1 || family == MechanismFamily::kRInf;
}

// Expected payload bits of one round summed over all clients.
double ExpectedRoundBits(const TrainConfig& cfg, const Mechanism* mech,
                         int dim) {
  const double k = static_cast<double>(cfg.params.k);
  const double s = static_cast<double>(cfg.params.s);
  if (mech == nullptr) return k * s * kFloatBits * dim;
  const WireContext ctx{mech->family(), dim};
  const auto sparse = [&] {
    return HistogramEnvelopeBits(static_cast<std::uint64_t>(dim),
                                 2 * static_cast<std::uint64_t>(dim));
  };
  switch (mech->family()) {
    case MechanismFamily::kR1:
    case MechanismFamily::kRInf: {
      const int b = IndexSignBits(IndexDim(ctx));
      auto cost = ExpectedBitsPerClient(cfg.params, b, 1);
      return cost.ok() ? static_cast<double>(cfg.params.m) *
                             cost->expected_envelope_bits
                       : 0.0;
    }
    case MechanismFamily::kR2:
      return k * s * sparse();
    case MechanismFamily::kRp: {
      const double pbar = cfg.mix_prob;
      const double l1 = IndexSignBits(IndexDim(ctx, ArmTag::kL1));
      return k * s * (1.0 + pbar * l1 + (1.0 - pbar) * sparse());
    }
  }
  return 0.0;
}

}  // namespace

std::vector<std::int64_t> SampleClients(std::int64_t m, std::int64_t k,
                                        Rng& rng) {
  return SampleSubset(m, k, rng);
}

std::vector<std::int64_t> SampleData(std::int64_t r, std::int64_t s,
                                     Rng& rng) {
  return SampleSubset(r, s, rng);
}

absl::Status TrainConfig::Validate() const {
  CLDP_RETURN_IF_ERROR(params.Validate());
  if (rounds < 1) return absl::InvalidArgumentError("rounds must be >= 1");
  if (!(epsilon0 > 0.0)) {
    return absl::InvalidArgumentError("epsilon0 must be positive (or inf)");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError("delta must lie in (0, 1)");
  }
  if (!IsValidNormOrder(p)) {
    return absl::InvalidArgumentError("gradient norm order must be in [1, inf]");
  }
  if (!(clip > 0.0) || !std::isfinite(clip)) {
    return absl::InvalidArgumentError("clip radius C must be positive");
  }
  if (!(diameter > 0.0) || !std::isfinite(diameter)) {
    return absl::InvalidArgumentError("diameter D must be positive");
  }
  if (!(mix_prob >= 0.0 && mix_prob <= 1.0)) {
    return absl::InvalidArgumentError("mix probability must lie in [0, 1]");
  }
  return absl::OkStatus();
}

absl::StatusOr<Mechanism> GradientMechanism(const TrainConfig& cfg, int dim) {
  MechanismSpec spec;
  spec.ball = BallSpec{cfg.p, cfg.clip, dim};
  spec.epsilon0 = cfg.epsilon0;
  spec.mix_prob = cfg.mix_prob;
  return Mechanism::Create(FamilyForNorm(cfg.p), spec);
}

absl::StatusOr<LocalOutput> LocalRound(const ClientDataset& client,
                                       std::span<const double> theta,
                                       const TrainConfig& cfg,
                                       const Mechanism* mechanism, Rng& rng) {
  const auto r = static_cast<std::int64_t>(client.points.size());
  if (cfg.params.s > r) {
    return absl::InvalidArgumentError("client holds fewer than s points");
  }
  LocalOutput out;
  const std::vector<std::int64_t> picks = SampleData(r, cfg.params.s, rng);
  for (std::int64_t j : picks) {
    CLDP_ASSIGN_OR_RETURN(LossAndGradient lg,
                          EvaluateTask(cfg.task, theta, client.points[j]));
    if (NormP(lg.gradient, cfg.p) > cfg.clip * (1.0 + kExactTolerance)) {
      ++out.clipped;
    }
    CLDP_ASSIGN_OR_RETURN(Vec g, Clip(lg.gradient, cfg.p, cfg.clip));
    if (mechanism == nullptr) {
      out.plain.push_back(std::move(g));
      out.bits += kFloatBits * static_cast<std::int64_t>(theta.size());
      continue;
    }
    CLDP_ASSIGN_OR_RETURN(MechanismMessage msg, mechanism->Encode(g, rng));
    out.messages.push_back(std::move(msg));
  }
  if (mechanism == nullptr) return out;

  const WireContext ctx{mechanism->family(), mechanism->dim()};
  if (EmitsIndexSign(mechanism->family()) && out.messages.size() > 1) {
    std::vector<IndexSign> batch;
    for (const MechanismMessage& m : out.messages) {
      batch.push_back(std::get<IndexSign>(m));
    }
    CLDP_ASSIGN_OR_RETURN(std::vector<std::uint8_t> frame,
                          EncodeIndexSignBatch(batch, IndexDim(ctx)));
    CLDP_ASSIGN_OR_RETURN(int bits, FramePayloadBits(frame));
    out.bits += bits;
    out.frames.push_back(std::move(frame));
    return out;
  }
  for (const MechanismMessage& m : out.messages) {
    CLDP_ASSIGN_OR_RETURN(std::vector<std::uint8_t> frame, EncodeFrame(m, ctx));
    CLDP_ASSIGN_OR_RETURN(int bits, FramePayloadBits(frame));
    out.bits += bits;
    out.frames.push_back(std::move(frame));
  }
  return out;
}

absl::StatusOr<Vec> Aggregate(std::span<const MechanismMessage> messages,
                              const Mechanism& mechanism,
                              std::size_t expected_count) {
  if (messages.size() != expected_count) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "aggregate expected %d messages, received %d", expected_count,
        messages.size()));
  }
  return mechanism.MeanEstimate(messages);
}

absl::StatusOr<double> StepScale(const TrainConfig& cfg, int dim) {
  CLDP_ASSIGN_OR_RETURN(double g2,
                        GSquared(cfg.clip, dim, cfg.p, cfg.params.q(),
                                 cfg.params.n(), cfg.epsilon0));
  return std::sqrt(g2);
}

absl::StatusOr<TrainResult> Train(const TrainConfig& cfg, const Dataset& data) {
  CLDP_RETURN_IF_ERROR(cfg.Validate());
  CLDP_RETURN_IF_ERROR(data.Validate());
  if (data.num_clients() != cfg.params.m ||
      data.points_per_client() != cfg.params.r) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "dataset has m=%d, r=%d but the config expects m=%d, r=%d",
        data.num_clients(), data.points_per_client(), cfg.params.m,
        cfg.params.r));
  }
  const int dim = data.dim;

  TrainResult result;
  if (cfg.Private() && cfg.accountant) {
    CLDP_ASSIGN_OR_RETURN(result.budget,
                          EndToEnd(cfg.epsilon0, cfg.delta, cfg.rounds,
                                   cfg.params, *cfg.accountant));
  } else {
    result.budget.epsilon0 = cfg.epsilon0;
    result.budget.epsilon = kInfinity;
    result.budget.delta = cfg.delta;
    result.budget.rounds = cfg.rounds;
    result.budget.guarantee = false;
    result.budget.shuffle_bound = "none";
    result.budget.warnings.push_back(
        cfg.Private() ? "no accountant selected: no privacy guarantee reported"
                      : "privatization disabled: no privacy guarantee");
  }
  const bool accounted = cfg.Private() && cfg.accountant.has_value();

  std::optional<Mechanism> mechanism;
  if (cfg.Private()) {
    CLDP_ASSIGN_OR_RETURN(Mechanism m, GradientMechanism(cfg, dim));
    mechanism.emplace(std::move(m));
  }
  const Mechanism* mech = mechanism ? &*mechanism : nullptr;
  CLDP_ASSIGN_OR_RETURN(double g_scale, StepScale(cfg, dim));
  const double expected_bits = ExpectedRoundBits(cfg, mech, dim);
  const double radius = cfg.diameter / 2.0;
  const Vec center(dim, 0.0);
  const std::size_t batch = static_cast<std::size_t>(cfg.params.batch());

  Rng server(DeriveSeed(cfg.seed, {kServerStream}));
  Vec theta(dim, 0.0);
  result.traces.reserve(cfg.rounds);
  for (std::int64_t t = 1; t <= cfg.rounds; ++t) {
    RoundTrace trace;
    trace.t = t;
    trace.clients = SampleClients(cfg.params.m, cfg.params.k, server);
    trace.expected_bits = expected_bits;
    if (cfg.track_loss) trace.loss_before = FullLoss(cfg.task, theta, data);

    std::vector<MechanismMessage> pooled;
    std::vector<std::vector<std::uint8_t>> frames;
    std::vector<Vec> plain;
    for (std::int64_t id : trace.clients) {
      Rng client_rng(DeriveSeed(cfg.seed, {static_cast<std::uint64_t>(id),
                                           static_cast<std::uint64_t>(t)}));
      CLDP_ASSIGN_OR_RETURN(
          LocalOutput local,
          LocalRound(data.clients[id], theta, cfg, mech, client_rng));
      trace.exact_bits += local.bits;
      result.clipped += local.clipped;
      result.gradients += cfg.params.s;
      for (auto& m : local.messages) pooled.push_back(std::move(m));
      for (auto& f : local.frames) frames.push_back(std::move(f));
      for (auto& v : local.plain) plain.push_back(std::move(v));
    }

    Vec g;
    if (mech == nullptr) {
      Shuffle(plain, server);
      g.assign(dim, 0.0);
      for (const Vec& v : plain) {
        for (int j = 0; j < dim; ++j) g[j] += v[j];
      }
      for (double& v : g) v /= static_cast<double>(plain.size());
    } else {
      if (cfg.wire_roundtrip) {
        Shuffle(frames, server);
        const WireContext ctx{mech->family(), dim};
        std::vector<MechanismMessage> received;
        for (const auto& f : frames) {
          if (!f.empty() &&
              f[0] == static_cast<std::uint8_t>(FrameTag::kIndexSignBatch)) {
            CLDP_ASSIGN_OR_RETURN(
                std::vector<IndexSign> atoms,
                DecodeIndexSignBatch(f, static_cast<std::uint64_t>(cfg.params.s),
                                     IndexDim(ctx)));
            for (const IndexSign& a : atoms) received.push_back(a);
          } else {
            CLDP_ASSIGN_OR_RETURN(MechanismMessage m, DecodeFrame(f, ctx));
            received.push_back(std::move(m));
          }
        }
        pooled = std::move(received);
      } else {
        Shuffle(pooled, server);
      }
      CLDP_ASSIGN_OR_RETURN(g, Aggregate(pooled, *mech, batch));
    }
    trace.grad_norm = NormP(g, 2.0);

    const double eta = cfg.diameter / (g_scale * std::sqrt(static_cast<double>(t)));
    for (int j = 0; j < dim; ++j) theta[j] -= eta * g[j];
    CLDP_ASSIGN_OR_RETURN(theta, ProjectL2Ball(theta, center, radius));
    if (cfg.track_loss) trace.loss_after = FullLoss(cfg.task, theta, data);

    if (accounted) {
      CLDP_ASSIGN_OR_RETURN(
          PrivacyPair so_far,
          StrongComposition(result.budget.round_epsilon,
                            result.budget.round_delta, t,
                            result.budget.composition_delta));
      trace.epsilon_so_far = so_far.epsilon;
    } else {
      trace.epsilon_so_far = kInfinity;
    }
    result.traces.push_back(std::move(trace));
  }
  result.theta = std::move(theta);

  if (result.gradients > 0 &&
      static_cast<double>(result.clipped) >
          0.01 * static_cast<double>(result.gradients)) {
    result.warnings.push_back(absl::StrFormat(
        "%.2f%% of gradients were clipped; clipped stochastic gradients may be "
        "biased",
        100.0 * static_cast<double>(result.clipped) /
            static_cast<double>(result.gradients)));
  }
  for (const std::string& w : result.budget.warnings) {
    result.warnings.push_back(w);
  }
  return result;
}

}  // namespace cldp
