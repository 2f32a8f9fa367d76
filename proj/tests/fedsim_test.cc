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

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "cldp/dataset.h"
#include "cldp/mechanisms.h"
#include "cldp/rng.h"
#include "cldp/tasks.h"
#include "gtest/gtest.h"

namespace cldp {
namespace {

TrainConfig SmallConfig(double p = 2.0) {
  TrainConfig cfg;
  cfg.params = SamplingParams{20, 5, 4, 1};
  cfg.rounds = 10;
  cfg.epsilon0 = 2.0;
  cfg.p = p;
  cfg.clip = 1.0;
  cfg.diameter = 4.0;
  cfg.accountant.reset();
  cfg.seed = 3;
  return cfg;
}

TEST(SamplingTest, FullAndPartial) {
  Rng rng(1);
  const auto all = SampleClients(7, 7, rng);
  EXPECT_EQ(all, (std::vector<std::int64_t>{0, 1, 2, 3, 4, 5, 6}));
  for (int trial = 0; trial < 100; ++trial) {
    const auto some = SampleClients(50, 9, rng);
    EXPECT_EQ(some.size(), 9u);
    EXPECT_TRUE(std::is_sorted(some.begin(), some.end()));
    EXPECT_EQ(std::set<std::int64_t>(some.begin(), some.end()).size(), 9u);
    EXPECT_GE(some.front(), 0);
    EXPECT_LT(some.back(), 50);
  }
}

TEST(SamplingTest, InclusionFrequency) {
  Rng rng(2);
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const auto picked = SampleData(10, 3, rng);
    hits += std::binary_search(picked.begin(), picked.end(), 0);
  }
  EXPECT_NEAR(hits / static_cast<double>(n), 0.3, 5 * std::sqrt(0.21 / n));
}

TEST(ShuffleTest, PreservesMultisetAndIsUniform) {
  Rng rng(3);
  std::vector<int> single = {42};
  Shuffle(single, rng);
  EXPECT_EQ(single, std::vector<int>{42});

  std::map<std::vector<int>, int> counts;
  const int n = 60000;
  for (int i = 0; i < n; ++i) {
    std::vector<int> v = {0, 1, 2};
    Shuffle(v, rng);
    ++counts[v];
  }
  ASSERT_EQ(counts.size(), 6u);
  for (const auto& [perm, c] : counts) {
    EXPECT_NEAR(c / static_cast<double>(n), 1.0 / 6,
                5 * std::sqrt(5.0 / 36 / n));
  }
}

TEST(AggregateTest, IdenticalMessagesAndOrder) {
  MechanismSpec spec;
  spec.ball = BallSpec{kInfinity, 1.0, 3};
  spec.epsilon0 = 1.0;
  const auto mech = Mechanism::Create(MechanismFamily::kRInf, spec).value();
  const MechanismMessage m = IndexSign{1, -1};
  const std::vector<MechanismMessage> same(5, m);
  const Vec avg = Aggregate(same, mech, 5).value();
  const Vec one = mech.Decode(m).value();
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(avg[i], one[i], 1e-14);
  EXPECT_FALSE(Aggregate(same, mech, 4).ok());

  std::vector<MechanismMessage> mixed = {IndexSign{0, 1}, IndexSign{2, -1},
                                         IndexSign{1, 1}, IndexSign{0, -1}};
  const Vec a = Aggregate(mixed, mech, 4).value();
  std::reverse(mixed.begin(), mixed.end());
  const Vec b = Aggregate(mixed, mech, 4).value();
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], 1e-15);
}

TEST(LocalRoundTest, OneMessagePerSample) {
  const Dataset data = GenerateSynthetic({20, 4, 6, 2.0, 1});
  TrainConfig cfg = SmallConfig(1.0);
  const auto mech = GradientMechanism(cfg, 6).value();
  Rng rng(1);
  const Vec theta(6, 0.1);
  const LocalOutput out =
      LocalRound(data.clients[0], theta, cfg, &mech, rng).value();
  EXPECT_EQ(out.messages.size(), 1u);
  EXPECT_EQ(out.frames.size(), 1u);
  EXPECT_EQ(out.bits, IndexSignBits(8));

  cfg.params.s = 3;
  const LocalOutput batch =
      LocalRound(data.clients[0], theta, cfg, &mech, rng).value();
  EXPECT_EQ(batch.messages.size(), 3u);
  EXPECT_EQ(batch.frames.size(), 1u);
  EXPECT_EQ(batch.bits, HistogramBitLength(3, 16));

  cfg.params.s = 5;
  EXPECT_FALSE(LocalRound(data.clients[0], theta, cfg, &mech, rng).ok());
}

TEST(LocalRoundTest, DecodedMessageIsUnbiasedForClippedGradient) {
  // One point per client so the sampled gradient is fixed.
  const Dataset data = GenerateSynthetic({1, 1, 4, 2.0, 5});
  TrainConfig cfg = SmallConfig(2.0);
  cfg.params = SamplingParams{1, 1, 1, 1};
  cfg.clip = 0.5;
  const auto mech = GradientMechanism(cfg, 4).value();
  const Vec theta = {0.3, -0.1, 0.2, 0.0};
  const auto lg =
      EvaluateTask(cfg.task, theta, data.clients[0].points[0]).value();
  const Vec target = Clip(lg.gradient, 2.0, 0.5).value();
  Rng rng(9);
  const int n = 100000;
  Vec sum(4, 0.0), sum_sq(4, 0.0);
  for (int i = 0; i < n; ++i) {
    const LocalOutput out =
        LocalRound(data.clients[0], theta, cfg, &mech, rng).value();
    const Vec y = mech.Decode(out.messages[0]).value();
    for (int j = 0; j < 4; ++j) {
      sum[j] += y[j];
      sum_sq[j] += y[j] * y[j];
    }
  }
  for (int j = 0; j < 4; ++j) {
    const double mean = sum[j] / n;
    const double se = std::sqrt((sum_sq[j] / n - mean * mean) / n);
    EXPECT_NEAR(mean, target[j], 5 * se);
  }
}

TEST(TrainTest, ZeroGradientLeavesParameterAtOrigin) {
  Dataset data = GenerateSynthetic({20, 4, 3, 2.0, 1});
  // Zero features make every gradient zero; the mechanism output is then pure
  // noise around zero, and without privatization nothing moves.
  for (auto& c : data.clients) {
    for (auto& p : c.points) p.features.assign(3, 0.0);
  }
  TrainConfig cfg = SmallConfig();
  cfg.epsilon0 = kInfinity;
  cfg.rounds = 1;
  const TrainResult res = Train(cfg, data).value();
  EXPECT_EQ(res.theta, Vec(3, 0.0));
  ASSERT_EQ(res.traces.size(), 1u);
  EXPECT_EQ(res.traces[0].clients.size(), 5u);
}

TEST(TrainTest, SameSeedSameRun) {
  const Dataset data = GenerateSynthetic({20, 4, 5, 2.0, 1});
  for (double p : {1.0, 2.0, kInfinity, 3.0}) {
    TrainConfig cfg = SmallConfig(p);
    cfg.mix_prob = 0.5;
    const TrainResult a = Train(cfg, data).value();
    const TrainResult b = Train(cfg, data).value();
    EXPECT_EQ(a.theta, b.theta);
    for (std::size_t t = 0; t < a.traces.size(); ++t) {
      EXPECT_EQ(a.traces[t].clients, b.traces[t].clients);
      EXPECT_EQ(a.traces[t].exact_bits, b.traces[t].exact_bits);
      EXPECT_EQ(a.traces[t].loss_after, b.traces[t].loss_after);
    }
    cfg.seed = 4;
    EXPECT_NE(Train(cfg, data)->theta, a.theta);
  }
}

TEST(TrainTest, WireRoundTripMatchesDirectPath) {
  const Dataset data = GenerateSynthetic({20, 4, 5, 2.0, 1});
  for (double p : {1.0, 2.0, kInfinity, 3.0}) {
    TrainConfig cfg = SmallConfig(p);
    cfg.mix_prob = 0.5;
    const TrainResult direct = Train(cfg, data).value();
    cfg.wire_roundtrip = true;
    const TrainResult wire = Train(cfg, data).value();
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(direct.theta[j], wire.theta[j], 1e-12);
  }
}

TEST(TrainTest, ExactBitsPerRound) {
  const Dataset data = GenerateSynthetic({20, 4, 5, 2.0, 1});
  TrainConfig cfg = SmallConfig(1.0);
  const TrainResult res = Train(cfg, data).value();
  for (const RoundTrace& t : res.traces) {
    EXPECT_EQ(t.exact_bits, 5 * IndexSignBits(8));
  }
  cfg.epsilon0 = kInfinity;
  const TrainResult plain = Train(cfg, data).value();
  EXPECT_EQ(plain.traces[0].exact_bits, 5 * 64 * 5);
}

TEST(TrainTest, IteratesStayInConstraintSet) {
  const Dataset data = GenerateSynthetic({20, 4, 5, 4.0, 1});
  TrainConfig cfg = SmallConfig(kInfinity);
  cfg.diameter = 0.5;
  cfg.rounds = 50;
  const TrainResult res = Train(cfg, data).value();
  EXPECT_LE(NormP(res.theta, 2.0), 0.25 + 1e-12);
}

TEST(TrainTest, AccountantPopulatesBudget) {
  const Dataset data = GenerateSynthetic({2000, 2, 3, 2.0, 1});
  TrainConfig cfg;
  cfg.params = SamplingParams{2000, 1000, 2, 1};
  cfg.rounds = 5;
  cfg.epsilon0 = 0.4;
  cfg.p = 1.0;
  cfg.track_loss = false;
  const TrainResult res = Train(cfg, data).value();
  EXPECT_TRUE(res.budget.guarantee);
  EXPECT_GT(res.budget.epsilon, 0.0);
  EXPECT_NEAR(res.traces.back().epsilon_so_far, res.budget.epsilon,
              1e-12 * res.budget.epsilon);
  EXPECT_LT(res.traces.front().epsilon_so_far, res.traces.back().epsilon_so_far);

  cfg.epsilon0 = 0.6;
  EXPECT_EQ(Train(cfg, data).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST(TrainTest, ClippingWarning) {
  const Dataset data = GenerateSynthetic({20, 4, 5, 2.0, 1});
  TrainConfig cfg = SmallConfig(2.0);
  cfg.clip = 0.01;
  const TrainResult res = Train(cfg, data).value();
  EXPECT_GT(res.clipped, 0);
  const bool warned =
      std::any_of(res.warnings.begin(), res.warnings.end(),
                  [](const std::string& w) {
                    return w.find("clipped") != std::string::npos;
                  });
  EXPECT_TRUE(warned);
}

TEST(TrainTest, RejectsShapeMismatch) {
  const Dataset data = GenerateSynthetic({10, 4, 5, 2.0, 1});
  EXPECT_FALSE(Train(SmallConfig(), data).ok());
  TrainConfig bad = SmallConfig();
  bad.clip = -1;
  EXPECT_FALSE(bad.Validate().ok());
}

}  // namespace
}  // namespace cldp
