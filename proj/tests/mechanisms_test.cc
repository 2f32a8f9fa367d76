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

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "cldp/linalg.h"
#include "cldp/message.h"
#include "cldp/rng.h"
#include "gtest/gtest.h"

namespace cldp {
namespace {

constexpr double kLn3 = 1.0986122886681098;

MechanismSpec Spec(double p, double radius, int dim, double epsilon0,
                   double mix_prob = 0.0) {
  MechanismSpec spec;
  spec.ball = BallSpec{p, radius, dim};
  spec.epsilon0 = epsilon0;
  spec.mix_prob = mix_prob;
  return spec;
}

// Uniform direction scaled to a random fraction of the ball radius.
Vec RandomInBall(std::mt19937_64& gen, int dim, double p, double radius) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec x(dim);
  for (double& v : x) v = normal(gen);
  const double norm = NormP(x, p);
  const double target = radius * unit(gen);
  for (double& v : x) v *= target / norm;
  return x;
}

// E|u_1| for u uniform on the unit sphere in R^d, from the marginal density
// of one coordinate, integrated numerically in the angle t = sin(phi).
double MeanAbsCoordinate(int d) {
  if (d == 1) return 1.0;
  const int steps = 200000;
  const double h = 0.5 * std::numbers::pi / steps;
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double phi = i * h;
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double c = std::pow(std::cos(phi), d - 2);
    num += w * std::sin(phi) * c;
    den += w * c;
  }
  return num / den;
}

TEST(PrivacyRatioTest, KnownValues) {
  EXPECT_NEAR(PrivacyRatio(kLn3), 2.0, 1e-15);
  EXPECT_NEAR(PrivacyRatio(1.0), (std::exp(1.0) + 1) / (std::exp(1.0) - 1),
              1e-15);
}

TEST(R1Test, DimensionOneZeroInputIsFairCoin) {
  const auto spec = Spec(1.0, 1.0, 1, 1.0);
  const auto probs = R1AtomProbabilities(Vec{0.0}, spec).value();
  ASSERT_EQ(probs.size(), 2u);
  EXPECT_DOUBLE_EQ(probs[0], 0.5);
  EXPECT_DOUBLE_EQ(probs[1], 0.5);
}

TEST(R1Test, DimensionOneVertexAtLn3) {
  const auto spec = Spec(1.0, 1.0, 1, kLn3);
  const auto probs = R1AtomProbabilities(Vec{1.0}, spec).value();
  EXPECT_NEAR(probs[(IndexSign{0, +1}.Atom())], 0.75, 1e-15);
  EXPECT_NEAR(probs[(IndexSign{0, -1}.Atom())], 0.25, 1e-15);
  EXPECT_NEAR(R1Decode((IndexSign{0, +1}), spec).value()[0], 2.0, 1e-15);
  EXPECT_NEAR(R1Decode((IndexSign{0, -1}), spec).value()[0], -2.0, 1e-15);
}

TEST(R1Test, DimensionTwoHandExample) {
  const double a = 1.5;
  const auto spec = Spec(1.0, a, 2, kLn3);
  const auto probs = R1AtomProbabilities(Vec{a, 0.0}, spec).value();
  EXPECT_NEAR(probs[(IndexSign{0, +1}.Atom())], 3.0 / 8, 1e-15);
  EXPECT_NEAR(probs[(IndexSign{1, +1}.Atom())], 3.0 / 8, 1e-15);
  EXPECT_NEAR(probs[(IndexSign{0, -1}.Atom())], 1.0 / 8, 1e-15);
  EXPECT_NEAR(probs[(IndexSign{1, -1}.Atom())], 1.0 / 8, 1e-15);
  const Vec d1 = R1Decode(IndexSign{1, -1}, spec).value();
  EXPECT_NEAR(d1[0], -2 * a, 1e-15);
  EXPECT_NEAR(d1[1], 2 * a, 1e-15);
}

TEST(R1Test, PaddedDimensionIsUnbiased) {
  std::mt19937_64 gen(1);
  for (int d : {3, 5, 6, 7, 12, 20}) {
    const auto spec = Spec(1.0, 0.8, d, 1.3);
    EXPECT_EQ(R1PaddedDim(d), NextPowerOfTwo(d));
    for (int trial = 0; trial < 10; ++trial) {
      const Vec x = RandomInBall(gen, d, 1.0, 0.8);
      const auto probs = R1AtomProbabilities(x, spec).value();
      Vec mean(d, 0.0);
      for (std::size_t atom = 0; atom < probs.size(); ++atom) {
        const Vec y = R1Decode(IndexSign::FromAtom(atom), spec).value();
        ASSERT_EQ(y.size(), static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) mean[i] += probs[atom] * y[i];
      }
      for (int i = 0; i < d; ++i) EXPECT_NEAR(mean[i], x[i], 1e-12);
    }
  }
}

TEST(R1Test, SamplerFrequenciesMatchProbabilities) {
  const auto spec = Spec(1.0, 1.0, 4, 2.0);
  const Vec x = {0.4, -0.3, 0.1, 0.0};
  const auto probs = R1AtomProbabilities(x, spec).value();
  Rng rng(42);
  const int n = 200000;
  std::vector<int> counts(probs.size(), 0);
  for (int i = 0; i < n; ++i) ++counts[R1Encode(x, spec, rng).value().Atom()];
  for (std::size_t atom = 0; atom < probs.size(); ++atom) {
    const double se = std::sqrt(probs[atom] * (1 - probs[atom]) / n);
    EXPECT_NEAR(counts[atom] / static_cast<double>(n), probs[atom], 5 * se);
  }
}

TEST(R1Test, AtomRatioWithinLocalBudget) {
  std::mt19937_64 gen(2);
  for (double eps : {0.1, 1.0, 5.0}) {
    const auto spec = Spec(1.0, 1.0, 8, eps);
    for (int trial = 0; trial < 30; ++trial) {
      const auto p = R1AtomProbabilities(RandomInBall(gen, 8, 1.0, 1.0), spec);
      const auto q = R1AtomProbabilities(RandomInBall(gen, 8, 1.0, 1.0), spec);
      for (std::size_t i = 0; i < p->size(); ++i) {
        EXPECT_LE((*p)[i], std::exp(eps) * (*q)[i] * (1 + 1e-9));
      }
    }
  }
}

TEST(R1Test, DecodedNormIsConstant) {
  const auto spec = Spec(1.0, 0.5, 8, 1.0);
  for (std::uint64_t atom = 0; atom < 16; ++atom) {
    const Vec y = R1Decode(IndexSign::FromAtom(atom), spec).value();
    EXPECT_NEAR(NormP(y, 2.0), 0.5 * std::sqrt(8.0) * PrivacyRatio(1.0),
                1e-12);
  }
}

TEST(R1Test, RejectsOutsideBallAndBadIndex) {
  const auto spec = Spec(1.0, 1.0, 2, 1.0);
  Rng rng(1);
  EXPECT_EQ(R1Encode(Vec{0.8, 0.8}, spec, rng).status().code(),
            absl::StatusCode::kOutOfRange);
  EXPECT_FALSE(R1Decode(IndexSign{2, 1}, spec).ok());
  EXPECT_FALSE(R1Encode(Vec{0.1}, spec, rng).ok());
  EXPECT_FALSE(R1Encode(Vec{0.1, 0.1}, Spec(2.0, 1.0, 2, 1.0), rng).ok());
}

TEST(PrivTest, RadiusMatchesSphereMarginal) {
  for (int d : {1, 2, 3, 4, 7, 16, 50}) {
    const double expected = 0.9 * PrivacyRatio(1.7) / MeanAbsCoordinate(d);
    EXPECT_NEAR(PrivRadius(d, 0.9, 1.7), expected, 1e-8 * expected) << d;
  }
}

TEST(PrivTest, DimensionOneIsSignFlip) {
  const auto spec = Spec(2.0, 1.0, 1, kLn3);
  Rng rng(5);
  int plus = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Vec y = Priv(Vec{1.0}, spec, rng).value();
    EXPECT_NEAR(std::abs(y[0]), 2.0, 1e-12);
    plus += y[0] > 0;
  }
  EXPECT_NEAR(plus / static_cast<double>(n), 0.75, 5 * std::sqrt(0.1875 / n));
}

TEST(PrivTest, OutputOnSphereAndUnbiased) {
  const int d = 5;
  const auto spec = Spec(2.0, 1.0, d, 1.0);
  const Vec x = {0.3, -0.2, 0.5, 0.1, 0.0};
  const double m = PrivRadius(d, 1.0, 1.0);
  Rng rng(8);
  const int n = 200000;
  Vec sum(d, 0.0), sum_sq(d, 0.0);
  for (int i = 0; i < n; ++i) {
    const Vec y = Priv(x, spec, rng).value();
    EXPECT_NEAR(NormP(y, 2.0), m, 1e-9 * m);
    for (int j = 0; j < d; ++j) {
      sum[j] += y[j];
      sum_sq[j] += y[j] * y[j];
    }
  }
  for (int j = 0; j < d; ++j) {
    const double mean = sum[j] / n;
    const double se = std::sqrt((sum_sq[j] / n - mean * mean) / n);
    EXPECT_NEAR(mean, x[j], 5 * se);
  }
}

TEST(QuanTest, ZeroInputGivesZeroMessage) {
  Rng rng(1);
  const SparseSigned msg = Quan(Vec{0.0, 0.0, 0.0}, 2.0, rng).value();
  EXPECT_TRUE(msg.zero);
  EXPECT_EQ(QuanDecode(msg, 2.0, 3).value(), Vec(3, 0.0));
}

TEST(QuanTest, DimensionOneProbabilities) {
  Rng rng(3);
  const int n = 100000;
  int plus = 0;
  for (int i = 0; i < n; ++i) {
    const SparseSigned msg = Quan(Vec{1.0}, 2.0, rng).value();
    ASSERT_EQ(msg.samples.size(), 1u);
    plus += msg.samples[0].sign > 0;
    EXPECT_NEAR(std::abs(QuanDecode(msg, 2.0, 1).value()[0]), 2.0, 1e-15);
  }
  EXPECT_NEAR(plus / static_cast<double>(n), 0.75, 5 * std::sqrt(0.1875 / n));
}

TEST(QuanTest, BoundaryInputKeepsSigns) {
  // ||x||_1 = M sqrt(d) forces the keep probability to one.
  Rng rng(4);
  const Vec x = {1.0, -1.0, 1.0, -1.0};
  for (int i = 0; i < 100; ++i) {
    const SparseSigned msg = Quan(x, 2.0, rng).value();
    for (const IndexSign& s : msg.samples) {
      EXPECT_EQ(s.sign, x[s.index] > 0 ? 1 : -1);
    }
  }
}

TEST(QuanTest, Unbiased) {
  const Vec x = {0.5, -0.25, 0.0, 1.0};
  const double radius = 2.0;
  Rng rng(6);
  const int n = 200000;
  Vec sum(4, 0.0), sum_sq(4, 0.0);
  for (int i = 0; i < n; ++i) {
    const Vec y = QuanDecode(Quan(x, radius, rng).value(), radius, 4).value();
    for (int j = 0; j < 4; ++j) {
      sum[j] += y[j];
      sum_sq[j] += y[j] * y[j];
    }
  }
  for (int j = 0; j < 4; ++j) {
    const double mean = sum[j] / n;
    const double se = std::sqrt(std::max(sum_sq[j] / n - mean * mean, 0.0) / n);
    EXPECT_NEAR(mean, x[j], 5 * se + 1e-12);
  }
}

TEST(QuanTest, RejectsOutsideRadius) {
  Rng rng(1);
  EXPECT_FALSE(Quan(Vec{3.0, 0.0}, 2.0, rng).ok());
  EXPECT_FALSE(QuanDecode(SparseSigned{{{0, 1}}, false}, 1.0, 2).ok());
}

TEST(R2Test, UnbiasedWithBoundedSecondMoment) {
  const int d = 4;
  const auto spec = Spec(2.0, 1.0, d, 1.0);
  const Vec x = {0.5, 0.5, -0.5, 0.0};
  const double ratio = PrivacyRatio(1.0);
  Rng rng(10);
  const int n = 200000;
  Vec sum(d, 0.0), sum_sq(d, 0.0);
  double second = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec y = R2Decode(R2Encode(x, spec, rng).value(), spec).value();
    for (int j = 0; j < d; ++j) {
      sum[j] += y[j];
      sum_sq[j] += y[j] * y[j];
      second += (y[j] - x[j]) * (y[j] - x[j]);
    }
  }
  for (int j = 0; j < d; ++j) {
    const double mean = sum[j] / n;
    const double se = std::sqrt((sum_sq[j] / n - mean * mean) / n);
    EXPECT_NEAR(mean, x[j], 5 * se);
  }
  EXPECT_LE(second / n, 6.0 * d * ratio * ratio);
}

TEST(R2Test, MessageHasDimensionManySamples) {
  const auto spec = Spec(2.0, 1.0, 6, 2.0);
  Rng rng(2);
  const SparseSigned msg = R2Encode(Vec(6, 0.1), spec, rng).value();
  EXPECT_EQ(msg.samples.size(), 6u);
}

TEST(RInfTest, HandExample) {
  const double a = 0.5;
  const auto spec = Spec(kInfinity, a, 2, kLn3);
  const auto probs = RInfAtomProbabilities(Vec{a, -a}, spec).value();
  EXPECT_NEAR(probs[(IndexSign{0, +1}.Atom())], 3.0 / 8, 1e-15);
  EXPECT_NEAR(probs[(IndexSign{0, -1}.Atom())], 1.0 / 8, 1e-15);
  EXPECT_NEAR(probs[(IndexSign{1, +1}.Atom())], 1.0 / 8, 1e-15);
  EXPECT_NEAR(probs[(IndexSign{1, -1}.Atom())], 3.0 / 8, 1e-15);
  const Vec y = RInfDecode(IndexSign{0, +1}, spec).value();
  EXPECT_NEAR(y[0], 4 * a, 1e-15);
  EXPECT_EQ(y[1], 0.0);
}

TEST(RInfTest, EnumeratedMeanAndRatio) {
  std::mt19937_64 gen(12);
  for (int d : {1, 3, 9}) {
    const auto spec = Spec(kInfinity, 2.0, d, 0.7);
    for (int trial = 0; trial < 20; ++trial) {
      const Vec x = RandomInBall(gen, d, kInfinity, 2.0);
      const Vec z = RandomInBall(gen, d, kInfinity, 2.0);
      const auto p = RInfAtomProbabilities(x, spec).value();
      const auto q = RInfAtomProbabilities(z, spec).value();
      Vec mean(d, 0.0);
      for (std::size_t atom = 0; atom < p.size(); ++atom) {
        EXPECT_LE(p[atom], std::exp(0.7) * q[atom] * (1 + 1e-9));
        const Vec y = RInfDecode(IndexSign::FromAtom(atom), spec).value();
        for (int i = 0; i < d; ++i) mean[i] += p[atom] * y[i];
      }
      for (int i = 0; i < d; ++i) EXPECT_NEAR(mean[i], x[i], 1e-12);
    }
  }
}

TEST(RpTest, ArmRadii) {
  const auto spec = Spec(4.0, 1.0, 16, 1.0, 0.3);
  EXPECT_NEAR(RpL1ArmSpec(spec).ball.radius, std::pow(16.0, 0.75), 1e-12);
  EXPECT_NEAR(RpL2ArmSpec(spec).ball.radius, std::pow(16.0, 0.25), 1e-12);
  const auto low = Spec(1.5, 1.0, 16, 1.0, 0.3);
  EXPECT_DOUBLE_EQ(RpL2ArmSpec(low).ball.radius, 1.0);
}

TEST(RpTest, PureArmsFollowMixProbability) {
  Rng rng(1);
  const Vec x(8, 0.05);
  const auto l1_only = Spec(3.0, 1.0, 8, 1.0, 1.0);
  const auto l2_only = Spec(3.0, 1.0, 8, 1.0, 0.0);
  for (int i = 0; i < 50; ++i) {
    EXPECT_EQ(RpEncode(x, l1_only, rng).value().arm, ArmTag::kL1);
    EXPECT_EQ(RpEncode(x, l2_only, rng).value().arm, ArmTag::kL2);
  }
}

TEST(RpTest, MixtureIsUnbiased) {
  const int d = 8;
  const auto spec = Spec(4.0, 1.0, d, 1.0, 0.5);
  std::mt19937_64 gen(3);
  const Vec x = RandomInBall(gen, d, 4.0, 1.0);
  Rng rng(13);
  const int n = 200000;
  Vec sum(d, 0.0), sum_sq(d, 0.0);
  for (int i = 0; i < n; ++i) {
    const Vec y = RpDecode(RpEncode(x, spec, rng).value(), spec).value();
    for (int j = 0; j < d; ++j) {
      sum[j] += y[j];
      sum_sq[j] += y[j] * y[j];
    }
  }
  for (int j = 0; j < d; ++j) {
    const double mean = sum[j] / n;
    const double se = std::sqrt((sum_sq[j] / n - mean * mean) / n);
    EXPECT_NEAR(mean, x[j], 5 * se);
  }
}

TEST(RpTest, RejectsMismatchedPayload) {
  const auto spec = Spec(3.0, 1.0, 4, 1.0, 0.5);
  EXPECT_FALSE(RpDecode(MixTagged{ArmTag::kL1, SparseSigned{}}, spec).ok());
  EXPECT_FALSE(RpDecode(MixTagged{ArmTag::kL2, IndexSign{}}, spec).ok());
  EXPECT_FALSE(Spec(kInfinity, 1.0, 4, 1.0).Validate(MechanismFamily::kRp).ok());
  EXPECT_FALSE(Spec(3.0, 1.0, 4, 1.0, 1.5).Validate(MechanismFamily::kRp).ok());
}

TEST(MechanismTest, FamilyNamesRoundTrip) {
  for (auto f : {MechanismFamily::kR1, MechanismFamily::kR2,
                 MechanismFamily::kRInf, MechanismFamily::kRp}) {
    EXPECT_EQ(ParseFamily(FamilyName(f)).value(), f);
  }
  EXPECT_FALSE(ParseFamily("nope").ok());
  EXPECT_EQ(FamilyForNorm(1.0), MechanismFamily::kR1);
  EXPECT_EQ(FamilyForNorm(2.0), MechanismFamily::kR2);
  EXPECT_EQ(FamilyForNorm(kInfinity), MechanismFamily::kRInf);
  EXPECT_EQ(FamilyForNorm(3.0), MechanismFamily::kRp);
}

TEST(MechanismTest, RejectsBadEpsilonAndVariantMismatch) {
  EXPECT_FALSE(Mechanism::Create(MechanismFamily::kR1, Spec(1.0, 1.0, 2, 0.0)).ok());
  EXPECT_FALSE(
      Mechanism::Create(MechanismFamily::kR1, Spec(1.0, 1.0, 2, kInfinity)).ok());
  const auto mech =
      Mechanism::Create(MechanismFamily::kR1, Spec(1.0, 1.0, 2, 1.0)).value();
  EXPECT_FALSE(mech.Decode(MechanismMessage{SparseSigned{}}).ok());
  EXPECT_FALSE(mech.MeanEstimate({}).ok());
}

TEST(MechanismTest, SingleMessageMeanIsDecode) {
  const auto mech =
      Mechanism::Create(MechanismFamily::kRInf, Spec(kInfinity, 1.0, 3, 1.0))
          .value();
  Rng rng(2);
  const MechanismMessage msg = mech.Encode(Vec{0.1, 0.2, 0.3}, rng).value();
  const std::vector<MechanismMessage> one = {msg};
  EXPECT_EQ(mech.MeanEstimate(one).value(), mech.Decode(msg).value());
}

TEST(MechanismTest, SameSeedSameMessage) {
  for (auto [family, p] :
       std::vector<std::pair<MechanismFamily, double>>{
           {MechanismFamily::kR1, 1.0},
           {MechanismFamily::kR2, 2.0},
           {MechanismFamily::kRInf, kInfinity},
           {MechanismFamily::kRp, 3.0}}) {
    const auto mech =
        Mechanism::Create(family, Spec(p, 1.0, 5, 1.0, 0.5)).value();
    const Vec x = {0.1, -0.1, 0.2, 0.0, 0.05};
    Rng a(99), b(99);
    for (int i = 0; i < 20; ++i) {
      EXPECT_EQ(mech.Encode(x, a).value(), mech.Encode(x, b).value());
    }
  }
}

}  // namespace
}  // namespace cldp
