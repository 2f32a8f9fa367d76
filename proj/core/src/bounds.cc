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

#include "cldp/bounds.h"

#include <algorithm>
#include <cmath>

#include "Eigen/Dense"
#include "absl/strings/str_format.h"
#include "cldp/mechanisms.h"
#include "cldp/status_macros.h"

namespace cldp {
namespace {

double Ratio(double epsilon0) {
  return std::isinf(epsilon0) ? 1.0 : PrivacyRatio(epsilon0);
}

// max{d^(1-2/p), 1}
double NormInflation(double d, double p) {
  const double e = std::isinf(p) ? 1.0 : 1.0 - 2.0 / p;
  return std::max(std::pow(d, e), 1.0);
}

absl::Status CheckCommon(double lipschitz, std::int64_t d, double p, double q,
                         std::int64_t n, double epsilon0) {
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) {
    return absl::InvalidArgumentError("Lipschitz constant must be positive");
  }
  if (d < 1 || n < 1) return absl::InvalidArgumentError("need d, n >= 1");
  if (!IsValidNormOrder(p)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("norm order must lie in [1, inf], got %g", p));
  }
  if (!(q > 0.0 && q <= 1.0)) {
    return absl::InvalidArgumentError("q must lie in (0, 1]");
  }
  if (!(epsilon0 > 0.0)) {
    return absl::InvalidArgumentError("epsilon0 must be positive");
  }
  return absl::OkStatus();
}

}  // namespace

absl::Status RiskQuery::Validate() const {
  if (!IsValidNormOrder(p)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("norm order must lie in [1, inf], got %g", p));
  }
  if (d < 1 || n < 1) return absl::InvalidArgumentError("need d, n >= 1");
  if (!(a > 0.0) || !std::isfinite(a)) {
    return absl::InvalidArgumentError("radius must be positive and finite");
  }
  if (!(epsilon0 > 0.0) || std::isnan(epsilon0)) {
    return absl::InvalidArgumentError("epsilon0 must be positive");
  }
  if (mix_prob && !(*mix_prob >= 0.0 && *mix_prob <= 1.0)) {
    return absl::InvalidArgumentError("mix probability must lie in [0, 1]");
  }
  return absl::OkStatus();
}

absl::StatusOr<double> RiskUpper(const RiskQuery& q, RiskModel model) {
  CLDP_RETURN_IF_ERROR(q.Validate());
  const bool worst = model == RiskModel::kWorstCase;
  const double d = static_cast<double>(q.d);
  const double base = q.a * q.a * d / static_cast<double>(q.n) *
                      std::pow(Ratio(q.epsilon0), 2);
  const double l1 = (worst ? 1.0 : 4.0) * base;
  const double l2 = (worst ? 6.0 : 14.0) * base;
  if (q.mix_prob) {
    if (std::isinf(q.p)) {
      return absl::InvalidArgumentError(
          "the two-arm mix is defined for p < inf only");
    }
    const double pbar = *q.mix_prob;
    return pbar * std::pow(d, 2.0 - 2.0 / q.p) * l1 +
           (1.0 - pbar) * NormInflation(d, q.p) * l2;
  }
  if (q.p == 1.0) return l1;
  if (q.p == 2.0) return l2;
  if (std::isinf(q.p)) return (worst ? 1.0 : 4.0) * base * d;
  return absl::InvalidArgumentError(absl::StrFormat(
      "p = %g needs a mix probability for the l1/l2 mixture bound", q.p));
}

absl::StatusOr<double> RiskLower(const RiskQuery& q) {
  CLDP_RETURN_IF_ERROR(q.Validate());
  const double d = static_cast<double>(q.d);
  const double n = static_cast<double>(q.n);
  const double a2 = q.a * q.a;
  const double e = q.epsilon0;
  if (q.p <= 2.0) return a2 * std::min(1.0, d / (n * e * e));
  const double exponent = std::isinf(q.p) ? 1.0 : 1.0 - 2.0 / q.p;
  return a2 * std::pow(d, exponent) *
         std::min(1.0, d / (n * std::min(e, e * e)));
}

absl::StatusOr<Vec> CommAdversary(std::span<const Vec> decoder_table,
                                  double p, double a) {
  if (decoder_table.empty()) {
    return absl::InvalidArgumentError("decoder table is empty");
  }
  if (!IsValidNormOrder(p) || !(a > 0.0)) {
    return absl::InvalidArgumentError("need p in [1, inf] and a > 0");
  }
  const std::size_t d = decoder_table.front().size();
  const std::size_t outputs = decoder_table.size();
  if (outputs >= d) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "adversary needs fewer outputs than dimensions, got %d >= %d", outputs,
        d));
  }
  Eigen::MatrixXd q(d, outputs);
  for (std::size_t j = 0; j < outputs; ++j) {
    if (decoder_table[j].size() != d || !AllFinite(decoder_table[j])) {
      return absl::InvalidArgumentError(
          "decoder values must be finite and share one dimension");
    }
    for (std::size_t i = 0; i < d; ++i) q(i, j) = decoder_table[j][i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(q);
  const auto rank = static_cast<std::size_t>(qr.rank());
  if (rank >= d) return absl::InternalError("decoder matrix has full rank");
  const Eigen::MatrixXd full_q = qr.householderQ();
  const Eigen::MatrixXd null = full_q.rightCols(d - rank);

  std::vector<Eigen::VectorXd> candidates;
  for (Eigen::Index k = 0; k < null.cols(); ++k) candidates.push_back(null.col(k));
  for (std::size_t i = 0; i < d; ++i) {
    candidates.push_back(null * null.row(i).transpose());
  }
  Vec best;
  double best_ratio = -1.0;
  for (const Eigen::VectorXd& c : candidates) {
    Vec v(c.data(), c.data() + c.size());
    const double lp = NormP(v, p);
    if (!(lp > 1e-8)) continue;
    const double ratio = NormP(v, 2.0) / lp;
    if (ratio > best_ratio * (1.0 + 1e-12)) {
      best_ratio = ratio;
      best = std::move(v);
    }
  }
  if (best.empty()) return absl::InternalError("no usable null-space vector");
  const double scale = a / NormP(best, p);
  for (double& v : best) v *= scale;
  return best;
}

absl::StatusOr<double> GSquared(double lipschitz, std::int64_t d, double p,
                                double q, std::int64_t n, double epsilon0) {
  CLDP_RETURN_IF_ERROR(CheckCommon(lipschitz, d, p, q, n, epsilon0));
  const double c = (p == 1.0 || std::isinf(p)) ? 4.0 : 14.0;
  const double dd = static_cast<double>(d);
  const double qn = q * static_cast<double>(n);
  return lipschitz * lipschitz * NormInflation(dd, p) *
         (1.0 + c * dd / qn * std::pow(Ratio(epsilon0), 2));
}

absl::StatusOr<double> ConvergenceBound(double lipschitz, double diameter,
                                        std::int64_t d, double p,
                                        std::int64_t rounds, double q,
                                        std::int64_t n, double epsilon0) {
  if (!(diameter > 0.0) || !std::isfinite(diameter)) {
    return absl::InvalidArgumentError("diameter must be positive");
  }
  if (rounds < 1) return absl::InvalidArgumentError("rounds must be >= 1");
  CLDP_ASSIGN_OR_RETURN(double g2, GSquared(lipschitz, d, p, q, n, epsilon0));
  const double t = static_cast<double>(rounds);
  return 2.0 * diameter * std::sqrt(g2) * (2.0 + std::log(t)) / std::sqrt(t);
}

absl::StatusOr<ConvergencePreset> OptimalRatePreset(double lipschitz,
                                                    double diameter,
                                                    std::int64_t d,
                                                    std::int64_t n, double q,
                                                    double epsilon,
                                                    double delta) {
  if (!(epsilon > 0.0) || !(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError("need epsilon > 0, delta in (0, 1)");
  }
  if (!(q > 0.0 && q <= 1.0) || n < 1) {
    return absl::InvalidArgumentError("need q in (0, 1] and n >= 1");
  }
  ConvergencePreset out;
  out.q = q;
  out.rounds = static_cast<std::int64_t>(
      std::ceil(static_cast<double>(n) / q - 1e-9));
  const double qt = q * static_cast<double>(out.rounds);
  out.epsilon0 = epsilon * std::sqrt(static_cast<double>(n) /
                                     (qt * std::log(2.0 * qt / delta) *
                                      std::log(2.0 / delta)));
  CLDP_ASSIGN_OR_RETURN(out.bound,
                        ConvergenceBound(lipschitz, diameter, d, 2.0,
                                         out.rounds, q, n, out.epsilon0));
  return out;
}

absl::StatusOr<ConvergencePreset> FullParticipationPreset(
    double lipschitz, double diameter, std::int64_t d, std::int64_t n,
    double epsilon0) {
  if (n < 2) return absl::InvalidArgumentError("need n >= 2");
  ConvergencePreset out;
  out.epsilon0 = epsilon0;
  const double ln = std::log(static_cast<double>(n));
  out.rounds = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(
             std::ceil(static_cast<double>(n) / (ln * ln) - 1e-9)));
  CLDP_ASSIGN_OR_RETURN(out.bound,
                        ConvergenceBound(lipschitz, diameter, d, 2.0,
                                         out.rounds, 1.0, n, epsilon0));
  return out;
}

}  // namespace cldp
