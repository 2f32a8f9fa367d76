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

#include "cldp/accountant.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "cldp/status_macros.h"

namespace cldp {
namespace {

absl::Status CheckDelta(double delta, const char* name) {
  if (!(delta >= 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("%s must lie in [0, 1), got %g", name, delta));
  }
  return absl::OkStatus();
}

// Largest eps0 the bound accepts at the given batch and delta~, or a
// non-positive value when none is.
double MaxEpsilon0(const ShuffleBound& bound, std::int64_t batch,
                   double shuffle_delta) {
  if (bound.kind == ShuffleBound::Kind::kErlingsson) {
    return std::nextafter(0.5, 0.0);
  }
  return 0.5 * std::log(static_cast<double>(batch) /
                        std::log(1.0 / shuffle_delta));
}

}  // namespace

absl::Status SamplingParams::Validate() const {
  if (m < 1 || k < 1 || k > m) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "need 1 <= k <= m, got k=%d m=%d", k, m));
  }
  if (r < 1 || s < 1 || s > r) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "need 1 <= s <= r, got s=%d r=%d", s, r));
  }
  return absl::OkStatus();
}

std::string ShuffleBound::Name() const {
  if (kind == Kind::kErlingsson) return "erlingsson";
  return absl::StrFormat("balle(c=%g)", balle_constant);
}

absl::StatusOr<PrivacyPair> AmplifyBySubsampling(double epsilon, double delta,
                                                 double q) {
  if (!(epsilon >= 0.0) || std::isnan(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("epsilon must be nonnegative, got %g", epsilon));
  }
  CLDP_RETURN_IF_ERROR(CheckDelta(delta, "delta"));
  if (!(q > 0.0 && q <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("sampling probability q must lie in (0, 1], got %g",
                        q));
  }
  if (q == 1.0) return PrivacyPair{epsilon, delta};
  return PrivacyPair{std::log1p(q * std::expm1(epsilon)), q * delta};
}

absl::StatusOr<double> AmplifyByShuffling(double epsilon0, double delta,
                                          std::int64_t batch_size,
                                          const ShuffleBound& bound) {
  if (!(epsilon0 > 0.0) || !std::isfinite(epsilon0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("epsilon0 must be positive and finite, got %g",
                        epsilon0));
  }
  if (batch_size < 1) {
    return absl::InvalidArgumentError("shuffle batch size must be positive");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("shuffle delta must lie in (0, 1), got %g", delta));
  }
  const double log_inv_delta = std::log(1.0 / delta);
  const double m = static_cast<double>(batch_size);
  if (bound.kind == ShuffleBound::Kind::kErlingsson) {
    if (!(epsilon0 < 0.5)) {
      return absl::FailedPreconditionError(absl::StrFormat(
          "erlingsson shuffle bound requires epsilon0 < 1/2, got %g",
          epsilon0));
    }
    if (!(delta < 0.01)) {
      return absl::FailedPreconditionError(absl::StrFormat(
          "erlingsson shuffle bound requires delta < 1/100, got %g", delta));
    }
    if (batch_size < 1000) {
      return absl::FailedPreconditionError(absl::StrFormat(
          "erlingsson shuffle bound requires batch m >= 1000, got %d",
          batch_size));
    }
    return 12.0 * epsilon0 * std::sqrt(log_inv_delta / m);
  }
  const double limit = 0.5 * std::log(m / log_inv_delta);
  if (!(epsilon0 <= limit)) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "balle shuffle bound requires epsilon0 <= ln(m / ln(1/delta)) / 2 = "
        "%g, got %g",
        limit, epsilon0));
  }
  return bound.balle_constant * std::min(epsilon0, 1.0) * std::exp(epsilon0) *
         std::sqrt(log_inv_delta / m);
}

absl::StatusOr<PrivacyPair> PerRoundBudget(double epsilon0,
                                           double shuffle_delta,
                                           const SamplingParams& params,
                                           const ShuffleBound& bound) {
  CLDP_RETURN_IF_ERROR(params.Validate());
  CLDP_ASSIGN_OR_RETURN(
      double shuffle_epsilon,
      AmplifyByShuffling(epsilon0, shuffle_delta, params.batch(), bound));
  const double eps_factor = params.s == 1 ? params.q() : params.q2();
  CLDP_ASSIGN_OR_RETURN(PrivacyPair eps_part,
                        AmplifyBySubsampling(shuffle_epsilon, 0.0, eps_factor));
  return PrivacyPair{eps_part.epsilon, params.q() * shuffle_delta};
}

absl::StatusOr<PrivacyPair> StrongComposition(double round_epsilon,
                                              double round_delta,
                                              std::int64_t rounds,
                                              double composition_delta) {
  if (!(round_epsilon >= 0.0) || std::isnan(round_epsilon)) {
    return absl::InvalidArgumentError("per-round epsilon must be nonnegative");
  }
  CLDP_RETURN_IF_ERROR(CheckDelta(round_delta, "per-round delta"));
  if (rounds < 1) {
    return absl::InvalidArgumentError("number of rounds must be positive");
  }
  if (!(composition_delta > 0.0 && composition_delta < 1.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "composition delta' must lie in (0, 1), got %g", composition_delta));
  }
  const double t = static_cast<double>(rounds);
  const double eps =
      std::sqrt(2.0 * t * std::log(1.0 / composition_delta)) * round_epsilon +
      t * round_epsilon * std::expm1(round_epsilon);
  return PrivacyPair{eps, t * round_delta + composition_delta};
}

absl::StatusOr<PrivacyBudget> EndToEnd(double epsilon0, double delta,
                                       std::int64_t rounds,
                                       const SamplingParams& params,
                                       const ShuffleBound& bound) {
  CLDP_RETURN_IF_ERROR(params.Validate());
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("target delta must lie in (0, 1), got %g", delta));
  }
  if (rounds < 1) {
    return absl::InvalidArgumentError("number of rounds must be positive");
  }
  const double q = params.q();
  const double t = static_cast<double>(rounds);
  const double shuffle_delta = delta / (2.0 * q * t);
  const double composition_delta = delta / 2.0;

  PrivacyBudget b;
  b.epsilon0 = epsilon0;
  b.rounds = rounds;
  b.shuffle_bound = bound.Name();
  b.guarantee = bound.IsGuarantee();
  b.shuffle_delta = shuffle_delta;
  b.composition_delta = composition_delta;

  CLDP_ASSIGN_OR_RETURN(
      b.shuffle_epsilon,
      AmplifyByShuffling(epsilon0, shuffle_delta, params.batch(), bound));
  CLDP_ASSIGN_OR_RETURN(PrivacyPair round,
                        PerRoundBudget(epsilon0, shuffle_delta, params, bound));
  b.round_epsilon = round.epsilon;
  b.round_delta = round.delta;
  CLDP_ASSIGN_OR_RETURN(
      PrivacyPair total,
      StrongComposition(round.epsilon, round.delta, rounds, composition_delta));
  b.epsilon = total.epsilon;
  // q T delta~ + delta' reconstructs the target exactly in real arithmetic;
  // report the target so the split leaves no rounding slack.
  b.delta = delta;

  b.provenance.push_back({"local", "ldp mechanism",
                          absl::StrFormat("eps0 = %.12g", epsilon0), epsilon0,
                          0.0});
  if (bound.kind == ShuffleBound::Kind::kErlingsson) {
    b.provenance.push_back(
        {"shuffle", "amplification by shuffling (erlingsson, explicit)",
         absl::StrFormat("eps~ = 12 * %.12g * sqrt(ln(1/%.12g) / %d)",
                         epsilon0, shuffle_delta, params.batch()),
         b.shuffle_epsilon, shuffle_delta});
  } else {
    b.provenance.push_back(
        {"shuffle", "amplification by shuffling (balle, asymptotic)",
         absl::StrFormat(
             "eps~ = %g * min{%.12g, 1} * e^%.12g * sqrt(ln(1/%.12g) / %d)",
             bound.balle_constant, epsilon0, epsilon0, shuffle_delta,
             params.batch()),
         b.shuffle_epsilon, shuffle_delta});
  }
  const bool data_only = params.s > 1;
  b.provenance.push_back(
      {"subsample",
       data_only ? "two-level subsampling, s > 1 (factor q2 = s/r)"
                 : "two-level subsampling, s = 1 (factor q = ks/(mr))",
       absl::StrFormat("eps_bar = ln(1 + %.12g (e^%.12g - 1)), delta_bar = "
                       "%.12g * %.12g",
                       data_only ? params.q2() : q, b.shuffle_epsilon, q,
                       shuffle_delta),
       b.round_epsilon, b.round_delta});
  b.provenance.push_back(
      {"compose", "strong composition",
       absl::StrFormat("eps = sqrt(2 * %d * ln(1/%.12g)) * %.12g + %d * "
                       "%.12g * (e^%.12g - 1), delta = %d * %.12g + %.12g",
                       rounds, composition_delta, b.round_epsilon, rounds,
                       b.round_epsilon, b.round_epsilon, rounds,
                       b.round_delta, composition_delta),
       b.epsilon, b.delta});

  if (data_only && params.k < params.m) {
    b.warnings.push_back(
        "s > 1 with k < m: client-sampling amplification is not established; "
        "epsilon uses the data-sampling factor q2 = s/r only");
  }
  if (!bound.IsGuarantee()) {
    b.warnings.push_back(
        "balle shuffle bound has an unspecified constant; epsilon is a "
        "diagnostic, not a guarantee");
  }
  return b;
}

absl::StatusOr<double> CalibrateEpsilon0(double target_epsilon, double delta,
                                         std::int64_t rounds,
                                         const SamplingParams& params,
                                         const ShuffleBound& bound) {
  if (!(target_epsilon > 0.0) || !std::isfinite(target_epsilon)) {
    return absl::InvalidArgumentError("target epsilon must be positive");
  }
  CLDP_RETURN_IF_ERROR(params.Validate());
  if (!(delta > 0.0 && delta < 1.0) || rounds < 1) {
    return absl::InvalidArgumentError("need delta in (0, 1) and rounds >= 1");
  }
  const double q = params.q();
  const double t = static_cast<double>(rounds);
  const double shuffle_delta = delta / (2.0 * q * t);
  double hi = MaxEpsilon0(bound, params.batch(), shuffle_delta);
  if (!(hi > 0.0)) {
    return absl::OutOfRangeError(absl::StrFormat(
        "infeasible: %s admits no positive epsilon0 at batch %d, delta~ %g",
        bound.Name(), params.batch(), shuffle_delta));
  }
  double lo = hi * 1e-12;

  auto eval = [&](double eps0) -> absl::StatusOr<double> {
    CLDP_ASSIGN_OR_RETURN(PrivacyBudget b,
                          EndToEnd(eps0, delta, rounds, params, bound));
    return b.epsilon;
  };
  auto at_lo = eval(lo);
  if (!at_lo.ok()) {
    return absl::OutOfRangeError(
        absl::StrCat("infeasible: ", at_lo.status().message()));
  }
  if (*at_lo > target_epsilon) {
    return absl::OutOfRangeError(absl::StrFormat(
        "infeasible: target epsilon %g is below the smallest achievable %g",
        target_epsilon, *at_lo));
  }
  CLDP_ASSIGN_OR_RETURN(double at_hi, eval(hi));
  if (at_hi <= target_epsilon) {
    return absl::OutOfRangeError(absl::StrFormat(
        "infeasible: target epsilon %g exceeds %g, the largest achievable "
        "under the %s preconditions (epsilon0 <= %g)",
        target_epsilon, at_hi, bound.Name(), hi));
  }

  // Initial guess from eps ~ eps0 sqrt(qT ln(2qT/delta) ln(2/delta) / n).
  const double guess =
      target_epsilon *
      std::sqrt(static_cast<double>(params.n()) /
                (q * t * std::log(2.0 * q * t / delta) * std::log(2.0 / delta)));
  if (std::isfinite(guess) && guess > lo && guess < hi) {
    CLDP_ASSIGN_OR_RETURN(double at_guess, eval(guess));
    (at_guess <= target_epsilon ? lo : hi) = guess;
  }
  while (hi / lo - 1.0 > 1e-10) {
    const double mid = std::sqrt(lo * hi);
    if (mid <= lo || mid >= hi) break;
    CLDP_ASSIGN_OR_RETURN(double at_mid, eval(mid));
    (at_mid <= target_epsilon ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace cldp
