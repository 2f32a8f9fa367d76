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

#include "cldp/linalg.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_format.h"

namespace cldp {

absl::Status BallSpec::Validate() const {
  if (!IsValidNormOrder(p)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("norm order p must lie in [1, inf], got %g", p));
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("ball radius must be positive and finite, got %g",
                        radius));
  }
  if (dim < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("ball dimension must be positive, got %d", dim));
  }
  return absl::OkStatus();
}

bool BallSpec::Contains(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim || !AllFinite(x)) return false;
  return NormP(x, p) <= radius * (1.0 + kExactTolerance);
}

bool AllFinite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(),
                     [](double v) { return std::isfinite(v); });
}

bool IsValidNormOrder(double p) { return p >= 1.0 && !std::isnan(p); }

double NormP(std::span<const double> x, double p) {
  double max_abs = 0.0;
  for (double v : x) max_abs = std::max(max_abs, std::abs(v));
  if (std::isinf(p) || max_abs == 0.0) return max_abs;
  if (p == 1.0) {
    double s = 0.0;
    for (double v : x) s += std::abs(v);
    return s;
  }
  if (p == 2.0) {
    double s = 0.0;
    for (double v : x) {
      const double r = v / max_abs;
      s += r * r;
    }
    return max_abs * std::sqrt(s);
  }
  double s = 0.0;
  for (double v : x) s += std::pow(std::abs(v) / max_abs, p);
  return max_abs * std::pow(s, 1.0 / p);
}

absl::StatusOr<double> PNorm(std::span<const double> x, double p) {
  if (!IsValidNormOrder(p)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("norm order p must lie in [1, inf], got %g", p));
  }
  if (!AllFinite(x)) {
    return absl::InvalidArgumentError("vector has a non-finite entry");
  }
  return NormP(x, p);
}

absl::StatusOr<Vec> Clip(std::span<const double> g, double p, double c) {
  if (!(c > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("clip radius must be positive, got %g", c));
  }
  auto norm = PNorm(g, p);
  if (!norm.ok()) return norm.status();
  Vec out(g.begin(), g.end());
  const double scale = std::max(1.0, *norm / c);
  if (scale > 1.0) {
    for (double& v : out) v /= scale;
    // Division can round the norm up by an ulp; pull it back inside.
    double after = NormP(out, p);
    while (after > c) {
      const double shrink = std::min(c / after, 1.0 - 0x1p-52);
      for (double& v : out) v *= shrink;
      after = NormP(out, p);
    }
  }
  return out;
}

bool IsPowerOfTwo(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t NextPowerOfTwo(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void FwhtInPlace(std::span<double> x) {
  const std::size_t n = x.size();
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += h << 1) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double a = x[j];
        const double b = x[j + h];
        x[j] = a + b;
        x[j + h] = a - b;
      }
    }
  }
}

absl::StatusOr<Vec> FwhtNormalized(std::span<const double> x) {
  if (!IsPowerOfTwo(x.size())) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "Hadamard transform needs a power-of-two dimension, got %d",
        x.size()));
  }
  if (!AllFinite(x)) {
    return absl::InvalidArgumentError("vector has a non-finite entry");
  }
  Vec y(x.begin(), x.end());
  FwhtInPlace(y);
  const double scale = 1.0 / std::sqrt(static_cast<double>(y.size()));
  for (double& v : y) v *= scale;
  return y;
}

Vec HadamardColumn(std::size_t d, std::size_t j) {
  Vec col(d);
  for (std::size_t i = 0; i < d; ++i) col[i] = HadamardEntry(i, j);
  return col;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

absl::StatusOr<Vec> ProjectL2Ball(std::span<const double> theta,
                                  std::span<const double> center,
                                  double radius) {
  if (!(radius > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("projection radius must be positive, got %g", radius));
  }
  if (theta.size() != center.size()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("dimension mismatch: %d vs %d", theta.size(),
                        center.size()));
  }
  Vec diff(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) diff[i] = theta[i] - center[i];
  const double dist = NormP(diff, 2.0);
  Vec out(theta.begin(), theta.end());
  if (dist <= radius) return out;
  const double scale = radius / dist;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = center[i] + diff[i] * scale;
  }
  return out;
}

}  // namespace cldp
