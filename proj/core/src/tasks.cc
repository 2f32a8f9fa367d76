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

#include "cldp/tasks.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "absl/strings/str_format.h"

namespace cldp {
namespace {

// ln(1 + e^z) without overflow.
double Softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Loss and the scalar c with gradient = c * x.
std::pair<double, double> Scalar(TaskKind task, double margin, double y) {
  if (task == TaskKind::kLogistic) {
    return {Softplus(-y * margin), -y * Sigmoid(-y * margin)};
  }
  const double r = margin - y;
  return {std::abs(r), r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0)};
}

Vec Project(Vec theta, double radius) {
  const double norm = NormP(theta, 2.0);
  if (norm > radius) {
    for (double& v : theta) v *= radius / norm;
  }
  return theta;
}

}  // namespace

std::string_view TaskName(TaskKind task) {
  return task == TaskKind::kLogistic ? "logistic" : "linear_abs";
}

absl::StatusOr<TaskKind> ParseTask(std::string_view name) {
  if (name == "logistic") return TaskKind::kLogistic;
  if (name == "linear_abs") return TaskKind::kLinearAbs;
  return absl::InvalidArgumentError(absl::StrFormat(
      "unknown task '%s' (logistic, linear_abs)", std::string(name)));
}

absl::StatusOr<LossAndGradient> EvaluateTask(TaskKind task,
                                             std::span<const double> theta,
                                             const DataPoint& point) {
  if (theta.size() != point.features.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "parameter has dimension %d, point has %d", theta.size(),
        point.features.size()));
  }
  if (!AllFinite(theta) || !AllFinite(point.features) ||
      !std::isfinite(point.label)) {
    return absl::InvalidArgumentError("non-finite task input");
  }
  const auto [loss, c] = Scalar(task, Dot(theta, point.features), point.label);
  LossAndGradient out{loss, Vec(point.features)};
  for (double& v : out.gradient) v *= c;
  if (!std::isfinite(loss) || !AllFinite(out.gradient)) {
    return absl::InternalError("task produced a non-finite gradient");
  }
  return out;
}

double FullLoss(TaskKind task, std::span<const double> theta,
                const Dataset& data) {
  double total = 0.0;
  std::size_t count = 0;
  for (const ClientDataset& c : data.clients) {
    for (const DataPoint& p : c.points) {
      total += Scalar(task, Dot(theta, p.features), p.label).first;
      ++count;
    }
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

Vec FullGradient(TaskKind task, std::span<const double> theta,
                 const Dataset& data) {
  Vec g(theta.size(), 0.0);
  std::size_t count = 0;
  for (const ClientDataset& c : data.clients) {
    for (const DataPoint& p : c.points) {
      const double s = Scalar(task, Dot(theta, p.features), p.label).second;
      for (std::size_t j = 0; j < g.size(); ++j) g[j] += s * p.features[j];
      ++count;
    }
  }
  if (count > 0) {
    for (double& v : g) v /= static_cast<double>(count);
  }
  return g;
}

ReferenceSolution MinimizeFullLoss(TaskKind task, const Dataset& data,
                                   double radius, int iterations) {
  const std::size_t d = static_cast<std::size_t>(data.dim);
  double max_sq = 0.0;
  for (const ClientDataset& c : data.clients) {
    for (const DataPoint& p : c.points) {
      max_sq = std::max(max_sq, Dot(p.features, p.features));
    }
  }
  Vec x(d, 0.0);
  ReferenceSolution best{x, FullLoss(task, x, data)};
  if (task == TaskKind::kLogistic) {
    // The logistic loss is (max ||x||^2 / 4)-smooth.
    const double step = max_sq > 0.0 ? 4.0 / max_sq : 1.0;
    Vec y = x;
    double t = 1.0;
    for (int it = 0; it < iterations; ++it) {
      const Vec g = FullGradient(task, y, data);
      Vec next(d);
      for (std::size_t j = 0; j < d; ++j) next[j] = y[j] - step * g[j];
      next = Project(std::move(next), radius);
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      for (std::size_t j = 0; j < d; ++j) {
        y[j] = next[j] + (t - 1.0) / t_next * (next[j] - x[j]);
      }
      x = std::move(next);
      t = t_next;
      const double loss = FullLoss(task, x, data);
      if (loss < best.loss) best = {x, loss};
    }
    return best;
  }
  const double lip = std::sqrt(max_sq);
  for (int it = 1; it <= iterations; ++it) {
    const Vec g = FullGradient(task, x, data);
    const double step = 2.0 * radius / (std::max(lip, 1e-12) * std::sqrt(it));
    for (std::size_t j = 0; j < d; ++j) x[j] -= step * g[j];
    x = Project(std::move(x), radius);
    const double loss = FullLoss(task, x, data);
    if (loss < best.loss) best = {x, loss};
  }
  return best;
}

}  // namespace cldp
