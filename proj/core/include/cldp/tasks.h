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

// Per-example convex losses used by the training simulator.

#ifndef CLDP_TASKS_H_
#define CLDP_TASKS_H_

#include <span>
#include <string_view>

#include "absl/status/statusor.h"
#include "cldp/dataset.h"
#include "cldp/linalg.h"

namespace cldp {

enum class TaskKind {
  kLogistic,   // ln(1 + exp(-y theta.x)), labels in {-1, +1}
  kLinearAbs,  // |theta.x - y|
};

std::string_view TaskName(TaskKind task);
absl::StatusOr<TaskKind> ParseTask(std::string_view name);

struct LossAndGradient {
  double loss = 0.0;
  Vec gradient;
};

// Fails on non-finite input or a dimension mismatch.
absl::StatusOr<LossAndGradient> EvaluateTask(TaskKind task,
                                             std::span<const double> theta,
                                             const DataPoint& point);

// Mean loss over every point of the dataset.
double FullLoss(TaskKind task, std::span<const double> theta,
                const Dataset& data);
Vec FullGradient(TaskKind task, std::span<const double> theta,
                 const Dataset& data);

// Approximate minimizer of the full loss over the centered l2 ball of the
// given radius, and its loss. Logistic uses accelerated projected gradient;
// the nonsmooth task uses projected subgradient steps and keeps the best
// iterate.
struct ReferenceSolution {
  Vec theta;
  double loss = 0.0;
};
ReferenceSolution MinimizeFullLoss(TaskKind task, const Dataset& data,
                                   double radius, int iterations = 4000);

}  // namespace cldp

#endif  // CLDP_TASKS_H_
