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

#include "commands.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <thread>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "cldp/accountant.h"
#include "cldp/bounds.h"
#include "cldp/dataset.h"
#include "cldp/fedsim.h"
#include "cldp/linalg.h"
#include "cldp/mechanisms.h"
#include "cldp/rng.h"
#include "cldp/status_macros.h"
#include "cldp/wire.h"

namespace cldp::tools {
namespace {

using Row = std::vector<std::string>;

std::string OutPath(const CommandContext& ctx, const std::string& name) {
  return (std::filesystem::path(ctx.output_dir) / name).string();
}

absl::Status EnsureOutputDir(const CommandContext& ctx) {
  std::error_code ec;
  std::filesystem::create_directories(ctx.output_dir, ec);
  if (ec) {
    return absl::PermissionDeniedError(absl::StrCat(
        "cannot create output directory ", ctx.output_dir, ": ", ec.message()));
  }
  return absl::OkStatus();
}

// Runs fn(i) for i in [0, count) on up to `threads` workers (0 = hardware).
void ParallelFor(std::size_t count, int threads,
                 const std::function<void(std::size_t)>& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

absl::StatusOr<RiskModel> ParseModel(const std::string& name) {
  if (name == "worst") return RiskModel::kWorstCase;
  if (name == "probabilistic") return RiskModel::kProbabilistic;
  return absl::InvalidArgumentError(absl::StrCat(
      "model must be 'worst' or 'probabilistic', got '", name, "'"));
}

absl::Status RequireIntegers(const std::vector<double>& values,
                             const std::string& key, double min_value) {
  for (double v : values) {
    if (!std::isfinite(v) || v != std::floor(v) || v < min_value) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "key '%s' must hold integers >= %g, got %g", key, min_value, v));
    }
  }
  return absl::OkStatus();
}

absl::Status RequirePositive(const std::vector<double>& values,
                             const std::string& key) {
  for (double v : values) {
    if (!(v > 0.0)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("key '%s' must be positive, got %g", key, v));
    }
  }
  return absl::OkStatus();
}

// A point with ||x||_p = a and a uniformly random direction for p = 2.
Vec RandomOnSphere(int dim, double p, double a, Rng& rng) {
  Vec x(dim);
  double norm = 0.0;
  do {
    for (double& v : x) v = StandardNormal(rng);
    norm = NormP(x, p);
  } while (norm == 0.0);
  for (double& v : x) v *= a / norm;
  return x;
}

// ---------------------------------------------------------------- mean-est

struct MeanEstCell {
  std::int64_t n;
  int d;
  double epsilon0;
  double p;
};

absl::StatusOr<Row> RunMeanEstCell(const MeanEstCell& cell, const Config& c,
                                   RiskModel model, std::uint64_t seed) {
  const double a = c.Number("a");
  const std::int64_t trials = c.Int("trials");
  const std::int64_t datasets = c.Int("datasets");
  const std::optional<double> mix = c.MaybeNumber("mix_prob");
  const MechanismFamily family = FamilyForNorm(cell.p);

  MechanismSpec spec;
  spec.ball = BallSpec{cell.p, a, cell.d};
  spec.epsilon0 = cell.epsilon0;
  if (family == MechanismFamily::kRp) {
    if (!mix) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "p = %g uses the two-arm mechanism and needs mix_prob", cell.p));
    }
    spec.mix_prob = *mix;
  }
  CLDP_ASSIGN_OR_RETURN(Mechanism mech, Mechanism::Create(family, spec));
  const WireContext wctx{family, cell.d};

  double mse_max = 0.0;
  double mse_sum = 0.0;
  double bits_sum = 0.0;
  std::int64_t bits_count = 0;
  for (std::int64_t ds = 0; ds < datasets; ++ds) {
    Rng rng(DeriveSeed(seed, {static_cast<std::uint64_t>(ds)}));
    std::vector<Vec> points;
    Vec mean(cell.d, 0.0);
    for (std::int64_t i = 0; i < cell.n; ++i) {
      points.push_back(RandomOnSphere(cell.d, cell.p, a, rng));
      for (int j = 0; j < cell.d; ++j) mean[j] += points.back()[j];
    }
    for (double& v : mean) v /= static_cast<double>(cell.n);

    double err_sum = 0.0;
    Vec estimate(cell.d);
    for (std::int64_t t = 0; t < trials; ++t) {
      std::fill(estimate.begin(), estimate.end(), 0.0);
      for (const Vec& x : points) {
        CLDP_ASSIGN_OR_RETURN(MechanismMessage msg, mech.Encode(x, rng));
        if (ds == 0 && t == 0) {
          CLDP_ASSIGN_OR_RETURN(int bits, MessageBits(msg, wctx));
          bits_sum += bits;
          ++bits_count;
        }
        CLDP_ASSIGN_OR_RETURN(Vec dec, mech.Decode(msg));
        for (int j = 0; j < cell.d; ++j) estimate[j] += dec[j];
      }
      double err = 0.0;
      for (int j = 0; j < cell.d; ++j) {
        const double e = estimate[j] / static_cast<double>(cell.n) - mean[j];
        err += e * e;
      }
      err_sum += err;
    }
    const double mse = err_sum / static_cast<double>(trials);
    mse_max = std::max(mse_max, mse);
    mse_sum += mse;
  }

  RiskQuery q{cell.p, cell.d, cell.n, a, cell.epsilon0, std::nullopt};
  if (family == MechanismFamily::kRp) q.mix_prob = mix;
  CLDP_ASSIGN_OR_RETURN(double upper, RiskUpper(q, model));
  CLDP_ASSIGN_OR_RETURN(double lower, RiskLower(q));
  return Row{absl::StrCat(cell.n),
             absl::StrCat(cell.d),
             FormatDouble(cell.epsilon0),
             FormatDouble(cell.p),
             std::string(FamilyName(family)),
             FormatDouble(mse_max),
             FormatDouble(mse_sum / static_cast<double>(datasets)),
             FormatDouble(upper),
             FormatDouble(lower),
             FormatDouble(bits_sum / static_cast<double>(bits_count))};
}

absl::Status MeanEst(const Config& c, const CommandContext& ctx) {
  CLDP_RETURN_IF_ERROR(RequireIntegers(c.Numbers("n"), "n", 1));
  CLDP_RETURN_IF_ERROR(RequireIntegers(c.Numbers("d"), "d", 1));
  CLDP_RETURN_IF_ERROR(RequirePositive(c.Numbers("epsilon0"), "epsilon0"));
  for (double p : c.Numbers("p")) {
    if (!IsValidNormOrder(p)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("key 'p' must lie in [1, inf], got %g", p));
    }
  }
  for (double e : c.Numbers("epsilon0")) {
    if (std::isinf(e)) {
      return absl::InvalidArgumentError("mean-est needs finite epsilon0");
    }
  }
  if (!(c.Number("a") > 0.0) || std::isinf(c.Number("a"))) {
    return absl::InvalidArgumentError("key 'a' must be positive and finite");
  }
  CLDP_RETURN_IF_ERROR(RequireInteger(c, "trials", 1));
  CLDP_RETURN_IF_ERROR(RequireInteger(c, "datasets", 1));
  CLDP_RETURN_IF_ERROR(RequireInteger(c, "seed", 0));
  CLDP_RETURN_IF_ERROR(RequireInteger(c, "threads", 0));
  CLDP_ASSIGN_OR_RETURN(RiskModel model, ParseModel(c.String("model")));

  std::vector<MeanEstCell> cells;
  for (double n : c.Numbers("n")) {
    for (double d : c.Numbers("d")) {
      for (double e : c.Numbers("epsilon0")) {
        for (double p : c.Numbers("p")) {
          cells.push_back({static_cast<std::int64_t>(n), static_cast<int>(d),
                           e, p});
        }
      }
    }
  }
  const auto master = static_cast<std::uint64_t>(c.Int("seed"));
  std::vector<absl::StatusOr<Row>> rows(cells.size(), Row{});
  ParallelFor(cells.size(), static_cast<int>(c.Int("threads")),
              [&](std::size_t i) {
                rows[i] = RunMeanEstCell(cells[i], c, model,
                                         DeriveSeed(master, {i}));
              });
  std::vector<Row> out;
  for (auto& r : rows) {
    CLDP_RETURN_IF_ERROR(r.status());
    out.push_back(std::move(*r));
  }
  CLDP_RETURN_IF_ERROR(EnsureOutputDir(ctx));
  const std::string path = OutPath(ctx, "mean_est.csv");
  CLDP_RETURN_IF_ERROR(WriteCsv(
      path, c,
      {"n[clients]", "d[coords]", "epsilon0[nats]", "p[norm]", "family",
       "mse_max[l2sq]", "mse_mean[l2sq]", "risk_upper[l2sq]",
       "risk_lower_order_only[l2sq]", "bits_per_message[bits]"},
      out));
  *ctx.out << "wrote " << out.size() << " rows to " << path << "\n";
  return absl::OkStatus();
}

// -------------------------------------------------------------- accountant

absl::StatusOr<SamplingParams> ReadSampling(const Config& c) {
  for (const char* key : {"m", "k", "r", "s"}) {
    CLDP_RETURN_IF_ERROR(RequireInteger(c, key, 1));
  }
  SamplingParams params{c.Int("m"), c.Int("k"), c.Int("r"), c.Int("s")};
  CLDP_RETURN_IF_ERROR(params.Validate());
  return params;
}

void PrintBudget(const PrivacyBudget& b, std::ostream& out) {
  out << "bound: " << b.shuffle_bound
      << (b.guarantee ? " (guarantee)" : " (diagnostic only, not a guarantee)")
      << "\n";
  for (const ProvenanceStep& s : b.provenance) {
    out << absl::StrFormat("[%s] %s\n    %s\n    -> epsilon=%s delta=%s\n",
                           s.stage, s.rule, s.formula, FormatDouble(s.epsilon),
                           FormatDouble(s.delta));
  }
  out << absl::StrFormat("total: epsilon=%s delta=%s over T=%d rounds\n",
                         FormatDouble(b.epsilon), FormatDouble(b.delta),
                         b.rounds);
  for (const std::string& w : b.warnings) out << "warning: " << w << "\n";
}

absl::Status Accountant(const Config& c, const CommandContext& ctx) {
  CLDP_ASSIGN_OR_RETURN(SamplingParams params, ReadSampling(c));
  CLDP_RETURN_IF_ERROR(RequireInteger(c, "T", 1));
  const double delta = c.Number("delta");
  if (!(c.Number("balle_c") > 0.0) || std::isinf(c.Number("balle_c"))) {
    return absl::InvalidArgumentError("key 'balle_c' must be positive");
  }
  std::vector<ShuffleBound> bounds;
  const std::string which = c.String("bound");
  if (which == "erlingsson" || which == "both") {
    bounds.push_back(ShuffleBound::Erlingsson());
  }
  if (which == "balle" || which == "both") {
    bounds.push_back(ShuffleBound::Balle(c.Number("balle_c")));
  }
  if (bounds.empty()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "bound must be erlingsson, balle or both, got '", which, "'"));
  }
  const std::optional<double> target = c.MaybeNumber("target_epsilon");

  std::vector<Row> rows;
  absl::Status first_failure;
  int feasible = 0;
  for (const ShuffleBound& bound : bounds) {
    double eps0 = c.Number("epsilon0");
    absl::StatusOr<PrivacyBudget> budget;
    if (target) {
      absl::StatusOr<double> cal =
          CalibrateEpsilon0(*target, delta, c.Int("T"), params, bound);
      if (cal.ok()) {
        eps0 = *cal;
        budget = EndToEnd(eps0, delta, c.Int("T"), params, bound);
      } else {
        budget = cal.status();
      }
    } else {
      budget = EndToEnd(eps0, delta, c.Int("T"), params, bound);
    }
    if (!budget.ok()) {
      if (budget.status().code() == absl::StatusCode::kInvalidArgument) {
        return budget.status();
      }
      if (first_failure.ok()) first_failure = budget.status();
      *ctx.out << "bound: " << bound.Name() << "\ninfeasible: "
               << budget.status().message() << "\n";
      rows.push_back({bound.Name(), "infeasible", CsvCell(std::string(
                                                      budget.status().message())),
                      "nan", "nan", ""});
      continue;
    }
    ++feasible;
    if (target) {
      *ctx.out << "calibrated epsilon0=" << FormatDouble(eps0)
               << " for target epsilon=" << FormatDouble(*target) << "\n";
    }
    PrintBudget(*budget, *ctx.out);
    for (const ProvenanceStep& s : budget->provenance) {
      rows.push_back({bound.Name(), s.stage, CsvCell(s.rule),
                      FormatDouble(s.epsilon), FormatDouble(s.delta),
                      CsvCell(s.formula)});
    }
    rows.push_back({bound.Name(), "total",
                    budget->guarantee ? "guarantee" : "diagnostic",
                    FormatDouble(budget->epsilon), FormatDouble(budget->delta),
                    ""});
  }
  CLDP_RETURN_IF_ERROR(EnsureOutputDir(ctx));
  CLDP_RETURN_IF_ERROR(WriteCsv(OutPath(ctx, "accountant.csv"), c,
                                {"bound", "stage", "rule", "epsilon[nats]",
                                 "delta[prob]", "formula"},
                                rows));
  if (feasible == 0) return first_failure;
  return absl::OkStatus();
}

// ------------------------------------------------------------------ bounds

absl::Status Bounds(const Config& c, const CommandContext& ctx) {
  CLDP_RETURN_IF_ERROR(RequireIntegers(c.Numbers("d"), "d", 1));
  CLDP_RETURN_IF_ERROR(RequireIntegers(c.Numbers("n"), "n", 1));
  CLDP_RETURN_IF_ERROR(RequireIntegers(c.Numbers("T"), "T", 1));
  CLDP_RETURN_IF_ERROR(RequirePositive(c.Numbers("epsilon0"), "epsilon0"));
  CLDP_ASSIGN_OR_RETURN(RiskModel model, ParseModel(c.String("model")));
  const std::optional<double> mix = c.MaybeNumber("mix_prob");
  std::vector<Row> rows;
  for (double p : c.Numbers("p")) {
    for (double d : c.Numbers("d")) {
      for (double n : c.Numbers("n")) {
        for (double e : c.Numbers("epsilon0")) {
          for (double t : c.Numbers("T")) {
            RiskQuery q{p, static_cast<std::int64_t>(d),
                        static_cast<std::int64_t>(n), c.Number("a"), e,
                        std::isinf(p) ? std::nullopt : mix};
            CLDP_ASSIGN_OR_RETURN(double upper, RiskUpper(q, model));
            CLDP_ASSIGN_OR_RETURN(double lower, RiskLower(q));
            CLDP_ASSIGN_OR_RETURN(
                double g2, GSquared(c.Number("L"), q.d, p, c.Number("q"), q.n, e));
            CLDP_ASSIGN_OR_RETURN(
                double conv,
                ConvergenceBound(c.Number("L"), c.Number("D"), q.d, p,
                                 static_cast<std::int64_t>(t), c.Number("q"),
                                 q.n, e));
            rows.push_back({FormatDouble(p), absl::StrCat(q.d),
                            absl::StrCat(q.n), FormatDouble(e),
                            absl::StrCat(static_cast<std::int64_t>(t)),
                            FormatDouble(upper), FormatDouble(lower),
                            FormatDouble(g2), FormatDouble(conv)});
          }
        }
      }
    }
  }
  CLDP_RETURN_IF_ERROR(EnsureOutputDir(ctx));
  const std::string path = OutPath(ctx, "bounds.csv");
  CLDP_RETURN_IF_ERROR(WriteCsv(
      path, c,
      {"p[norm]", "d[coords]", "n[samples]", "epsilon0[nats]", "T[rounds]",
       "risk_upper[l2sq]", "risk_lower_order_only[l2sq]", "g_squared[l2sq]",
       "convergence_bound[loss]"},
      rows));
  *ctx.out << "wrote " << rows.size() << " rows to " << path << "\n";
  return absl::OkStatus();
}

// ------------------------------------------------------------------- train

absl::Status Train(const Config& c, const CommandContext& ctx) {
  CLDP_ASSIGN_OR_RETURN(SamplingParams params, ReadSampling(c));
  CLDP_RETURN_IF_ERROR(RequireInteger(c, "T", 1));
  CLDP_RETURN_IF_ERROR(RequireInteger(c, "d", 1));
  CLDP_RETURN_IF_ERROR(RequireInteger(c, "seed", 0));
  CLDP_RETURN_IF_ERROR(RequireInteger(c, "data_seed", 0));
  CLDP_RETURN_IF_ERROR(RequireInteger(c, "reference_iterations", 0));

  TrainConfig cfg;
  cfg.params = params;
  cfg.rounds = c.Int("T");
  cfg.epsilon0 = c.Number("epsilon0");
  cfg.delta = c.Number("delta");
  cfg.p = c.Number("p");
  cfg.clip = c.Number("clip");
  cfg.diameter = c.Number("D");
  cfg.mix_prob = c.Number("mix_prob");
  CLDP_ASSIGN_OR_RETURN(cfg.task, ParseTask(c.String("task")));
  cfg.seed = static_cast<std::uint64_t>(c.Int("seed"));
  cfg.wire_roundtrip = c.Bool("wire_roundtrip");
  const std::string acct = c.String("accountant");
  if (acct == "erlingsson") {
    cfg.accountant = ShuffleBound::Erlingsson();
  } else if (acct == "balle") {
    cfg.accountant = ShuffleBound::Balle(c.Number("balle_c"));
  } else if (acct == "none") {
    cfg.accountant.reset();
  } else {
    return absl::InvalidArgumentError(absl::StrCat(
        "accountant must be erlingsson, balle or none, got '", acct, "'"));
  }
  CLDP_RETURN_IF_ERROR(cfg.Validate());

  Dataset data;
  if (c.String("data").empty()) {
    if (!(c.Number("planted_norm") >= 0.0) ||
        std::isinf(c.Number("planted_norm"))) {
      return absl::InvalidArgumentError("planted_norm must be finite, >= 0");
    }
    data = GenerateSynthetic({params.m, params.r, static_cast<int>(c.Int("d")),
                              c.Number("planted_norm"),
                              static_cast<std::uint64_t>(c.Int("data_seed"))});
  } else {
    absl::StatusOr<Dataset> read = ReadDataset(c.String("data"));
    if (!read.ok()) {
      return absl::InvalidArgumentError(std::string(read.status().message()));
    }
    data = std::move(*read);
    if (data.num_clients() != params.m || data.points_per_client() != params.r ||
        data.dim != c.Int("d")) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "dataset shape m=%d r=%d d=%d does not match config m=%d r=%d d=%d",
          data.num_clients(), data.points_per_client(), data.dim, params.m,
          params.r, c.Int("d")));
    }
  }

  // Surface accountant infeasibility before any training work.
  if (cfg.Private() && cfg.accountant) {
    CLDP_RETURN_IF_ERROR(
        EndToEnd(cfg.epsilon0, cfg.delta, cfg.rounds, params, *cfg.accountant)
            .status());
  }
  CLDP_ASSIGN_OR_RETURN(TrainResult result, cldp::Train(cfg, data));
  const ReferenceSolution ref = MinimizeFullLoss(
      cfg.task, data, cfg.diameter / 2.0,
      static_cast<int>(c.Int("reference_iterations")));
  const double final_loss = FullLoss(cfg.task, result.theta, data);

  std::vector<Row> trace_rows;
  trace_rows.reserve(result.traces.size());
  for (const RoundTrace& t : result.traces) {
    trace_rows.push_back({absl::StrCat(t.t), absl::StrJoin(t.clients, ";"),
                          absl::StrCat(t.exact_bits),
                          FormatDouble(t.loss_after), FormatDouble(t.grad_norm),
                          FormatDouble(t.epsilon_so_far)});
  }
  std::vector<Row> model_rows;
  for (std::size_t j = 0; j < result.theta.size(); ++j) {
    model_rows.push_back({absl::StrCat(j), FormatDouble(result.theta[j])});
  }
  std::int64_t total_bits = 0;
  for (const RoundTrace& t : result.traces) total_bits += t.exact_bits;
  std::vector<Row> summary = {
      {"final_loss", FormatDouble(final_loss)},
      {"reference_loss", FormatDouble(ref.loss)},
      {"excess_loss", FormatDouble(final_loss - ref.loss)},
      {"epsilon0", FormatDouble(cfg.epsilon0)},
      {"epsilon", FormatDouble(result.budget.epsilon)},
      {"delta", FormatDouble(result.budget.delta)},
      {"guarantee", result.budget.guarantee ? "true" : "false"},
      {"shuffle_bound", result.budget.shuffle_bound},
      {"total_bits", absl::StrCat(total_bits)},
      {"clipped_fraction",
       FormatDouble(result.gradients == 0
                        ? 0.0
                        : static_cast<double>(result.clipped) /
                              static_cast<double>(result.gradients))},
  };
  CLDP_RETURN_IF_ERROR(EnsureOutputDir(ctx));
  CLDP_RETURN_IF_ERROR(WriteCsv(OutPath(ctx, "trace.csv"), c,
                                {"t[round]", "clients[ids]", "exact_bits[bits]",
                                 "loss[nats]", "grad_norm[l2]",
                                 "epsilon_so_far[nats]"},
                                trace_rows));
  CLDP_RETURN_IF_ERROR(WriteCsv(OutPath(ctx, "model.csv"), c,
                                {"index", "theta[param]"}, model_rows));
  CLDP_RETURN_IF_ERROR(
      WriteCsv(OutPath(ctx, "summary.csv"), c, {"key", "value"}, summary));
  for (const Row& r : summary) *ctx.out << r[0] << ": " << r[1] << "\n";
  for (const std::string& w : result.warnings) {
    *ctx.out << "warning: " << w << "\n";
  }
  return absl::OkStatus();
}

// ---------------------------------------------------------------- selftest

using Check = std::pair<std::string, std::function<bool()>>;

bool EnumeratedUnbiased(MechanismFamily family, int d, Rng& rng) {
  MechanismSpec spec;
  spec.ball = BallSpec{family == MechanismFamily::kR1 ? 1.0 : kInfinity, 1.0, d};
  spec.epsilon0 = 1.0;
  const Vec x = family == MechanismFamily::kR1
                    ? RandomOnSphere(d, 1.0, 0.7, rng)
                    : RandomOnSphere(d, kInfinity, 0.7, rng);
  auto probs = family == MechanismFamily::kR1 ? R1AtomProbabilities(x, spec)
                                              : RInfAtomProbabilities(x, spec);
  if (!probs.ok()) return false;
  Vec mean(d, 0.0);
  for (std::size_t atom = 0; atom < probs->size(); ++atom) {
    const IndexSign m = IndexSign::FromAtom(atom);
    auto dec = family == MechanismFamily::kR1 ? R1Decode(m, spec)
                                              : RInfDecode(m, spec);
    if (!dec.ok()) return false;
    for (int j = 0; j < d; ++j) mean[j] += (*probs)[atom] * (*dec)[j];
  }
  for (int j = 0; j < d; ++j) {
    if (std::abs(mean[j] - x[j]) > 1e-10) return false;
  }
  return true;
}

absl::Status Selftest(const Config& c, const CommandContext& ctx, bool* ok) {
  CLDP_RETURN_IF_ERROR(RequireInteger(c, "seed", 0));
  Rng rng(DeriveSeed(static_cast<std::uint64_t>(c.Int("seed")), {7}));
  const std::vector<Check> checks = {
      {"r1_enumerated_unbiased",
       [&] { return EnumeratedUnbiased(MechanismFamily::kR1, 8, rng); }},
      {"rinf_enumerated_unbiased",
       [&] { return EnumeratedUnbiased(MechanismFamily::kRInf, 8, rng); }},
      {"fwht_involution",
       [&] {
         Vec x = RandomOnSphere(16, 2.0, 1.0, rng);
         auto y = FwhtNormalized(x);
         auto z = y.ok() ? FwhtNormalized(*y) : y;
         if (!z.ok()) return false;
         for (int j = 0; j < 16; ++j) {
           if (std::abs((*z)[j] - x[j]) > 1e-12) return false;
         }
         return true;
       }},
      {"histogram_roundtrip_s3_b5",
       [&] {
         const BigInt count = MultisetCount(3, 5);
         for (BigInt r = 0; r < count; ++r) {
           HistogramCode code{r, 3, 5, HistogramBitLength(3, 5)};
           auto atoms = HistogramUnpack(code);
           if (!atoms.ok()) return false;
           auto back = HistogramPack(*atoms, 5);
           if (!back.ok() || back->rank != r) return false;
         }
         return true;
       }},
      {"index_sign_example",
       [&] {
         auto bits = EncodeIndexSign(IndexSign{5, 1}, 8);
         return bits.ok() && BitsToString(*bits) == "1011";
       }},
      {"erlingsson_example",
       [&] {
         auto e = AmplifyByShuffling(0.4, 1e-6, 10000, ShuffleBound::Erlingsson());
         return e.ok() && std::abs(*e - 0.178413) < 5e-6;
       }},
      {"strong_composition_example",
       [&] {
         auto e = StrongComposition(0.01, 0.0, 10000, 1e-6);
         return e.ok() && std::abs(e->epsilon - 6.26155) < 5e-5;
       }},
  };
  *ok = true;
  std::vector<Row> rows;
  for (const auto& [name, fn] : checks) {
    const bool pass = fn();
    *ok = *ok && pass;
    *ctx.out << (pass ? "PASS " : "FAIL ") << name << "\n";
    rows.push_back({name, pass ? "pass" : "fail"});
  }
  CLDP_RETURN_IF_ERROR(EnsureOutputDir(ctx));
  return WriteCsv(OutPath(ctx, "selftest.csv"), c, {"check", "result"}, rows);
}

int Finish(const absl::Status& status, const CommandContext& ctx) {
  return status.ok() ? kExitOk : ReportError(status, ctx);
}

}  // namespace

int ReportError(const absl::Status& status, const CommandContext& ctx) {
  switch (status.code()) {
    case absl::StatusCode::kInvalidArgument:
      *ctx.err << "validation error: " << status.message() << "\n";
      return kExitValidation;
    case absl::StatusCode::kFailedPrecondition:
    case absl::StatusCode::kOutOfRange:
      *ctx.err << "infeasible: " << status.message() << "\n";
      return kExitInfeasible;
    default:
      *ctx.err << "error: " << status.ToString() << "\n";
      return kExitFailure;
  }
}

int RunMeanEst(const Config& config, const CommandContext& ctx) {
  return Finish(MeanEst(config, ctx), ctx);
}

int RunAccountant(const Config& config, const CommandContext& ctx) {
  return Finish(Accountant(config, ctx), ctx);
}

int RunBounds(const Config& config, const CommandContext& ctx) {
  return Finish(Bounds(config, ctx), ctx);
}

int RunTrain(const Config& config, const CommandContext& ctx) {
  return Finish(Train(config, ctx), ctx);
}

int RunSelftest(const Config& config, const CommandContext& ctx) {
  bool ok = false;
  const absl::Status status = Selftest(config, ctx, &ok);
  if (!status.ok()) return ReportError(status, ctx);
  return ok ? kExitOk : kExitFailure;
}

}  // namespace cldp::tools
