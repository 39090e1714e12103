// curriculum/harness.h

// Copyright 2026  The ctc-curriculum Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef CURRICULUM_HARNESS_H_
#define CURRICULUM_HARNESS_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "curriculum/dataset.h"
#include "curriculum/metrics.h"
#include "curriculum/model.h"
#include "curriculum/sampler.h"

namespace curriculum {

enum class Strategy { kBaseline, kCurriculum, kByHand };
enum class Phase { kNone, kWords, kLines };

std::string to_string(Strategy s);
std::string to_string(Phase p);
/// Accepts "baseline", "curriculum" and "by_hand".
Strategy parse_strategy(const std::string& name);
Phase parse_phase(const std::string& name);

struct ExperimentConfig {
  Strategy strategy = Strategy::kBaseline;
  double lambda_start = 3.0;
  double decay_epochs = 5.0;  // lambda reaches 0 after this many epochs
  std::size_t m_min = 5;
  ModelConfig model;
  int total_epochs = 10;
  // Overrides total_epochs when nonzero: training budget in browsed
  // target characters.
  std::uint64_t budget_targets = 0;
  std::uint64_t eval_every_targets = 50000;
  std::uint64_t seed = 1;
  // Words-then-lines switch: lines validation NLL must improve by more than
  // min_delta within `patience` evaluations.
  double min_delta = 0.001;
  int patience = 2;
  double train_half_life_targets = 10000.0;
  bool record_draws = false;
  // Written when training aborts on a non-finite loss. Empty disables it.
  std::string abort_checkpoint;

  void validate() const;
};

/// One row of the convergence log.
struct ConvergencePoint {
  std::uint64_t browsed_targets = 0;
  std::uint64_t updates = 0;
  double lambda = 0.0;
  Phase phase = Phase::kNone;
  double train_norm_nll = 0.0;  // NaN before the first update
  double valid_norm_nll = 0.0;
  double valid_cer = 0.0;
};

struct BestValue {
  double value = 0.0;
  std::uint64_t browsed_targets = 0;
};

struct ExperimentResult {
  std::vector<ConvergencePoint> points;
  BestValue best_valid_norm_nll;
  BestValue best_valid_cer;
  Eigen::VectorXd initial_parameters;
  Eigen::VectorXd final_parameters;
  std::uint64_t skipped_infeasible = 0;
  std::optional<std::uint64_t> switched_at;  // words -> lines, by_hand only
  // Filled when record_draws is set: training samples in the order they
  // were used, as (phase, index into that phase's corpus).
  std::vector<std::pair<Phase, std::uint32_t>> draws;
};

/// Raised when the training loss becomes non-finite.
class TrainingAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Validation costs of `state` on `corpus`. Samples whose targets do not fit
/// their frames are left out (and logged).
EvalReport evaluate(const ModelState& state, const Corpus& corpus);

/// Patience rule: reports a plateau once `patience` consecutive values fail
/// to improve on the best value by more than `min_delta`.
class PlateauDetector {
 public:
  PlateauDetector(double min_delta, int patience);
  /// Feeds one evaluation; returns true once the plateau is reached.
  bool update(double value);
  bool reached() const { return stale_ >= patience_; }

 private:
  double min_delta_;
  int patience_;
  std::optional<double> best_;
  int stale_ = 0;
};

/// Lambda schedule of a curriculum run: decays over config.decay_epochs
/// passes' worth of training target characters.
CurriculumSchedule make_schedule(const ExperimentConfig& config,
                                 const Corpus& train);

/// Per-sample SGD under config.strategy. `words` is required for by_hand and
/// must be cut from the same training lines.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const Corpus& train, const Corpus& valid,
                                const Corpus* words = nullptr);

/// Words first with flat shuffling, then lines once the lines validation
/// NLL plateaus.
ExperimentResult run_by_hand(const ExperimentConfig& config,
                             const Corpus& train, const Corpus& valid,
                             const Corpus& words);

void write_csv(std::ostream& out, const std::vector<ConvergencePoint>& points);
/// Throws std::runtime_error on a bad header or row.
std::vector<ConvergencePoint> read_csv(std::istream& in);

struct StrategySummary {
  std::string name;
  double best_valid_cer = 0.0;
  double best_valid_norm_nll = 0.0;
  std::optional<std::uint64_t> reached_at;  // first browsed_targets <= threshold
  std::uint64_t budget = 0;                 // last browsed_targets logged
  std::optional<double> speedup;            // reached_at / baseline reached_at
};

struct ComparisonSummary {
  double threshold = 0.0;
  std::vector<StrategySummary> strategies;
};

/// Compares logs evaluated on the same grid (same number of points, and
/// point k in the same eval_every cell for every log; eval_every = 0 only
/// compares counts). Speedups are relative to the log named `baseline`.
ComparisonSummary compare_strategies(
    const std::vector<std::pair<std::string, std::vector<ConvergencePoint>>>& logs,
    double threshold, std::uint64_t eval_every,
    const std::string& baseline = "baseline");

void write_summary(std::ostream& out, const ComparisonSummary& summary);

}  // namespace curriculum

#endif  // CURRICULUM_HARNESS_H_
