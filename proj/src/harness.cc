// src/harness.cc

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

#include "curriculum/harness.h"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <spdlog/spdlog.h>

namespace curriculum {

namespace {

constexpr const char* kCsvHeader =
    "browsed_targets,updates,lambda,phase,train_norm_nll,valid_norm_nll,"
    "valid_cer";

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& field) {
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (field == "inf") return std::numeric_limits<double>::infinity();
  if (field == "-inf") return -std::numeric_limits<double>::infinity();
  double x = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), x);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size())
    throw std::runtime_error("bad number '" + field + "'");
  return x;
}

std::uint64_t parse_count(const std::string& field) {
  std::uint64_t x = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), x);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size())
    throw std::runtime_error("bad count '" + field + "'");
  return x;
}

std::uint64_t sampler_seed(std::uint64_t seed) {
  std::seed_seq seq{seed, std::uint64_t{0x5a4d}};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (std::uint64_t{words[0]} << 32) | words[1];
}

// Shared state of one training run.
class Trainer {
 public:
  Trainer(const ExperimentConfig& config, const Corpus& train,
          const Corpus& valid)
      : config_(config),
        valid_(valid),
        model_(config.model, config.seed),
        rng_(sampler_seed(config.seed)) {
    budget_ = config.budget_targets != 0
                  ? config.budget_targets
                  : static_cast<std::uint64_t>(config.total_epochs) *
                        train.total_target_chars();
    result_.initial_parameters = model_.parameters();
  }

  std::uint64_t budget() const { return budget_; }
  std::uint64_t browsed() const { return browsed_; }
  ExperimentResult finish() {
    result_.final_parameters = model_.parameters();
    return std::move(result_);
  }
  bool exhausted() const { return browsed_ >= budget_; }
  Rng& rng() { return rng_; }
  ExperimentResult& result() { return result_; }

  // Trains on one sample. Returns false if it was skipped as infeasible.
  bool train_on(const Sample& s, Phase phase, std::uint32_t index) {
    if (static_cast<int>(s.frames.rows()) < std::max(1, min_frames(s.target))) {
      ++result_.skipped_infeasible;
      if (result_.skipped_infeasible <= 10)
        spdlog::warn("skipping sample {}: {} labels do not fit {} frames",
                     s.id, s.target.size(), s.frames.rows());
      return false;
    }
    double nll = 0.0;
    try {
      nll = sgd_step(model_, s.frames, s.target, config_.model.learning_rate);
    } catch (const NonFiniteError& e) {
      abort(e.what());
    }
    const auto len = static_cast<double>(s.target.size());
    const double decay = std::exp2(-len / config_.train_half_life_targets);
    ewma_nll_ = decay * ewma_nll_ + nll;
    ewma_len_ = decay * ewma_len_ + len;
    browsed_ += s.target.size();
    ++updates_;
    if (config_.record_draws) result_.draws.emplace_back(phase, index);
    return true;
  }

  // Evaluates when the browsed count crossed the next grid line, or
  // unconditionally with `force`. Returns the new point, if any.
  const ConvergencePoint* maybe_evaluate(double lambda, Phase phase,
                                         bool force = false) {
    if (!result_.points.empty() &&
        (force ? result_.points.back().browsed_targets == browsed_
               : browsed_ < next_eval_))
      return nullptr;
    const EvalReport report = evaluate(model_, valid_);
    ConvergencePoint p;
    p.browsed_targets = browsed_;
    p.updates = updates_;
    p.lambda = lambda;
    p.phase = phase;
    p.train_norm_nll = ewma_len_ > 0.0 ? ewma_nll_ / ewma_len_
                                       : std::numeric_limits<double>::quiet_NaN();
    p.valid_norm_nll = report.norm_nll;
    p.valid_cer = report.cer;
    if (result_.points.empty() || p.valid_norm_nll < result_.best_valid_norm_nll.value)
      result_.best_valid_norm_nll = {p.valid_norm_nll, browsed_};
    if (result_.points.empty() || p.valid_cer < result_.best_valid_cer.value)
      result_.best_valid_cer = {p.valid_cer, browsed_};
    result_.points.push_back(p);
    next_eval_ = (browsed_ / config_.eval_every_targets + 1) *
                 config_.eval_every_targets;
    spdlog::debug("browsed {} updates {} lambda {:.3f} valid nll {:.4f} cer {:.4f}",
                  browsed_, updates_, lambda, p.valid_norm_nll, p.valid_cer);
    return &result_.points.back();
  }

 private:
  [[noreturn]] void abort(const std::string& why) {
    std::string msg = "training aborted after " + std::to_string(updates_) +
                      " updates (" + std::to_string(browsed_) +
                      " browsed targets): " + why;
    if (!config_.abort_checkpoint.empty()) {
      std::ostringstream rng_state;
      rng_state << rng_;
      save_checkpoint(config_.abort_checkpoint,
                      {model_.config(), model_.init_seed(),
                       model_.parameters(), rng_state.str()});
      msg += "; checkpoint written to " + config_.abort_checkpoint;
    }
    spdlog::error("{}", msg);
    throw TrainingAborted(msg);
  }

  const ExperimentConfig& config_;
  const Corpus& valid_;
  ModelState model_;
  Rng rng_;
  ExperimentResult result_;
  std::uint64_t budget_ = 0;
  std::uint64_t browsed_ = 0;
  std::uint64_t updates_ = 0;
  std::uint64_t next_eval_ = 0;
  double ewma_nll_ = 0.0;
  double ewma_len_ = 0.0;
};

void check_corpora(const ExperimentConfig& config, const Corpus& train,
                   const Corpus& valid) {
  if (train.samples.empty()) throw std::invalid_argument("empty training corpus");
  if (valid.total_target_chars() == 0)
    throw std::invalid_argument("validation corpus has no target characters");
  for (const Corpus* c : {&train, &valid}) {
    if (c->input_dim != config.model.input_dim)
      throw std::invalid_argument("corpus input_dim does not match the model");
    if (c->alphabet_size != config.model.alphabet_size)
      throw std::invalid_argument("corpus alphabet_size does not match the model");
  }
}

// Guards against a corpus whose every sample is infeasible.
void note_skip(bool trained, std::size_t& consecutive, std::size_t corpus_size) {
  consecutive = trained ? 0 : consecutive + 1;
  if (consecutive > 10 * corpus_size + 100)
    throw std::runtime_error("no trainable sample: every target exceeds its frames");
}

}  // namespace

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kBaseline: return "baseline";
    case Strategy::kCurriculum: return "curriculum";
    case Strategy::kByHand: return "by_hand";
  }
  return "?";
}

std::string to_string(Phase p) {
  switch (p) {
    case Phase::kNone: return "n/a";
    case Phase::kWords: return "words";
    case Phase::kLines: return "lines";
  }
  return "?";
}

Strategy parse_strategy(const std::string& name) {
  if (name == "baseline") return Strategy::kBaseline;
  if (name == "curriculum") return Strategy::kCurriculum;
  if (name == "by_hand" || name == "by-hand") return Strategy::kByHand;
  throw std::invalid_argument("unknown strategy '" + name + "'");
}

Phase parse_phase(const std::string& name) {
  if (name == "n/a") return Phase::kNone;
  if (name == "words") return Phase::kWords;
  if (name == "lines") return Phase::kLines;
  throw std::invalid_argument("unknown phase '" + name + "'");
}

void ExperimentConfig::validate() const {
  model.validate();
  if (!(lambda_start >= 0.0)) throw std::invalid_argument("lambda_start must be >= 0");
  if (!(decay_epochs > 0.0)) throw std::invalid_argument("decay_epochs must be > 0");
  if (m_min == 0) throw std::invalid_argument("m_min must be >= 1");
  if (total_epochs < 1 && budget_targets == 0)
    throw std::invalid_argument("total_epochs must be >= 1");
  if (eval_every_targets == 0)
    throw std::invalid_argument("eval_every_targets must be >= 1");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (!(min_delta >= 0.0)) throw std::invalid_argument("min_delta must be >= 0");
  if (!(train_half_life_targets > 0.0))
    throw std::invalid_argument("train_half_life_targets must be > 0");
}

EvalReport evaluate(const ModelState& state, const Corpus& corpus) {
  NllTotals nll;
  std::uint64_t errors = 0;
  std::uint64_t chars = 0;
  std::size_t skipped = 0;
  for (const auto& s : corpus.samples) {
    if (static_cast<int>(s.frames.rows()) < std::max(1, min_frames(s.target))) {
      ++skipped;
      continue;
    }
    const RowMatrix lp = log_posteriors(state, s.frames);
    nll.add(ctc_nll_log(lp, s.target), s.target.size());
    errors += edit_distance(s.target, best_path_decode(lp));
    chars += s.target.size();
  }
  if (skipped > 0)
    spdlog::warn("evaluation skipped {} infeasible samples", skipped);
  if (chars == 0)
    throw std::domain_error("evaluate: no target characters to evaluate");
  EvalReport r;
  r.norm_nll = nll.norm_nll();
  r.cer = static_cast<double>(errors) / static_cast<double>(chars);
  r.total_target_chars = chars;
  return r;
}

PlateauDetector::PlateauDetector(double min_delta, int patience)
    : min_delta_(min_delta), patience_(patience) {}

bool PlateauDetector::update(double value) {
  if (!best_ || value < *best_ - min_delta_) {
    best_ = best_ ? std::min(*best_, value) : value;
    stale_ = 0;
  } else {
    ++stale_;
  }
  return reached();
}

CurriculumSchedule make_schedule(const ExperimentConfig& config,
                                 const Corpus& train) {
  CurriculumSchedule schedule;
  schedule.lambda_start = config.lambda_start;
  schedule.m_min = config.m_min;
  schedule.decay_span_targets = static_cast<std::uint64_t>(std::llround(
      config.decay_epochs * static_cast<double>(train.total_target_chars())));
  return schedule;
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const Corpus& train, const Corpus& valid,
                                const Corpus* words) {
  config.validate();
  if (config.strategy == Strategy::kByHand) {
    if (!words) throw std::invalid_argument("by_hand needs a word corpus");
    return run_by_hand(config, train, valid, *words);
  }
  check_corpora(config, train, valid);

  Trainer trainer(config, train, valid);
  const bool curriculum = config.strategy == Strategy::kCurriculum;
  std::vector<std::size_t> lengths;
  for (const auto& s : train.samples) lengths.push_back(s.target.size());
  const SamplingWeights weights(lengths, config.m_min);
  const CurriculumSchedule schedule = make_schedule(config, train);
  EpochShuffler shuffler(train.samples.size());

  const auto lambda_now = [&] {
    return curriculum ? schedule.lambda_at(trainer.browsed()) : 0.0;
  };
  trainer.maybe_evaluate(lambda_now(), Phase::kNone);
  std::size_t consecutive_skips = 0;
  while (!trainer.exhausted()) {
    const std::size_t idx =
        curriculum ? draw_curriculum(weights, lambda_now(), trainer.rng())
                   : shuffler.next(trainer.rng());
    const bool trained = trainer.train_on(train.samples[idx], Phase::kNone,
                                          static_cast<std::uint32_t>(idx));
    note_skip(trained, consecutive_skips, train.samples.size());
    trainer.maybe_evaluate(lambda_now(), Phase::kNone);
  }
  // Final state, unless the last grid point already captured it.
  trainer.maybe_evaluate(lambda_now(), Phase::kNone, true);
  if (trainer.result().skipped_infeasible > 0)
    spdlog::warn("skipped {} infeasible training samples",
                 trainer.result().skipped_infeasible);
  return trainer.finish();
}

ExperimentResult run_by_hand(const ExperimentConfig& config,
                             const Corpus& train, const Corpus& valid,
                             const Corpus& words) {
  config.validate();
  check_corpora(config, train, valid);
  if (words.samples.empty()) throw std::invalid_argument("empty word corpus");
  if (words.input_dim != train.input_dim ||
      words.alphabet_size != train.alphabet_size)
    throw std::invalid_argument("word corpus does not match the line corpus");

  Trainer trainer(config, train, valid);
  PlateauDetector plateau(config.min_delta, config.patience);
  EpochShuffler word_order(words.samples.size());
  EpochShuffler line_order(train.samples.size());
  Phase phase = Phase::kWords;

  const auto after_eval = [&](const ConvergencePoint* p) {
    if (p && phase == Phase::kWords && plateau.update(p->valid_norm_nll)) {
      phase = Phase::kLines;
      trainer.result().switched_at = trainer.browsed();
      spdlog::info("by_hand: switching to lines after {} browsed targets",
                   trainer.browsed());
    }
  };
  after_eval(trainer.maybe_evaluate(0.0, phase));
  std::size_t consecutive_skips = 0;
  while (!trainer.exhausted()) {
    const Corpus& source = phase == Phase::kWords ? words : train;
    EpochShuffler& order = phase == Phase::kWords ? word_order : line_order;
    const std::size_t idx = order.next(trainer.rng());
    const bool trained = trainer.train_on(source.samples[idx], phase,
                                          static_cast<std::uint32_t>(idx));
    note_skip(trained, consecutive_skips, source.samples.size());
    after_eval(trainer.maybe_evaluate(0.0, phase));
  }
  trainer.maybe_evaluate(0.0, phase, true);
  return trainer.finish();
}

void write_csv(std::ostream& out, const std::vector<ConvergencePoint>& points) {
  out << kCsvHeader << '\n';
  for (const auto& p : points) {
    out << p.browsed_targets << ',' << p.updates << ',' << format_double(p.lambda)
        << ',' << to_string(p.phase) << ',' << format_double(p.train_norm_nll)
        << ',' << format_double(p.valid_norm_nll) << ','
        << format_double(p.valid_cer) << '\n';
  }
}

std::vector<ConvergencePoint> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw std::runtime_error("convergence log: missing or unexpected header");
  std::vector<ConvergencePoint> points;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    try {
      if (fields.size() != 7) throw std::runtime_error("expected 7 fields");
      ConvergencePoint p;
      p.browsed_targets = parse_count(fields[0]);
      p.updates = parse_count(fields[1]);
      p.lambda = parse_double(fields[2]);
      p.phase = parse_phase(fields[3]);
      p.train_norm_nll = parse_double(fields[4]);
      p.valid_norm_nll = parse_double(fields[5]);
      p.valid_cer = parse_double(fields[6]);
      points.push_back(p);
    } catch (const std::exception& e) {
      throw std::runtime_error("convergence log line " + std::to_string(line_no) +
                               ": " + e.what());
    }
  }
  return points;
}

ComparisonSummary compare_strategies(
    const std::vector<std::pair<std::string, std::vector<ConvergencePoint>>>& logs,
    double threshold, std::uint64_t eval_every, const std::string& baseline) {
  if (logs.empty()) throw std::invalid_argument("compare: no logs");
  const auto& ref = logs.front().second;
  for (const auto& [name, points] : logs) {
    if (points.empty()) throw std::invalid_argument("compare: log '" + name + "' is empty");
    if (points.size() != ref.size())
      throw std::invalid_argument("compare: log '" + name +
                                  "' has a different number of evaluation points");
    if (eval_every > 0)
      for (std::size_t k = 0; k < points.size(); ++k)
        if (points[k].browsed_targets / eval_every !=
            ref[k].browsed_targets / eval_every)
          throw std::invalid_argument("compare: log '" + name +
                                      "' is not on the shared evaluation grid");
  }

  ComparisonSummary out;
  out.threshold = threshold;
  for (const auto& [name, points] : logs) {
    StrategySummary s;
    s.name = name;
    s.best_valid_cer = std::numeric_limits<double>::infinity();
    s.best_valid_norm_nll = std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
      s.best_valid_cer = std::min(s.best_valid_cer, p.valid_cer);
      s.best_valid_norm_nll = std::min(s.best_valid_norm_nll, p.valid_norm_nll);
      if (!s.reached_at && p.valid_norm_nll <= threshold)
        s.reached_at = p.browsed_targets;
    }
    s.budget = points.back().browsed_targets;
    out.strategies.push_back(s);
  }
  const StrategySummary* base = nullptr;
  for (const auto& s : out.strategies)
    if (s.name == baseline) base = &s;
  if (base && base->reached_at && *base->reached_at > 0) {
    const double denom = static_cast<double>(*base->reached_at);
    for (auto& s : out.strategies)
      if (s.reached_at) s.speedup = static_cast<double>(*s.reached_at) / denom;
  }
  return out;
}

void write_summary(std::ostream& out, const ComparisonSummary& summary) {
  out << "strategy,best_valid_cer,best_valid_norm_nll,threshold,"
         "browsed_to_threshold,budget,speedup_vs_baseline\n";
  for (const auto& s : summary.strategies) {
    out << s.name << ',' << format_double(s.best_valid_cer) << ','
        << format_double(s.best_valid_norm_nll) << ','
        << format_double(summary.threshold) << ','
        << (s.reached_at ? std::to_string(*s.reached_at) : "not reached") << ','
        << s.budget << ',' << (s.speedup ? format_double(*s.speedup) : "n/a")
        << '\n';
  }
}

}  // namespace curriculum
