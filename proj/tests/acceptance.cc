// tests/acceptance.cc

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


// Acceptance checks. Each one prints a single PASS/FAIL line; pass check
// names on the command line to run a subset. Exit status is the number of
// failed checks.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "curriculum/harness.h"
#include "oracles.h"

using namespace curriculum;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome ctc_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20260101);
  double worst = 0.0;
  for (int c = 0; c < 500; ++c) {
    const int T = std::uniform_int_distribution<int>(1, 5)(rng);
    const int N = std::uniform_int_distribution<int>(2, 4)(rng);
    const auto lattice = oracle::random_lattice(T, N, rng);
    const auto y = oracle::random_feasible_target(T, N, rng);
    const double ours = std::exp(-ctc_nll(lattice, y));
    const double ref = static_cast<double>(oracle::brute_force_likelihood(lattice, y));
    worst = std::max(worst, std::abs(ours - ref));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-10 && secs < 10.0,
          fmt("500 cases, max |p - p_enum| = %.3g, %.2f s", worst, secs)};
}

Outcome ctc_completeness() {
  // Every label sequence over two non-blank labels that fits in 4 frames.
  std::vector<LabelSequence> sequences{{}};
  for (std::size_t k = 0; k < sequences.size(); ++k) {
    if (sequences[k].size() == 4) continue;
    for (int v = 0; v < 2; ++v) {
      auto next = sequences[k];
      next.push_back(v);
      sequences.push_back(next);
    }
  }
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int c = 0; c < 50; ++c) {
    const auto lattice = oracle::random_lattice(4, 3, rng, 1.0 + c % 3);
    double total = 0.0;
    for (const auto& y : sequences)
      if (min_frames(y) <= 4) total += std::exp(-ctc_nll(lattice, y));
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return {worst <= 1e-9, fmt("50 lattices, max |sum - 1| = %.3g", worst)};
}

Outcome gradient_checks() {
  std::mt19937_64 rng(99);
  double worst_ctc = 0.0;
  for (int c = 0; c < 100; ++c) {
    const int T = 2 + c % 7, N = 3 + c % 4;
    std::normal_distribution<double> g(0.0, 1.5);
    Eigen::VectorXd z(T * N);
    for (auto& v : z) v = g(rng);
    const auto y = oracle::random_feasible_target(T, N, rng);
    const auto nll_of = [&](const Eigen::VectorXd& x) {
      RowMatrix zm = Eigen::Map<const RowMatrix>(x.data(), T, N);
      return ctc_nll(PosteriorLattice{oracle::softmax_rows(zm)}, y);
    };
    RowMatrix zm = Eigen::Map<const RowMatrix>(z.data(), T, N);
    const RowMatrix grad = ctc_grad(PosteriorLattice{oracle::softmax_rows(zm)}, y);
    for (int k = 0; k < T * N; ++k) {
      const double fd = oracle::central_difference(nll_of, z, k, 1e-6);
      worst_ctc = std::max(worst_ctc, oracle::relative_error(grad.data()[k], fd, 1e-4));
    }
  }

  double worst_model = 0.0;
  for (int c = 0; c < 100; ++c) {
    ModelConfig cfg;
    cfg.input_dim = 2 + c % 3;
    cfg.hidden_dim = 3 + c % 3;
    cfg.alphabet_size = 2 + c % 3;
    cfg.init_scale = 0.5;
    const int T = 3 + c % 5;
    const ModelState m(cfg, 1000 + c);
    std::normal_distribution<double> g(0.0, 1.0);
    RowMatrix x(T, cfg.input_dim);
    for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = g(rng);
    const auto y = oracle::random_feasible_target(T, cfg.num_labels(), rng);
    const auto lg = loss_and_gradient(m, x, y);
    const auto f = [&](const Eigen::VectorXd& p) {
      return ctc_nll_log(log_posteriors(ModelState(cfg, 0, p), x), y);
    };
    for (Eigen::Index k = 0; k < lg.grad.size(); ++k) {
      const double fd = oracle::central_difference(f, m.parameters(), k, 1e-6);
      worst_model = std::max(worst_model, oracle::relative_error(lg.grad[k], fd, 1e-6));
    }
  }
  return {worst_ctc < 1e-4 && worst_model < 1e-3,
          fmt("ctc layer max rel err %.3g (< 1e-4), model max rel err %.3g (< 1e-3)",
              worst_ctc, worst_model)};
}

std::vector<double> draw_frequencies(const SamplingWeights& w, double lambda,
                                     std::uint64_t seed, int draws) {
  Rng rng(seed);
  std::vector<double> counts(w.size(), 0.0);
  for (int i = 0; i < draws; ++i) counts[draw_curriculum(w, lambda, rng)] += 1;
  for (double& c : counts) c /= draws;
  return counts;
}

Outcome sampler_law() {
  CorpusSpec spec;
  spec.n_train = 100;
  spec.n_valid = 0;
  spec.seed = 41;
  const auto corpus = generate_corpus(spec);
  std::vector<std::size_t> lengths;
  for (const auto& s : corpus.train.samples) lengths.push_back(s.target.size());
  const SamplingWeights w(lengths, 5);

  const int n = 1'000'000;
  double worst_z = 0.0;
  for (double lambda : {0.0, 1.0, 3.0}) {
    const auto p = w.probabilities(lambda);
    const auto f = draw_frequencies(w, lambda, 5 + static_cast<int>(lambda), n);
    for (std::size_t i = 0; i < p.size(); ++i)
      worst_z = std::max(worst_z, std::abs(f[i] - p[i]) / std::sqrt(p[i] * (1 - p[i]) / n));
  }

  bool invariant = true;
  for (double scale : {0.125, 0.37}) {
    std::vector<double> scaled = w.values();
    for (double& s : scaled) s *= scale;
    const auto rescaled = SamplingWeights::from_shortness(scaled);
    for (double lambda : {1.0, 3.0})
      invariant = invariant && draw_frequencies(w, lambda, 11, 200'000) ==
                                   draw_frequencies(rescaled, lambda, 11, 200'000);
  }
  return {worst_z <= 4.0 && invariant,
          fmt("max |z| = %.2f over 100 samples x 3 lambdas, rescaling %s", worst_z,
              invariant ? "invariant" : "CHANGED frequencies")};
}

Outcome schedule() {
  CorpusSpec spec;
  const auto corpus = generate_corpus(spec);
  ExperimentConfig cfg;
  cfg.strategy = Strategy::kCurriculum;
  const CurriculumSchedule s = make_schedule(cfg, corpus.train);
  const std::uint64_t chars = corpus.train.total_target_chars();
  bool ok = s.decay_span_targets == 5 * chars && s.lambda_at(0) == 3.0 &&
            s.lambda_at(s.decay_span_targets) == 0.0 &&
            s.lambda_at(s.decay_span_targets - 1) > 0.0 &&
            s.lambda_at(10 * chars) == 0.0;
  // Every integer step against the correctly rounded 3 (S - p) / S.
  double worst = 0.0;
  const auto S = static_cast<double>(s.decay_span_targets);
  for (std::uint64_t p = 0; p <= s.decay_span_targets; ++p) {
    const double exact = static_cast<double>(3 * (s.decay_span_targets - p)) / S;
    worst = std::max(worst, std::abs(s.lambda_at(p) - exact));
  }
  for (int e = 0; e <= 5; ++e)
    ok = ok && s.lambda_at(e * chars) == (5 - e) * 3.0 / 5.0;
  return {ok && worst == 0.0,
          fmt("span %llu = 5 x %llu chars, max error on grid %.3g",
              static_cast<unsigned long long>(s.decay_span_targets),
              static_cast<unsigned long long>(chars), worst)};
}

Outcome metrics() {
  std::vector<std::vector<int>> all{{}};
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (all[k].size() == 7) continue;
    for (int v = 0; v < 3; ++v) {
      auto next = all[k];
      next.push_back(v);
      all.push_back(next);
    }
  }
  std::size_t mismatches = 0, pairs = 0;
  for (const auto& a : all)
    for (const auto& b : all) {
      ++pairs;
      mismatches += edit_distance(a, b) != oracle::edit_distance_memo(a, b);
    }

  std::mt19937_64 rng(5);
  std::lognormal_distribution<double> nll(1.5, 2.0);
  std::uniform_int_distribution<std::size_t> len(0, 40);
  std::vector<SampleNll> samples(3000);
  for (auto& s : samples) s = {nll(rng), len(rng)};
  std::vector<Transcription> pairs_t(3000);
  std::uniform_int_distribution<int> sym(0, 4);
  for (auto& t : pairs_t) {
    t.target.resize(len(rng));
    t.prediction.resize(len(rng));
    for (int& v : t.target) v = sym(rng);
    for (int& v : t.prediction) v = sym(rng);
  }
  const double whole_nll = norm_nll(samples);
  const double whole_cer = cer(pairs_t);
  bool partition_ok = true;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t parts = 1 + trial % 7;
    std::vector<NllTotals> nll_parts(parts);
    std::vector<std::size_t> errors(parts, 0), chars(parts, 0);
    std::vector<Transcription> shuffled;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const std::size_t k = order[i] % parts;
      nll_parts[k].add(samples[order[i]].nll, samples[order[i]].target_len);
      const auto& t = pairs_t[order[i]];
      errors[k] += edit_distance(t.target, t.prediction);
      chars[k] += t.target.size();
      shuffled.push_back(t);
    }
    NllTotals merged;
    for (const auto& p : nll_parts) merged.merge(p);
    const double merged_cer =
        static_cast<double>(std::accumulate(errors.begin(), errors.end(), std::size_t{0})) /
        static_cast<double>(std::accumulate(chars.begin(), chars.end(), std::size_t{0}));
    partition_ok = partition_ok && merged.norm_nll() == whole_nll &&
                   merged_cer == whole_cer && cer(shuffled) == whole_cer;
  }
  return {mismatches == 0 && partition_ok,
          fmt("%zu edit-distance pairs, %zu mismatches; partitions %s", pairs,
              mismatches, partition_ok ? "exact" : "DRIFT")};
}

std::optional<std::uint64_t> first_reach(const std::vector<ConvergencePoint>& points,
                                         double threshold) {
  for (const auto& p : points)
    if (p.valid_norm_nll <= threshold) return p.browsed_targets;
  return std::nullopt;
}

// Default corpus and model, five training seeds. Progress is measured on a
// 5k-character evaluation grid over a 150k-character budget (half an epoch);
// the default 50k grid is too coarse to resolve the crossing. If the
// baseline never reaches 1.0 nats/char, that seed's threshold becomes the
// baseline's best value within the first half of the budget.
Outcome convergence() {
  const auto corpus = generate_corpus(CorpusSpec{});
  const std::uint64_t eval_every = 5000, budget = 150000;
  int wins = 0;
  std::vector<double> ratios;
  std::ostringstream detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::vector<std::pair<std::string, std::vector<ConvergencePoint>>> logs;
    for (Strategy st : {Strategy::kBaseline, Strategy::kCurriculum}) {
      ExperimentConfig cfg;
      cfg.strategy = st;
      cfg.seed = seed;
      cfg.budget_targets = budget;
      cfg.eval_every_targets = eval_every;
      logs.emplace_back(to_string(st), run_experiment(cfg, corpus.train, corpus.valid).points);
    }
    double threshold = 1.0;
    if (!first_reach(logs[0].second, threshold)) {
      threshold = std::numeric_limits<double>::infinity();
      for (const auto& p : logs[0].second)
        if (p.browsed_targets <= budget / 2) threshold = std::min(threshold, p.valid_norm_nll);
    }
    const auto summary = compare_strategies(logs, threshold, eval_every);
    const auto& base = summary.strategies[0];
    const auto& cur = summary.strategies[1];
    const double ratio = cur.speedup ? *cur.speedup : std::numeric_limits<double>::infinity();
    ratios.push_back(ratio);
    if (cur.reached_at && base.reached_at && *cur.reached_at < *base.reached_at) ++wins;
    const auto show = [](const std::optional<std::uint64_t>& v) {
      return v ? std::to_string(*v) : std::string("not reached");
    };
    detail << "\n    seed " << seed << ": threshold " << threshold << ", baseline "
           << show(base.reached_at) << ", curriculum " << show(cur.reached_at)
           << ", ratio " << ratio;
    std::cout << "  convergence seed " << seed << " done" << std::endl;
  }
  std::sort(ratios.begin(), ratios.end());
  const double median = ratios[2];
  return {wins >= 4 && median <= 0.8,
          fmt("curriculum faster in %d/5 seeds (need 4), median ratio %.3f (need <= 0.8)",
              wins, median) + detail.str()};
}

Outcome determinism() {
  CorpusSpec spec;
  spec.n_train = 300;
  spec.n_valid = 40;
  spec.seed = 8;
  const auto corpus = generate_corpus(spec);
  const auto words = split_into_words(corpus.train);
  bool same = true, seed_matters = true;
  for (Strategy st : {Strategy::kBaseline, Strategy::kCurriculum, Strategy::kByHand}) {
    ExperimentConfig cfg;
    cfg.strategy = st;
    cfg.total_epochs = 2;
    cfg.eval_every_targets = 1000;
    cfg.seed = 17;
    const auto csv = [&](const ExperimentConfig& c) {
      std::ostringstream out;
      write_csv(out, run_experiment(c, corpus.train, corpus.valid, &words).points);
      return out.str();
    };
    const std::string a = csv(cfg), b = csv(cfg);
    same = same && a == b;
    cfg.seed = 18;
    seed_matters = seed_matters && csv(cfg) != a;
  }
  return {same && seed_matters,
          fmt("three strategies, repeated runs %s; a different seed %s",
              same ? "byte-identical" : "DIFFER",
              seed_matters ? "changes the log" : "does NOT change the log")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks = {
      {"ctc-oracle", ctc_oracle},         {"ctc-completeness", ctc_completeness},
      {"gradients", gradient_checks},     {"sampler-law", sampler_law},
      {"schedule", schedule},             {"metrics", metrics},
      {"convergence", convergence},       {"determinism", determinism},
  };
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failed = 0, ran = 0;
  for (const auto& [name, check] : checks) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end())
      continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << "  (" << fmt("%.1f s", seconds_since(t0))
              << ")  " << o.detail << std::endl;
  }
  if (ran == 0) {
    std::cerr << "no such check\n";
    return 1;
  }
  return failed;
}
