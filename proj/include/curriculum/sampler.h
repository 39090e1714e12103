// curriculum/sampler.h

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

#ifndef CURRICULUM_SAMPLER_H_
#define CURRICULUM_SAMPLER_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace curriculum {

/// The single random stream type used throughout training.
using Rng = std::mt19937_64;

/// Easiness of a sample from its target length: 1 / max(m_min, target_len).
/// Throws std::invalid_argument when m_min is 0.
double shortness(std::size_t target_len, std::size_t m_min);

/// Length-based curriculum: the exponent lambda decays linearly from
/// lambda_start to 0 over decay_span_targets browsed target characters.
struct CurriculumSchedule {
  double lambda_start = 3.0;
  std::uint64_t decay_span_targets = 1;
  std::size_t m_min = 5;

  double lambda_at(std::uint64_t browsed_targets) const;
};

/// Per-sample shortness values of a training corpus. Immutable once built.
class SamplingWeights {
 public:
  SamplingWeights(std::span<const std::size_t> target_lengths,
                  std::size_t m_min);

  /// Builds directly from shortness values, each in (0, 1].
  static SamplingWeights from_shortness(std::vector<double> shortness);

  std::size_t size() const { return shortness_.size(); }
  double shortness(std::size_t i) const { return shortness_[i]; }
  double max_shortness() const { return max_shortness_; }
  double min_shortness() const { return min_shortness_; }
  const std::vector<double>& values() const { return shortness_; }

  /// shortness(i)^lambda / sum_u shortness(u)^lambda, computed exactly.
  std::vector<double> probabilities(double lambda) const;

  /// Rejection sampler acceptance probability for sample i.
  double acceptance(std::size_t i, double lambda) const;

 private:
  SamplingWeights() = default;
  void finish();

  std::vector<double> shortness_;
  std::vector<double> relative_;  // shortness / max_shortness
  double max_shortness_ = 0.0;
  double min_shortness_ = 0.0;
};

/// Draws a sample index with probability proportional to shortness^lambda,
/// with replacement. Proposes uniformly and accepts with probability
/// (shortness / max_shortness)^lambda, so lambda may change between draws
/// at no cost. If `proposals` is non-null it is incremented once per
/// proposal.
std::size_t draw_curriculum(const SamplingWeights& weights, double lambda,
                            Rng& rng, std::uint64_t* proposals = nullptr);

/// Flat sampling without replacement: a fresh permutation every epoch.
class EpochShuffler {
 public:
  explicit EpochShuffler(std::size_t corpus_size);

  std::size_t next(Rng& rng);

  /// Number of epochs started so far.
  std::uint64_t epochs_started() const { return epochs_started_; }

 private:
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::uint64_t epochs_started_ = 0;
};

}  // namespace curriculum

#endif  // CURRICULUM_SAMPLER_H_
