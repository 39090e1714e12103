// curriculum/metrics.h

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

#ifndef CURRICULUM_METRICS_H_
#define CURRICULUM_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "curriculum/ctc.h"

namespace curriculum {

/// Validation costs normalized by the total number of target characters.
struct EvalReport {
  double norm_nll = 0.0;
  double cer = 0.0;
  std::uint64_t total_target_chars = 0;
};

/// Unit-cost Levenshtein distance.
std::size_t edit_distance(std::span<const int> a, std::span<const int> b);

struct SampleNll {
  double nll = 0.0;
  std::size_t target_len = 0;
};

/// Running (sum NLL, sum |Y|) totals. The NLL sum is exact (kept as
/// non-overlapping partials and rounded once on read), so merging totals
/// of any partition of an evaluation set reproduces the unpartitioned value
/// bit for bit.
class NllTotals {
 public:
  void add(double nll, std::size_t target_len);
  void merge(const NllTotals& other);

  double nll_sum() const;
  std::uint64_t target_chars() const { return target_chars_; }
  /// Throws std::domain_error when no target characters were added.
  double norm_nll() const;

 private:
  void add_exact(double x);

  std::vector<double> partials_;
  double special_ = 0.0;  // accumulates inf / nan inputs
  std::uint64_t target_chars_ = 0;
};

/// Sum of NLLs over sum of target lengths (a ratio of sums, not a mean of
/// ratios). Throws std::domain_error when every target is empty.
double norm_nll(std::span<const SampleNll> samples);

struct Transcription {
  LabelSequence target;
  LabelSequence prediction;
};

/// Sum of edit distances over sum of target lengths. Empty targets add their
/// distance to the numerator only. Throws std::domain_error when every
/// target is empty.
double cer(std::span<const Transcription> pairs);

}  // namespace curriculum

#endif  // CURRICULUM_METRICS_H_
