// src/metrics.cc

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

#include "curriculum/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace curriculum {

std::size_t edit_distance(std::span<const int> a, std::span<const int> b) {
  // Two rows of the standard DP table, indexed by prefix of b.
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

void NllTotals::add_exact(double x) {
  // Shewchuk's algorithm: keep a list of non-overlapping partials whose
  // exact sum is the exact running total.
  std::size_t kept = 0;
  for (double y : partials_) {
    if (std::abs(x) < std::abs(y)) std::swap(x, y);
    const double hi = x + y;
    const double lo = y - (hi - x);
    if (lo != 0.0) partials_[kept++] = lo;
    x = hi;
  }
  partials_.resize(kept);
  partials_.push_back(x);
}

void NllTotals::add(double nll, std::size_t target_len) {
  if (std::isfinite(nll))
    add_exact(nll);
  else
    special_ += nll;
  target_chars_ += target_len;
}

void NllTotals::merge(const NllTotals& other) {
  for (double p : other.partials_) add_exact(p);
  special_ += other.special_;
  target_chars_ += other.target_chars_;
}

double NllTotals::nll_sum() const {
  if (special_ != 0.0 || std::isnan(special_)) return special_;
  // Round the exact sum once, from the largest partial down (as in fsum).
  if (partials_.empty()) return 0.0;
  std::size_t n = partials_.size();
  double hi = partials_[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = partials_[--n];
    hi = x + y;
    const double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) ||
                (lo > 0.0 && partials_[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

double NllTotals::norm_nll() const {
  if (target_chars_ == 0)
    throw std::domain_error("norm_nll: all targets are empty");
  return nll_sum() / static_cast<double>(target_chars_);
}

double norm_nll(std::span<const SampleNll> samples) {
  NllTotals totals;
  for (const auto& s : samples) totals.add(s.nll, s.target_len);
  return totals.norm_nll();
}

double cer(std::span<const Transcription> pairs) {
  std::uint64_t errors = 0;
  std::uint64_t total_len = 0;
  for (const auto& p : pairs) {
    errors += edit_distance(p.target, p.prediction);
    total_len += p.target.size();
  }
  if (total_len == 0) throw std::domain_error("cer: all targets are empty");
  return static_cast<double>(errors) / static_cast<double>(total_len);
}

}  // namespace curriculum
