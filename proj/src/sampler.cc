// src/sampler.cc

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

#include "curriculum/sampler.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace curriculum {

double shortness(std::size_t target_len, std::size_t m_min) {
  if (m_min == 0)
    throw std::invalid_argument("shortness: m_min must be at least 1");
  return 1.0 / static_cast<double>(std::max(m_min, target_len));
}

double CurriculumSchedule::lambda_at(std::uint64_t browsed_targets) const {
  if (decay_span_targets == 0 || browsed_targets >= decay_span_targets)
    return 0.0;
  // Integer remaining span keeps grid points exact.
  const auto remaining =
      static_cast<double>(decay_span_targets - browsed_targets);
  return lambda_start * remaining / static_cast<double>(decay_span_targets);
}

SamplingWeights::SamplingWeights(std::span<const std::size_t> target_lengths,
                                 std::size_t m_min) {
  shortness_.reserve(target_lengths.size());
  for (std::size_t len : target_lengths)
    shortness_.push_back(curriculum::shortness(len, m_min));
  finish();
}

SamplingWeights SamplingWeights::from_shortness(std::vector<double> values) {
  for (double s : values)
    if (!(s > 0.0 && s <= 1.0))
      throw std::invalid_argument("shortness values must lie in (0, 1]");
  SamplingWeights w;
  w.shortness_ = std::move(values);
  w.finish();
  return w;
}

void SamplingWeights::finish() {
  if (shortness_.empty())
    throw std::invalid_argument("sampling weights need a nonempty corpus");
  const auto [lo, hi] = std::minmax_element(shortness_.begin(), shortness_.end());
  min_shortness_ = *lo;
  max_shortness_ = *hi;
  relative_.resize(shortness_.size());
  std::transform(shortness_.begin(), shortness_.end(), relative_.begin(),
                 [this](double s) { return s / max_shortness_; });
}

std::vector<double> SamplingWeights::probabilities(double lambda) const {
  std::vector<double> p(relative_.size());
  std::transform(relative_.begin(), relative_.end(), p.begin(),
                 [lambda](double r) { return std::pow(r, lambda); });
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& v : p) v /= total;
  return p;
}

double SamplingWeights::acceptance(std::size_t i, double lambda) const {
  return std::pow(relative_[i], lambda);
}

std::size_t draw_curriculum(const SamplingWeights& weights, double lambda,
                            Rng& rng, std::uint64_t* proposals) {
  if (weights.size() == 0)
    throw std::invalid_argument("draw_curriculum: empty corpus");
  if (lambda < 0.0)
    throw std::invalid_argument("draw_curriculum: lambda must be >= 0");
  std::uniform_int_distribution<std::size_t> pick(0, weights.size() - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (;;) {
    const std::size_t t = pick(rng);
    if (proposals) ++*proposals;
    if (lambda == 0.0) return t;
    if (coin(rng) < weights.acceptance(t, lambda)) return t;
  }
}

EpochShuffler::EpochShuffler(std::size_t corpus_size) : order_(corpus_size) {
  if (corpus_size == 0)
    throw std::invalid_argument("EpochShuffler: empty corpus");
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  cursor_ = corpus_size;  // forces a shuffle on the first draw
}

std::size_t EpochShuffler::next(Rng& rng) {
  if (cursor_ == order_.size()) {
    std::shuffle(order_.begin(), order_.end(), rng);
    cursor_ = 0;
    ++epochs_started_;
  }
  return order_[cursor_++];
}

}  // namespace curriculum
