// src/ctc.cc

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

#include "curriculum/ctc.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace curriculum {

namespace {

constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline double log_add(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

// Blank-augmented sequence: blank, y1, blank, y2, ..., blank.
std::vector<int> augment(const LabelSequence& target, int blank) {
  std::vector<int> ext(2 * target.size() + 1, blank);
  for (std::size_t i = 0; i < target.size(); ++i) ext[2 * i + 1] = target[i];
  return ext;
}

void check_labels(const LabelSequence& target, int num_labels) {
  for (int y : target)
    if (y < 0 || y >= num_labels - 1)
      throw std::invalid_argument("ctc: label " + std::to_string(y) +
                                  " outside [0, N-2]");
}

// Forward variables, log space. alpha(t, s) includes the emission at t.
RowMatrix forward_pass(const RowMatrix& log_probs, const std::vector<int>& ext) {
  const int T = static_cast<int>(log_probs.rows());
  const int S = static_cast<int>(ext.size());
  RowMatrix alpha = RowMatrix::Constant(T, S, kLogZero);
  alpha(0, 0) = log_probs(0, ext[0]);
  if (S > 1) alpha(0, 1) = log_probs(0, ext[1]);
  for (int t = 1; t < T; ++t) {
    const int s_begin = std::max(0, S - 2 * (T - t));
    const int s_end = std::min(S, 2 * (t + 1));
    for (int s = s_begin; s < s_end; ++s) {
      double acc = alpha(t - 1, s);
      if (s > 0) acc = log_add(acc, alpha(t - 1, s - 1));
      if (s > 1 && ext[s] != ext[s - 2]) acc = log_add(acc, alpha(t - 1, s - 2));
      if (acc != kLogZero) alpha(t, s) = acc + log_probs(t, ext[s]);
    }
  }
  return alpha;
}

// Backward variables, log space. beta(t, s) excludes the emission at t.
RowMatrix backward_pass(const RowMatrix& log_probs, const std::vector<int>& ext) {
  const int T = static_cast<int>(log_probs.rows());
  const int S = static_cast<int>(ext.size());
  RowMatrix beta = RowMatrix::Constant(T, S, kLogZero);
  beta(T - 1, S - 1) = 0.0;
  if (S > 1) beta(T - 1, S - 2) = 0.0;
  for (int t = T - 2; t >= 0; --t) {
    const int s_begin = std::max(0, S - 2 * (T - t));
    const int s_end = std::min(S, 2 * (t + 1));
    for (int s = s_begin; s < s_end; ++s) {
      double acc = beta(t + 1, s) + log_probs(t + 1, ext[s]);
      if (s + 1 < S)
        acc = log_add(acc, beta(t + 1, s + 1) + log_probs(t + 1, ext[s + 1]));
      if (s + 2 < S && ext[s + 2] != ext[s])
        acc = log_add(acc, beta(t + 1, s + 2) + log_probs(t + 1, ext[s + 2]));
      beta(t, s) = acc;
    }
  }
  return beta;
}

double total_log_prob(const RowMatrix& alpha) {
  const int T = static_cast<int>(alpha.rows());
  const int S = static_cast<int>(alpha.cols());
  double lp = alpha(T - 1, S - 1);
  if (S > 1) lp = log_add(lp, alpha(T - 1, S - 2));
  return lp;
}

void check_feasible(const RowMatrix& log_probs, const LabelSequence& target) {
  if (log_probs.rows() < 1 || log_probs.cols() < 2)
    throw std::invalid_argument("ctc: need T >= 1 frames and N >= 2 labels");
  check_labels(target, static_cast<int>(log_probs.cols()));
  const int required = min_frames(target);
  if (log_probs.rows() < required)
    throw InfeasibleTarget(static_cast<int>(log_probs.rows()), required);
}

RowMatrix safe_log(const RowMatrix& probs) {
  return probs.unaryExpr([](double p) { return p > 0.0 ? std::log(p) : kLogZero; });
}

}  // namespace

InfeasibleTarget::InfeasibleTarget(int frames, int required)
    : std::invalid_argument("ctc: target needs " + std::to_string(required) +
                            " frames but only " + std::to_string(frames) +
                            " are available"),
      frames_(frames),
      required_(required) {}

int min_frames(const LabelSequence& target) {
  int required = static_cast<int>(target.size());
  for (std::size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++required;
  return required;
}

void validate_lattice(const PosteriorLattice& lattice) {
  if (lattice.frames() < 1 || lattice.labels() < 2)
    throw std::invalid_argument("lattice needs T >= 1 and N >= 2");
  for (int t = 0; t < lattice.frames(); ++t) {
    const auto row = lattice.probs.row(t);
    if (row.minCoeff() < 0.0 || row.maxCoeff() > 1.0)
      throw std::invalid_argument("lattice entries must lie in [0, 1]");
    if (std::abs(row.sum() - 1.0) > 1e-9)
      throw std::invalid_argument("lattice row " + std::to_string(t) +
                                  " does not sum to 1");
  }
}

double ctc_nll_log(const RowMatrix& log_probs, const LabelSequence& target) {
  check_feasible(log_probs, target);
  const auto ext = augment(target, static_cast<int>(log_probs.cols()) - 1);
  return -total_log_prob(forward_pass(log_probs, ext));
}

CtcResult ctc_loss_and_grad(const RowMatrix& log_probs,
                            const LabelSequence& target) {
  check_feasible(log_probs, target);
  const int T = static_cast<int>(log_probs.rows());
  const int N = static_cast<int>(log_probs.cols());
  const auto ext = augment(target, N - 1);
  const int S = static_cast<int>(ext.size());

  const RowMatrix alpha = forward_pass(log_probs, ext);
  const RowMatrix beta = backward_pass(log_probs, ext);
  const double log_p = total_log_prob(alpha);

  CtcResult out;
  out.nll = -log_p;
  out.grad = log_probs.array().exp();
  if (log_p == kLogZero) {
    out.grad.setConstant(std::numeric_limits<double>::quiet_NaN());
    return out;
  }
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      const double ab = alpha(t, s) + beta(t, s);
      if (ab == kLogZero) continue;
      out.grad(t, ext[s]) -= std::exp(ab - log_p);
    }
  }
  return out;
}

double ctc_nll(const PosteriorLattice& lattice, const LabelSequence& target) {
  return ctc_nll_log(safe_log(lattice.probs), target);
}

RowMatrix ctc_grad(const PosteriorLattice& lattice, const LabelSequence& target) {
  return ctc_loss_and_grad(safe_log(lattice.probs), target).grad;
}

LabelSequence collapse_path(const std::vector<int>& path, int blank) {
  LabelSequence out;
  int prev = -1;
  for (int k : path) {
    if (k != prev && k != blank) out.push_back(k);
    prev = k;
  }
  return out;
}

LabelSequence best_path_decode(const RowMatrix& scores) {
  std::vector<int> path(scores.rows());
  for (Eigen::Index t = 0; t < scores.rows(); ++t) {
    int best = 0;
    for (Eigen::Index k = 1; k < scores.cols(); ++k)
      if (scores(t, k) > scores(t, best)) best = static_cast<int>(k);
    path[t] = best;
  }
  return collapse_path(path, static_cast<int>(scores.cols()) - 1);
}

LabelSequence best_path_decode(const PosteriorLattice& lattice) {
  return best_path_decode(lattice.probs);
}

}  // namespace curriculum
