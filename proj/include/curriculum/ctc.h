// curriculum/ctc.h

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

#ifndef CURRICULUM_CTC_H_
#define CURRICULUM_CTC_H_

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace curriculum {

/// Ordered character label ids in [0, N-2]. The blank (N-1) never appears.
using LabelSequence = std::vector<int>;

/// Row-major storage keeps one frame contiguous.
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// T x N per-frame label posteriors; column N-1 is the blank.
struct PosteriorLattice {
  RowMatrix probs;

  int frames() const { return static_cast<int>(probs.rows()); }
  int labels() const { return static_cast<int>(probs.cols()); }
  int blank() const { return labels() - 1; }
};

/// Raised when a target cannot be aligned to the available frames.
class InfeasibleTarget : public std::invalid_argument {
 public:
  InfeasibleTarget(int frames, int required);
  int frames() const { return frames_; }
  int required() const { return required_; }

 private:
  int frames_;
  int required_;
};

/// Minimum number of frames CTC needs for `target`: its length plus one
/// blank between each pair of equal adjacent labels.
int min_frames(const LabelSequence& target);

/// Throws std::invalid_argument unless rows are stochastic (1e-9), T >= 1
/// and N >= 2.
void validate_lattice(const PosteriorLattice& lattice);

/// -log p(target | lattice), summed over every blank-augmented alignment.
/// Returns +inf when all alignments have zero probability; throws
/// InfeasibleTarget when the target is too long for the lattice.
double ctc_nll(const PosteriorLattice& lattice, const LabelSequence& target);

/// Gradient of ctc_nll with respect to the pre-softmax activations that
/// produced `lattice`: softmax - state occupancy. Rows sum to zero.
RowMatrix ctc_grad(const PosteriorLattice& lattice, const LabelSequence& target);

struct CtcResult {
  double nll = 0.0;
  RowMatrix grad;  // d nll / d activations, T x N
};

/// Loss and activation gradient from per-frame log posteriors (T x N).
/// This is the path used in training; the lattice overloads wrap it.
CtcResult ctc_loss_and_grad(const RowMatrix& log_probs,
                            const LabelSequence& target);

/// Loss only; skips the backward pass.
double ctc_nll_log(const RowMatrix& log_probs, const LabelSequence& target);

/// Per-frame argmax (lowest id wins ties), repeats collapsed, blanks removed.
LabelSequence best_path_decode(const PosteriorLattice& lattice);

/// Same decode over any per-frame scores monotone in the posteriors, e.g.
/// log posteriors. The last column is the blank.
LabelSequence best_path_decode(const RowMatrix& scores);

/// Collapse rule applied to an explicit frame-level label path.
LabelSequence collapse_path(const std::vector<int>& path, int blank);

}  // namespace curriculum

#endif  // CURRICULUM_CTC_H_
