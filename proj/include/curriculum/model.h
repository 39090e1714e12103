// curriculum/model.h

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

#ifndef CURRICULUM_MODEL_H_
#define CURRICULUM_MODEL_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "curriculum/ctc.h"

namespace curriculum {

struct ModelConfig {
  int input_dim = 16;
  int hidden_dim = 32;     // per direction
  int alphabet_size = 20;  // character labels; the output layer adds a blank
  double init_scale = 0.1;
  double forget_bias = 1.0;
  double learning_rate = 0.001;

  int num_labels() const { return alphabet_size + 1; }
  /// Throws std::invalid_argument on nonpositive sizes or learning rate.
  void validate() const;
};

bool operator==(const ModelConfig& a, const ModelConfig& b);

/// Number of trainable parameters for `config`.
Eigen::Index parameter_count(const ModelConfig& config);

/// Bidirectional LSTM encoder with a softmax output layer. Every parameter
/// lives in one flat vector; the layout is
///   for dir in {forward, backward}:  W_x (4H x I), W_h (4H x H), b (4H)
///   V (N x 2H), c (N)
/// with matrices column-major and gate blocks ordered input, forget,
/// output, candidate.
class ModelState {
 public:
  /// Uniform init in [-init_scale, init_scale]; forget-gate biases are set
  /// to config.forget_bias.
  ModelState(const ModelConfig& config, std::uint64_t init_seed);

  /// Adopts an existing parameter vector (e.g. from a checkpoint).
  ModelState(const ModelConfig& config, std::uint64_t init_seed,
             Eigen::VectorXd parameters);

  const ModelConfig& config() const { return config_; }
  std::uint64_t init_seed() const { return init_seed_; }
  const Eigen::VectorXd& parameters() const { return params_; }
  Eigen::VectorXd& mutable_parameters() { return params_; }

  /// Index range [begin, end) of the forget-gate biases of one direction.
  std::pair<Eigen::Index, Eigen::Index> forget_bias_range(int direction) const;

 private:
  ModelConfig config_;
  std::uint64_t init_seed_;
  Eigen::VectorXd params_;
};

/// Per-frame log posteriors (T x N). Deterministic in (state, frames).
RowMatrix log_posteriors(const ModelState& state, const RowMatrix& frames);

/// Softmax posteriors as a lattice; each row sums to 1.
PosteriorLattice forward(const ModelState& state, const RowMatrix& frames);

struct LossAndGradient {
  double nll = 0.0;
  Eigen::VectorXd grad;  // same layout as ModelState::parameters()
};

/// CTC NLL of `target` and its gradient with respect to every parameter.
/// Throws InfeasibleTarget for targets too long for the frames.
LossAndGradient loss_and_gradient(const ModelState& state,
                                  const RowMatrix& frames,
                                  const LabelSequence& target);

/// Raised when a loss or gradient is NaN or infinite.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One plain SGD update on a single sample; returns the pre-update NLL.
/// Parameters are untouched when NonFiniteError is thrown.
double sgd_step(ModelState& state, const RowMatrix& frames,
                const LabelSequence& target, double learning_rate);

/// Checkpoint: config, init seed, flat parameters, and an opaque random
/// stream state supplied by the trainer.
struct Checkpoint {
  ModelConfig config;
  std::uint64_t init_seed = 0;
  Eigen::VectorXd parameters;
  std::string rng_state;
};

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace curriculum

#endif  // CURRICULUM_MODEL_H_
