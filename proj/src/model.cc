// src/model.cc

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

#include "curriculum/model.h"

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

namespace curriculum {

namespace {

using ConstMap = Eigen::Map<const Eigen::MatrixXd>;
using MutMap = Eigen::Map<Eigen::MatrixXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using MutVecMap = Eigen::Map<Eigen::VectorXd>;

// Offsets of each parameter block inside the flat vector.
struct Layout {
  Eigen::Index H, I, N;
  Eigen::Index dir_size;

  explicit Layout(const ModelConfig& c)
      : H(c.hidden_dim), I(c.input_dim), N(c.num_labels()),
        dir_size(4 * H * I + 4 * H * H + 4 * H) {}

  Eigen::Index wx(int d) const { return d * dir_size; }
  Eigen::Index wh(int d) const { return wx(d) + 4 * H * I; }
  Eigen::Index b(int d) const { return wh(d) + 4 * H * H; }
  Eigen::Index v() const { return 2 * dir_size; }
  Eigen::Index c() const { return v() + N * 2 * H; }
  Eigen::Index total() const { return c() + N; }
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Activations of one direction, stored by frame index.
struct DirectionCache {
  RowMatrix gates;  // T x 4H: i, f, o, g after their nonlinearities
  RowMatrix cell;   // T x H
  RowMatrix tanh_cell;
  RowMatrix hidden;
};

struct ForwardCache {
  DirectionCache dir[2];
  RowMatrix concat;     // T x 2H
  RowMatrix log_probs;  // T x N
};

void run_direction(const Eigen::VectorXd& params, const Layout& L, int d,
                   const RowMatrix& frames, DirectionCache& cache) {
  const Eigen::Index T = frames.rows();
  const Eigen::Index H = L.H;
  const ConstMap Wx(params.data() + L.wx(d), 4 * H, L.I);
  const ConstMap Wh(params.data() + L.wh(d), 4 * H, H);
  const ConstVecMap b(params.data() + L.b(d), 4 * H);

  cache.gates.noalias() = frames * Wx.transpose();
  cache.gates.rowwise() += b.transpose();
  cache.cell.resize(T, H);
  cache.tanh_cell.resize(T, H);
  cache.hidden.resize(T, H);

  Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd z(4 * H);
  for (Eigen::Index step = 0; step < T; ++step) {
    const Eigen::Index t = d == 0 ? step : T - 1 - step;
    z.noalias() = cache.gates.row(t).transpose() + Wh * h_prev;
    for (Eigen::Index k = 0; k < 3 * H; ++k) z[k] = sigmoid(z[k]);
    for (Eigen::Index k = 3 * H; k < 4 * H; ++k) z[k] = std::tanh(z[k]);
    cache.gates.row(t) = z.transpose();
    const auto i = z.segment(0, H).array();
    const auto f = z.segment(H, H).array();
    const auto o = z.segment(2 * H, H).array();
    const auto g = z.segment(3 * H, H).array();
    c_prev = (f * c_prev.array() + i * g).matrix();
    cache.cell.row(t) = c_prev.transpose();
    cache.tanh_cell.row(t) = c_prev.array().tanh().matrix().transpose();
    h_prev = (o * cache.tanh_cell.row(t).transpose().array()).matrix();
    cache.hidden.row(t) = h_prev.transpose();
  }
}

void check_frames(const ModelConfig& config, const RowMatrix& frames) {
  if (frames.rows() < 1)
    throw std::invalid_argument("model: need at least one frame");
  if (frames.cols() != config.input_dim)
    throw std::invalid_argument("model: frame width " +
                                std::to_string(frames.cols()) +
                                " does not match input_dim " +
                                std::to_string(config.input_dim));
}

void run_forward(const ModelState& state, const RowMatrix& frames,
                 ForwardCache& cache) {
  const ModelConfig& cfg = state.config();
  check_frames(cfg, frames);
  const Layout L(cfg);
  const auto& p = state.parameters();
  const Eigen::Index T = frames.rows();
  run_direction(p, L, 0, frames, cache.dir[0]);
  run_direction(p, L, 1, frames, cache.dir[1]);

  cache.concat.resize(T, 2 * L.H);
  cache.concat.leftCols(L.H) = cache.dir[0].hidden;
  cache.concat.rightCols(L.H) = cache.dir[1].hidden;

  const ConstMap V(p.data() + L.v(), L.N, 2 * L.H);
  const ConstVecMap c(p.data() + L.c(), L.N);
  cache.log_probs.noalias() = cache.concat * V.transpose();
  cache.log_probs.rowwise() += c.transpose();
  for (Eigen::Index t = 0; t < T; ++t) {
    auto row = cache.log_probs.row(t);
    const double hi = row.maxCoeff();
    const double lse = hi + std::log((row.array() - hi).exp().sum());
    row.array() -= lse;
  }
}

void backprop_direction(const Eigen::VectorXd& params, const Layout& L, int d,
                        const RowMatrix& frames, const DirectionCache& cache,
                        const RowMatrix& d_hidden, Eigen::VectorXd& grad) {
  const Eigen::Index T = frames.rows();
  const Eigen::Index H = L.H;
  const ConstMap Wh(params.data() + L.wh(d), 4 * H, H);

  RowMatrix dz(T, 4 * H);
  RowMatrix h_before(T, H);  // hidden state fed into frame t
  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(H);
  Eigen::ArrayXd dc_next = Eigen::ArrayXd::Zero(H);
  Eigen::ArrayXd zeros = Eigen::ArrayXd::Zero(H);

  for (Eigen::Index step = T - 1; step >= 0; --step) {
    const Eigen::Index t = d == 0 ? step : T - 1 - step;
    const bool first = step == 0;
    const Eigen::Index t_prev = d == 0 ? t - 1 : t + 1;

    const Eigen::ArrayXd c_prev =
        first ? zeros : cache.cell.row(t_prev).transpose().array();
    if (first)
      h_before.row(t).setZero();
    else
      h_before.row(t) = cache.hidden.row(t_prev);

    const auto z = cache.gates.row(t).transpose().array();
    const auto i = z.segment(0, H);
    const auto f = z.segment(H, H);
    const auto o = z.segment(2 * H, H);
    const auto g = z.segment(3 * H, H);
    const Eigen::ArrayXd tc = cache.tanh_cell.row(t).transpose().array();

    const Eigen::ArrayXd dh =
        d_hidden.row(t).transpose().array() + dh_next.array();
    const Eigen::ArrayXd dc = dh * o * (1.0 - tc * tc) + dc_next;

    auto dz_row = dz.row(t);
    dz_row.segment(0, H) = (dc * g * i * (1.0 - i)).matrix().transpose();
    dz_row.segment(H, H) = (dc * c_prev * f * (1.0 - f)).matrix().transpose();
    dz_row.segment(2 * H, H) = (dh * tc * o * (1.0 - o)).matrix().transpose();
    dz_row.segment(3 * H, H) = (dc * i * (1.0 - g * g)).matrix().transpose();

    dc_next = dc * f;
    dh_next.noalias() = Wh.transpose() * dz_row.transpose();
  }

  MutMap dWx(grad.data() + L.wx(d), 4 * H, L.I);
  MutMap dWh(grad.data() + L.wh(d), 4 * H, H);
  MutVecMap db(grad.data() + L.b(d), 4 * H);
  dWx.noalias() = dz.transpose() * frames;
  dWh.noalias() = dz.transpose() * h_before;
  db = dz.colwise().sum().transpose();
}

}  // namespace

void ModelConfig::validate() const {
  if (input_dim < 1 || hidden_dim < 1 || alphabet_size < 1)
    throw std::invalid_argument("model: dimensions must be >= 1");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("model: learning_rate must be > 0");
  if (!(init_scale >= 0.0))
    throw std::invalid_argument("model: init_scale must be >= 0");
}

bool operator==(const ModelConfig& a, const ModelConfig& b) {
  return a.input_dim == b.input_dim && a.hidden_dim == b.hidden_dim &&
         a.alphabet_size == b.alphabet_size && a.init_scale == b.init_scale &&
         a.forget_bias == b.forget_bias && a.learning_rate == b.learning_rate;
}

Eigen::Index parameter_count(const ModelConfig& config) {
  return Layout(config).total();
}

ModelState::ModelState(const ModelConfig& config, std::uint64_t init_seed)
    : config_(config), init_seed_(init_seed) {
  config_.validate();
  params_.resize(parameter_count(config_));
  std::mt19937_64 rng(init_seed);
  std::uniform_real_distribution<double> u(-config_.init_scale,
                                           config_.init_scale);
  for (Eigen::Index k = 0; k < params_.size(); ++k) params_[k] = u(rng);
  for (int d = 0; d < 2; ++d) {
    const auto [begin, end] = forget_bias_range(d);
    params_.segment(begin, end - begin).setConstant(config_.forget_bias);
  }
}

ModelState::ModelState(const ModelConfig& config, std::uint64_t init_seed,
                       Eigen::VectorXd parameters)
    : config_(config), init_seed_(init_seed), params_(std::move(parameters)) {
  config_.validate();
  if (params_.size() != parameter_count(config_))
    throw std::invalid_argument("model: parameter vector has wrong size");
}

std::pair<Eigen::Index, Eigen::Index> ModelState::forget_bias_range(
    int direction) const {
  const Layout L(config_);
  const Eigen::Index begin = L.b(direction) + L.H;
  return {begin, begin + L.H};
}

RowMatrix log_posteriors(const ModelState& state, const RowMatrix& frames) {
  ForwardCache cache;
  run_forward(state, frames, cache);
  return std::move(cache.log_probs);
}

PosteriorLattice forward(const ModelState& state, const RowMatrix& frames) {
  return PosteriorLattice{log_posteriors(state, frames).array().exp()};
}

LossAndGradient loss_and_gradient(const ModelState& state,
                                  const RowMatrix& frames,
                                  const LabelSequence& target) {
  ForwardCache cache;
  run_forward(state, frames, cache);
  const CtcResult ctc = ctc_loss_and_grad(cache.log_probs, target);

  const Layout L(state.config());
  const auto& p = state.parameters();
  LossAndGradient out;
  out.nll = ctc.nll;
  out.grad.resize(L.total());

  MutMap dV(out.grad.data() + L.v(), L.N, 2 * L.H);
  MutVecMap dc(out.grad.data() + L.c(), L.N);
  dV.noalias() = ctc.grad.transpose() * cache.concat;
  dc = ctc.grad.colwise().sum().transpose();

  const ConstMap V(p.data() + L.v(), L.N, 2 * L.H);
  const RowMatrix d_concat = ctc.grad * V;
  backprop_direction(p, L, 0, frames, cache.dir[0], d_concat.leftCols(L.H),
                     out.grad);
  backprop_direction(p, L, 1, frames, cache.dir[1], d_concat.rightCols(L.H),
                     out.grad);
  return out;
}

double sgd_step(ModelState& state, const RowMatrix& frames,
                const LabelSequence& target, double learning_rate) {
  const LossAndGradient lg = loss_and_gradient(state, frames, target);
  if (!std::isfinite(lg.nll) || !lg.grad.allFinite())
    throw NonFiniteError("sgd_step: non-finite loss or gradient (nll = " +
                         std::to_string(lg.nll) + ")");
  state.mutable_parameters() -= learning_rate * lg.grad;
  return lg.nll;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  nlohmann::json j;
  j["format"] = "ctc-curriculum-checkpoint";
  j["version"] = 1;
  j["config"] = {{"input_dim", ck.config.input_dim},
                 {"hidden_dim", ck.config.hidden_dim},
                 {"alphabet_size", ck.config.alphabet_size},
                 {"init_scale", ck.config.init_scale},
                 {"forget_bias", ck.config.forget_bias},
                 {"learning_rate", ck.config.learning_rate}};
  j["init_seed"] = ck.init_seed;
  j["parameters"] = std::vector<double>(
      ck.parameters.data(), ck.parameters.data() + ck.parameters.size());
  j["rng_state"] = ck.rng_state;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out << j.dump() << '\n';
  if (!out) throw std::runtime_error("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed checkpoint " + path + ": " + e.what());
  }
  if (j.value("format", "") != "ctc-curriculum-checkpoint" ||
      j.value("version", 0) != 1)
    throw std::runtime_error("unsupported checkpoint format in " + path);
  Checkpoint ck;
  const auto& c = j.at("config");
  ck.config.input_dim = c.at("input_dim").get<int>();
  ck.config.hidden_dim = c.at("hidden_dim").get<int>();
  ck.config.alphabet_size = c.at("alphabet_size").get<int>();
  ck.config.init_scale = c.at("init_scale").get<double>();
  ck.config.forget_bias = c.at("forget_bias").get<double>();
  ck.config.learning_rate = c.at("learning_rate").get<double>();
  ck.init_seed = j.at("init_seed").get<std::uint64_t>();
  const auto values = j.at("parameters").get<std::vector<double>>();
  ck.parameters = Eigen::Map<const Eigen::VectorXd>(
      values.data(), static_cast<Eigen::Index>(values.size()));
  ck.rng_state = j.at("rng_state").get<std::string>();
  if (ck.parameters.size() != parameter_count(ck.config))
    throw std::runtime_error("checkpoint parameter count mismatch in " + path);
  return ck;
}

}  // namespace curriculum
