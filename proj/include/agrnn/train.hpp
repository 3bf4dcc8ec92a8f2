#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "agrnn/bptt.hpp"
#include "agrnn/cells.hpp"
#include "agrnn/optim.hpp"
#include "agrnn/rng.hpp"

namespace agrnn {

// A training sequence and its target. For cross-entropy the target is a
// one-hot vector over the classes.
struct Sample {
  std::vector<Vector> xs;
  Vector target;
};

using Dataset = std::vector<Sample>;

enum class LossKind { Mse, CrossEntropy };

inline const char* to_string(LossKind k) {
  return k == LossKind::Mse ? "mse" : "cross_entropy";
}

struct TrainConfig {
  std::size_t batch_size = 64;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  LossKind loss_kind = LossKind::Mse;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Rescales the batch gradient to this L2 norm when exceeded.
  std::optional<double> clip_norm;
  // Stops after the first epoch whose test loss falls below this value.
  std::optional<double> stop_below_test_loss;
};

struct EpochMetrics {
  std::size_t epoch;
  std::string split;  // "train" or "test"
  double loss;
  double metric;      // mse for Mse, accuracy for CrossEntropy
};

struct TrainResult {
  CellParams params;
  ReadoutParams readout;
  std::vector<EpochMetrics> history;
};

struct Evaluation {
  double loss = 0.0;
  double metric = 0.0;
};

inline std::size_t argmax(const Vector& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

namespace detail {

struct SampleOutcome {
  double loss;
  bool correct;
};

inline SampleOutcome forward_loss(const CellParams& p, const ReadoutParams& r,
                                  const Sample& s, LossKind kind) {
  auto res = run_sequence(p, zero_state(p), s.xs, false);
  auto z = readout_pre(r, res.final_state.h);
  if (kind == LossKind::Mse) {
    auto y = apply_activation(r.activation, z);
    return {loss_mse(y, s.target), false};
  }
  const std::size_t label = argmax(s.target);
  return {loss_cross_entropy(z, label), argmax(z) == label};
}

// Loss and gradient for one sequence; `acc` receives scale * gradient.
inline SampleOutcome accumulate_sample(const CellParams& p,
                                       const ReadoutParams& r, const Sample& s,
                                       LossKind kind, Gradients& acc,
                                       double weight) {
  auto res = run_sequence(p, zero_state(p), s.xs, true);
  auto z = readout_pre(r, res.final_state.h);
  double loss;
  bool correct = false;
  Vector dz;
  if (kind == LossKind::Mse) {
    auto y = apply_activation(r.activation, z);
    loss = loss_mse(y, s.target);
    dz = readout_pre_grad(r, z, y, loss_mse_grad(y, s.target));
  } else {
    if (r.activation != ActivationKind::Softmax)
      throw std::invalid_argument("cross-entropy requires a softmax readout");
    const std::size_t label = argmax(s.target);
    loss = loss_cross_entropy(z, label);
    correct = argmax(z) == label;
    dz = softmax(z);
    dz[label] -= 1.0;
  }
  auto g = bptt(p, r, s.xs, res.traces, dz);
  add_scaled(acc, g, weight);
  return {loss, correct};
}

}  // namespace detail

inline Evaluation evaluate(const CellParams& p, const ReadoutParams& r,
                           const Dataset& data, LossKind kind) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty dataset");
  double loss = 0.0;
  std::size_t correct = 0;
  for (const auto& s : data) {
    auto o = detail::forward_loss(p, r, s, kind);
    loss += o.loss;
    correct += o.correct ? 1 : 0;
  }
  loss /= double(data.size());
  const double metric =
      kind == LossKind::Mse ? loss : double(correct) / double(data.size());
  return {loss, metric};
}

// Mini-batch Adam training. The sample order of each epoch is a seeded
// Fisher-Yates shuffle; the batch gradient is the mean over its sequences,
// summed in sample order. Train-split rows report the loss at epoch 0
// (before any update) and afterwards the mean mini-batch loss of the epoch.
inline TrainResult train(CellParams p, ReadoutParams r, const Dataset& train_set,
                         const TrainConfig& cfg,
                         const Dataset* test_set = nullptr) {
  if (train_set.empty()) throw std::invalid_argument("train: empty dataset");
  if (cfg.batch_size == 0) throw std::invalid_argument("train: batch_size must be >= 1");
  if (cfg.epochs == 0) throw std::invalid_argument("train: epochs must be >= 1");
  validate(p);

  TrainResult out;
  auto log_eval = [&](std::size_t epoch) {
    if (!test_set || test_set->empty()) return std::optional<Evaluation>();
    auto e = evaluate(p, r, *test_set, cfg.loss_kind);
    out.history.push_back({epoch, "test", e.loss, e.metric});
    return std::optional<Evaluation>(e);
  };

  {
    auto e = evaluate(p, r, train_set, cfg.loss_kind);
    out.history.push_back({0, "train", e.loss, e.metric});
    log_eval(0);
  }

  Rng rng(cfg.seed);
  AdamState adam =
      AdamState::for_params(p, r, cfg.lr, cfg.beta1, cfg.beta2, cfg.epsilon);
  std::vector<std::size_t> order(train_set.size());

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double w = 1.0 / double(end - start);
      Gradients g = Gradients::zeros_like(p, r);
      for (std::size_t k = start; k < end; ++k) {
        const auto& s = train_set[order[k]];
        const auto o = detail::accumulate_sample(p, r, s, cfg.loss_kind, g, w);
        if (!std::isfinite(o.loss)) {
          throw std::runtime_error(
              "train: non-finite loss at epoch " + std::to_string(epoch) +
              ", batch starting at " + std::to_string(start) + " (sample " +
              std::to_string(order[k]) + ")");
        }
        loss_sum += o.loss;
        correct += o.correct ? 1 : 0;
      }
      if (cfg.clip_norm) {
        const double norm = l2_norm(g);
        if (norm > *cfg.clip_norm) scale(g, *cfg.clip_norm / norm);
      }
      adam_step(adam, p, r, g);
    }
    const double train_loss = loss_sum / double(train_set.size());
    out.history.push_back({epoch, "train", train_loss,
                           cfg.loss_kind == LossKind::Mse
                               ? train_loss
                               : double(correct) / double(train_set.size())});
    auto e = log_eval(epoch);
    if (e && cfg.stop_below_test_loss && e->loss < *cfg.stop_below_test_loss) break;
  }

  out.params = std::move(p);
  out.readout = std::move(r);
  return out;
}

// CSV schema: epoch,split,loss,metric
inline void write_history_csv(std::ostream& os,
                              const std::vector<EpochMetrics>& history) {
  os << "epoch,split,loss,metric\n";
  os.precision(17);
  for (const auto& m : history) {
    os << m.epoch << ',' << m.split << ',' << m.loss << ',';
    if (std::isfinite(m.metric)) os << m.metric;
    os << '\n';
  }
}

inline void write_history_csv(const std::string& path,
                              const std::vector<EpochMetrics>& history) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_history_csv(os, history);
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace agrnn
