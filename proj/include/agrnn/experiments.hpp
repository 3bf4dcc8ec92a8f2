#pragma once

#include <cstddef>
#include <cstdio>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <ostream>
#include <string>
#include <vector>

#include "agrnn/cells.hpp"
#include "agrnn/mnist.hpp"
#include "agrnn/tasks.hpp"
#include "agrnn/train.hpp"

namespace agrnn {

enum class Task { Adding, Mnist };

inline const char* to_string(Task t) { return t == Task::Adding ? "adding" : "mnist"; }

inline Task task_from_string(const std::string& s) {
  if (s == "adding") return Task::Adding;
  if (s == "mnist") return Task::Mnist;
  throw std::invalid_argument("unknown task '" + s + "' (expected adding or mnist)");
}

struct ExperimentConfig {
  Task task = Task::Adding;
  CellKind cell = CellKind::AGru;
  std::size_t units = 16;
  std::size_t length = 100;  // adding only; mnist is 28 rows
  std::size_t train_size = 4000;
  std::size_t test_size = 1000;
  std::size_t trials = 5;
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  double lr = 0.01;
  std::optional<double> clip_norm = 1.0;
  InitOptions init{.recurrent_scale = 0.0, .update_bias = 0.0};
  std::optional<double> stop_below_test_loss;
  std::uint64_t data_seed = 1234;   // dataset draw (adding) or subset (mnist)
  std::uint64_t first_trial_seed = 1;
  bool paper_scale = false;
};

// Desk-scale adding run: 4000 / 1000 sequences of length 100, 5 trials.
inline ExperimentConfig adding_defaults(CellKind cell, bool paper_scale = false) {
  ExperimentConfig c;
  c.task = Task::Adding;
  c.cell = cell;
  c.paper_scale = paper_scale;
  if (paper_scale) {
    c.train_size = 20000;
    c.test_size = 5000;
    c.trials = 20;
  }
  return c;
}

// Desk-scale row-wise MNIST: 2000 / 500 from the bundled subset, 3 trials.
inline ExperimentConfig mnist_defaults(CellKind cell) {
  ExperimentConfig c;
  c.task = Task::Mnist;
  c.cell = cell;
  c.units = 32;
  c.length = kMnistSide;
  c.train_size = 2000;
  c.test_size = 500;
  c.trials = 3;
  c.epochs = 5;
  c.batch_size = 16;
  c.lr = 0.005;
  c.data_seed = 7;
  return c;
}

namespace detail {

inline std::string fmt_g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

}  // namespace detail

inline std::string describe(const ExperimentConfig& c) {
  std::string s = std::string(to_string(c.task)) + " " + to_string(c.cell) +
                  " | scale " + (c.paper_scale ? "paper" : "desk") + ": " +
                  std::to_string(c.train_size) + " train / " +
                  std::to_string(c.test_size) + " test, " +
                  std::to_string(c.trials) + " trials | units " +
                  std::to_string(c.units) + ", length " + std::to_string(c.length) +
                  ", epochs <= " + std::to_string(c.epochs) + ", batch " +
                  std::to_string(c.batch_size) + ", lr " + detail::fmt_g(c.lr);
  s += c.clip_norm ? ", clip " + detail::fmt_g(*c.clip_norm) : ", no clip";
  s += ", recurrent init x" + detail::fmt_g(c.init.recurrent_scale);
  s += " | data seed " + std::to_string(c.data_seed) + ", trial seeds " +
       std::to_string(c.first_trial_seed) + ".." +
       std::to_string(c.first_trial_seed + c.trials - 1);
  return s;
}

struct ExperimentData {
  Dataset train;
  Dataset test;
};

inline ExperimentData make_adding_data(const ExperimentConfig& c) {
  Rng rng(c.data_seed);
  ExperimentData d;
  d.train = adding_dataset(gen_adding_set(rng, c.length, c.train_size));
  d.test = adding_dataset(gen_adding_set(rng, c.length, c.test_size));
  return d;
}

inline ExperimentData make_mnist_data(const ExperimentConfig& c,
                                      const std::vector<MnistSample>& all) {
  auto split = mnist_subset(all, c.train_size, c.test_size, c.data_seed);
  return {mnist_dataset(split.train), mnist_dataset(split.test)};
}

struct TrialResult {
  std::uint64_t seed;
  TrainResult run;
  double final_test_loss;
  double final_test_metric;  // mse (adding) or accuracy (mnist)
  std::size_t epochs_run;
};

inline TrialResult run_trial(const ExperimentConfig& c, const ExperimentData& d,
                             std::uint64_t seed) {
  if (d.train.empty() || d.test.empty())
    throw std::invalid_argument("run_trial: train and test sets must be non-empty");
  const std::size_t in = d.train.front().xs.front().size();
  const std::size_t out = d.train.front().target.size();
  Rng init(seed);
  auto p = make_cell_params(c.cell, in, c.units);
  init_glorot(p, init, c.init);
  auto r = make_readout(c.units, out,
                        c.task == Task::Mnist ? ActivationKind::Softmax
                                              : ActivationKind::Identity);
  init_glorot(r, init);

  TrainConfig tc;
  tc.batch_size = c.batch_size;
  tc.epochs = c.epochs;
  tc.seed = seed;
  tc.lr = c.lr;
  tc.loss_kind = c.task == Task::Mnist ? LossKind::CrossEntropy : LossKind::Mse;
  tc.clip_norm = c.clip_norm;
  tc.stop_below_test_loss = c.stop_below_test_loss;

  TrialResult t{seed, train(std::move(p), std::move(r), d.train, tc, &d.test), 0, 0, 0};
  const auto& last = t.run.history.back();
  t.final_test_loss = last.loss;
  t.final_test_metric = last.metric;
  t.epochs_run = last.epoch;
  return t;
}

// Runs every trial; `on_trial` sees each result as it finishes.
inline std::vector<TrialResult> run_experiment(
    const ExperimentConfig& c, const ExperimentData& d,
    const std::function<void(const TrialResult&)>& on_trial = {}) {
  std::vector<TrialResult> out;
  for (std::size_t k = 0; k < c.trials; ++k) {
    out.push_back(run_trial(c, d, c.first_trial_seed + k));
    if (on_trial) on_trial(out.back());
  }
  return out;
}

}  // namespace agrnn
