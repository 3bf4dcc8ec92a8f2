#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "agrnn/agrnn.hpp"

#ifndef AGRNN_DATA_DIR
#define AGRNN_DATA_DIR "data"
#endif

namespace agrnn::cli {

enum ExitCode { kOk = 0, kValidation = 1, kRuntime = 2 };

inline std::string fmt(double x, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

inline void require_arg(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

inline std::string default_mnist_dir() { return std::string(AGRNN_DATA_DIR) + "/mnist"; }

inline std::vector<MnistSample> load_bundled_mnist(const std::string& dir) {
  const std::string img = dir + "/mnist5k-images-idx3-ubyte";
  const std::string lab = dir + "/mnist5k-labels-idx1-ubyte";
  for (const auto& p : {img, lab}) {
    if (!std::filesystem::exists(p))
      throw std::runtime_error("MNIST file not found: " + p +
                               " (run tools/make_mnist_subset.py or pass --mnist-dir)");
  }
  return load_mnist_idx(img, lab);
}

// ---------------------------------------------------------------------------
// solve

struct SolveArgs {
  std::size_t n = 100;
  std::size_t count = 1000;
  double a = kDefaultGateMagnitude;
  std::uint64_t seed = 0;
  std::int64_t int_scale = 0;  // 0: float64 path
};

inline int cmd_solve(const SolveArgs& s, std::ostream& out) {
  require_arg(s.n >= 2 && s.n % 2 == 0,
              "--n must be even and >= 2 (got " + std::to_string(s.n) + ")");
  require_arg(s.count >= 1, "--count must be >= 1");
  const CellParams solver = handcrafted_solver(s.a);
  if (s.int_scale) require_power_of_two(s.int_scale);

  out << "agrnn solve | n " << s.n << ", count " << s.count << ", a " << fmt(s.a)
      << ", seed " << s.seed << ", "
      << (s.int_scale ? "fixed point S=" + std::to_string(s.int_scale) : std::string("float64"))
      << '\n';
  Rng rng(s.seed);
  double max_err = 0.0, sse = 0.0;
  for (std::size_t k = 0; k < s.count; ++k) {
    const auto inst = gen_adding(rng, s.n);
    const double pred = s.int_scale ? run_handcrafted_int(s.a, inst, s.int_scale)
                                    : solve_handcrafted(solver, inst);
    const double e = std::fabs(pred - inst.target);
    max_err = std::max(max_err, e);
    sse += e * e;
  }
  const double tol = s.int_scale ? 2.0 * double(s.n) / double(s.int_scale) : 1e-12;
  out << "max_abs_error " << fmt(max_err, "%.6g") << '\n';
  out << "mse " << fmt(sse / double(s.count), "%.6g") << '\n';
  const bool ok = max_err <= tol;
  out << (ok ? "exact" : "NOT exact") << " within " << fmt(tol, "%g") << '\n';
  return ok ? kOk : kRuntime;
}

// ---------------------------------------------------------------------------
// gen-adding

struct GenArgs {
  std::size_t n = 100;
  std::size_t count = 1000;
  std::uint64_t seed = 0;
  std::string out_path;
};

inline int cmd_gen(const GenArgs& g, std::ostream& out) {
  require_arg(g.n >= 2 && g.n % 2 == 0, "--n must be even and >= 2");
  require_arg(g.count >= 1, "--count must be >= 1");
  out << "agrnn gen-adding | n " << g.n << ", count " << g.count << ", seed " << g.seed
      << '\n';
  Rng rng(g.seed);
  auto set = gen_adding_set(rng, g.n, g.count);
  write_adding_csv(g.out_path, set);
  out << "wrote " << set.size() << " instances to " << g.out_path << '\n';
  out << "naive baseline mse " << fmt(naive_baseline_mse(set)) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string task = "adding";
  std::vector<std::string> cells{"agru"};
  bool paper_scale = false;
  std::string history;
  std::string save;
  std::string mnist_dir = default_mnist_dir();
  // Overrides; applied only when given on the command line.
  std::optional<std::size_t> units, length, train_size, test_size, trials, epochs, batch;
  std::optional<double> lr, clip, recurrent_init, update_bias, stop_below;
  std::optional<std::uint64_t> seed, trial_seed;
};

inline ExperimentConfig resolve(const TrainArgs& a, CellKind cell) {
  const Task task = task_from_string(a.task);
  if (task == Task::Mnist && a.paper_scale)
    throw std::invalid_argument(
        "--paper-scale is only defined for the adding task (the bundled MNIST "
        "subset has 5000 images)");
  ExperimentConfig c = task == Task::Adding ? adding_defaults(cell, a.paper_scale)
                                            : mnist_defaults(cell);
  if (a.units) c.units = *a.units;
  if (a.length) {
    require_arg(task == Task::Adding, "--length applies to the adding task only");
    c.length = *a.length;
  }
  if (a.train_size) c.train_size = *a.train_size;
  if (a.test_size) c.test_size = *a.test_size;
  if (a.trials) c.trials = *a.trials;
  if (a.epochs) c.epochs = *a.epochs;
  if (a.batch) c.batch_size = *a.batch;
  if (a.lr) c.lr = *a.lr;
  if (a.clip) c.clip_norm = *a.clip > 0 ? std::optional<double>(*a.clip) : std::nullopt;
  if (a.recurrent_init) c.init.recurrent_scale = *a.recurrent_init;
  if (a.update_bias) c.init.update_bias = *a.update_bias;
  if (a.stop_below) c.stop_below_test_loss = *a.stop_below;
  if (a.seed) c.data_seed = *a.seed;
  if (a.trial_seed) c.first_trial_seed = *a.trial_seed;

  require_arg(c.units >= 1, "--units must be >= 1");
  require_arg(c.length >= 2 && c.length % 2 == 0, "--length must be even and >= 2");
  require_arg(c.train_size >= 1 && c.test_size >= 1, "dataset sizes must be >= 1");
  require_arg(c.trials >= 1, "--trials must be >= 1");
  require_arg(c.epochs >= 1, "--epochs must be >= 1");
  require_arg(c.batch_size >= 1, "--batch-size must be >= 1");
  require_arg(std::isfinite(c.lr) && c.lr >= 0.0, "--lr must be finite and >= 0");
  return c;
}

inline int cmd_train(const TrainArgs& a, std::ostream& out) {
  require_arg(!a.cells.empty(), "--cell needs at least one kind");
  std::vector<ExperimentConfig> configs;
  for (const auto& name : a.cells) configs.push_back(resolve(a, cell_kind_from_string(name)));
  require_arg(a.save.empty() || configs.size() == 1, "--save takes a single --cell");
  const Task task = configs.front().task;

  std::vector<MnistSample> mnist;
  if (task == Task::Mnist) {
    mnist = load_bundled_mnist(a.mnist_dir);
    require_arg(configs.front().train_size + configs.front().test_size <= mnist.size(),
                "train + test size exceeds the " + std::to_string(mnist.size()) +
                    " available MNIST images");
  }

  struct Summary {
    std::string cell;
    double best, mean;
  };
  std::vector<Summary> summaries;
  for (const auto& c : configs) {
    out << "agrnn train | " << describe(c) << '\n';
    if (!c.paper_scale && task == Task::Adding)
      out << "  (desk scale; --paper-scale restores 20000 train / 5000 test, 20 trials)\n";
    const ExperimentData data =
        task == Task::Adding ? make_adding_data(c) : make_mnist_data(c, mnist);

    const char* metric = task == Task::Adding ? "test_mse" : "test_accuracy";
    auto trials = run_experiment(c, data, [&](const TrialResult& t) {
      out << "  trial seed " << t.seed << ": epochs " << t.epochs_run << ", " << metric
          << ' ' << fmt(t.final_test_metric) << '\n';
      if (!a.history.empty()) {
        const std::string path = a.history + "_" + to_string(c.cell) + "_seed" +
                                 std::to_string(t.seed) + ".csv";
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
        write_history_csv(os, t.run.history);
      }
    });

    std::size_t best = 0;
    double sum = 0.0;
    for (std::size_t k = 0; k < trials.size(); ++k) {
      sum += trials[k].final_test_metric;
      const bool better = task == Task::Adding
                              ? trials[k].final_test_metric < trials[best].final_test_metric
                              : trials[k].final_test_metric > trials[best].final_test_metric;
      if (better) best = k;
    }
    const double mean = sum / double(trials.size());
    summaries.push_back({to_string(c.cell), trials[best].final_test_metric, mean});
    out << "  " << to_string(c.cell) << " best " << metric << ' '
        << fmt(trials[best].final_test_metric) << ", mean " << fmt(mean) << '\n';
    if (task == Task::Adding) {
      double base = 0.0;
      for (const auto& s : data.test) base += (s.target[0] - 1.0) * (s.target[0] - 1.0);
      out << "  naive baseline: " << fmt(base / double(data.test.size()))
          << " on this test set (0.1667 expected)\n";
    }
    if (!a.save.empty()) {
      save_params(a.save, trials[best].run.params, &trials[best].run.readout);
      out << "  saved best trial (seed " << trials[best].seed << ") to " << a.save << '\n';
    }
  }
  if (summaries.size() > 1) {
    out << "comparison (" << (task == Task::Adding ? "best test mse" : "mean test accuracy")
        << "):";
    for (const auto& s : summaries)
      out << ' ' << s.cell << ' ' << fmt(task == Task::Adding ? s.best : s.mean);
    out << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string params;
  std::string task = "adding";
  std::size_t length = 100;
  std::size_t count = 1000;
  std::uint64_t seed = 99;
  std::string mnist_dir = default_mnist_dir();
};

inline int cmd_eval(const EvalArgs& e, std::ostream& out) {
  const Task task = task_from_string(e.task);
  require_arg(e.count >= 1, "--count must be >= 1");
  auto loaded = load_params(e.params);
  if (!loaded.readout)
    throw std::runtime_error("'" + e.params + "' has no readout; save it from `train --save`");
  out << "agrnn eval | " << e.params << " (" << to_string(loaded.cell.kind) << ", "
      << loaded.cell.units << " units) on " << to_string(task);
  Dataset data;
  if (task == Task::Adding) {
    require_arg(e.length >= 2 && e.length % 2 == 0, "--length must be even and >= 2");
    out << ", " << e.count << " fresh sequences of length " << e.length << ", seed "
        << e.seed << '\n';
    Rng rng(e.seed);
    data = adding_dataset(gen_adding_set(rng, e.length, e.count));
  } else {
    auto cfg = mnist_defaults(loaded.cell.kind);
    out << ", desk test split (" << cfg.test_size << " images, subset seed "
        << cfg.data_seed << ")\n";
    data = make_mnist_data(cfg, load_bundled_mnist(e.mnist_dir)).test;
  }
  require_arg(data.front().xs.front().size() == loaded.cell.input_dim,
              "parameter input width does not match the task");
  const auto ev = evaluate(loaded.cell, *loaded.readout, data,
                           task == Task::Adding ? LossKind::Mse : LossKind::CrossEntropy);
  if (task == Task::Adding)
    out << "test_mse " << fmt(ev.metric) << " (naive baseline 0.1667)\n";
  else
    out << "test_accuracy " << fmt(ev.metric) << ", loss " << fmt(ev.loss) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// bench / cost

struct BenchArgs {
  std::size_t n = 100;
  std::size_t iters = 200;
  std::size_t warmup = 20;
  std::size_t inner = 16;
  std::size_t reps = 1;
  std::uint64_t seed = 0;
  std::string out_path;
};

inline int cmd_bench(const BenchArgs& b, std::ostream& out) {
  require_arg(b.n >= 2 && b.n % 2 == 0, "--n must be even and >= 2");
  require_arg(b.iters >= kMinIterations,
              "--iters must be >= " + std::to_string(kMinIterations));
  require_arg(b.reps >= 1 && b.inner >= 1, "--reps and --inner must be >= 1");
  out << "agrnn bench | n " << b.n << ", iters " << b.iters << ", warmup " << b.warmup
      << ", inner " << b.inner << ", reps " << b.reps << ", seed " << b.seed << " | "
      << build_fingerprint() << ", single thread\n";
  if (!optimized_build()) out << "WARNING: unoptimized build; timings are not representative\n";

  BenchConfig cfg;
  cfg.n = b.n;
  cfg.iterations = b.iters;
  cfg.warmup = b.warmup;
  cfg.inner = b.inner;
  cfg.seed = b.seed;
  std::vector<TimingReport> all;
  bool ordered = true;
  for (std::size_t r = 0; r < b.reps; ++r) {
    auto rs = bench_solvers(cfg);
    const double dot = rs[0].median_ns, add = rs[1].median_ns, mul = rs[2].median_ns;
    out << "rep " << r + 1 << ": median ns dot " << fmt(dot, "%.1f") << ", agnu "
        << fmt(add, "%.1f") << ", gnu " << fmt(mul, "%.1f") << " | add/mul ratio "
        << fmt(add / mul, "%.3f") << '\n';
    ordered = ordered && dot <= add && add < mul;
    all.insert(all.end(), rs.begin(), rs.end());
  }
  out << "ordering dot <= agnu < gnu: " << (ordered ? "held" : "violated") << " in "
      << (ordered ? "every" : "at least one") << " repetition\n";
  if (b.out_path.empty()) {
    emit_report_csv(out, all);
  } else {
    emit_report_csv(all, b.out_path);
    out << "wrote " << all.size() << " rows to " << b.out_path << '\n';
  }
  return kOk;
}

struct CostArgs {
  std::size_t n = 100;
  std::optional<double> latency_ms;
  std::string out_path;
};

inline int cmd_cost(const CostArgs& c, std::ostream& out) {
  require_arg(c.n >= 1, "--n must be >= 1");
  require_arg(!c.latency_ms || *c.latency_ms > 0, "--pbs-latency-ms must be positive");
  out << "agrnn cost | n " << c.n << ", PBS counts per step dot 2, agnu 4, gnu 6";
  if (c.latency_ms)
    out << " | projected_seconds assume " << fmt(*c.latency_ms, "%g")
        << " ms per PBS (a projection, not a measurement)";
  out << '\n';
  std::vector<PbsCostReport> rs;
  for (Solver s : kAddingSolvers) rs.push_back(pbs_cost(s, c.n, c.latency_ms));
  if (c.out_path.empty()) {
    write_cost_csv(out, rs);
  } else {
    std::ofstream os(c.out_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + c.out_path + "' for writing");
    write_cost_csv(os, rs);
    out << "wrote " << rs.size() << " rows to " << c.out_path << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// quantize

struct QuantArgs {
  std::string params;  // empty: hand-crafted solver
  double a = kDefaultGateMagnitude;
  std::int64_t scale = std::int64_t{1} << 16;
  std::string out_path;
  std::size_t n = 100;
  std::size_t count = 1000;
  std::uint64_t seed = 0;
};

inline int cmd_quantize(const QuantArgs& q, std::ostream& out) {
  require_power_of_two(q.scale);
  const CellParams p = q.params.empty() ? handcrafted_solver(q.a) : load_params(q.params).cell;
  const QuantParams qp = quantize(p, q.scale);
  out << "agrnn quantize | " << (q.params.empty() ? "hand-crafted solver a " + fmt(q.a) : q.params)
      << ", S=" << q.scale << '\n';

  double werr = 0.0;
  const CellParams back = dequantize(qp);
  for (std::size_t k = 0; k < p.gates.size(); ++k) {
    auto a = p.gates[k].W.span(), b = back.gates[k].W.span();
    for (std::size_t i = 0; i < a.size(); ++i) werr = std::max(werr, std::fabs(a[i] - b[i]));
    auto c = p.gates[k].U.span(), d = back.gates[k].U.span();
    for (std::size_t i = 0; i < c.size(); ++i) werr = std::max(werr, std::fabs(c[i] - d[i]));
    for (std::size_t i = 0; i < p.gates[k].b.size(); ++i)
      werr = std::max(werr, std::fabs(p.gates[k].b[i] - back.gates[k].b[i]));
  }
  out << "max weight rounding error " << fmt(werr) << " (bound " << fmt(0.5 / double(q.scale))
      << ")\n";
  if (!q.out_path.empty()) {
    write_quant_params(q.out_path, qp);
    out << "wrote " << q.out_path << '\n';
  }
  if (!q.params.empty()) return kOk;

  require_arg(q.n >= 2 && q.n % 2 == 0, "--n must be even and >= 2");
  Rng rng(q.seed);
  double max_err = 0.0;
  for (std::size_t k = 0; k < q.count; ++k) {
    const auto inst = gen_adding(rng, q.n);
    max_err = std::max(max_err, std::fabs(run_handcrafted_int(q.a, inst, q.scale) - inst.target));
  }
  const double bound = 2.0 * double(q.n) / double(q.scale);
  out << "integer solver over " << q.count << " instances (n " << q.n << "): max_abs_error "
      << fmt(max_err) << ", bound n*2/S " << fmt(bound) << '\n';
  return max_err <= bound ? kOk : kRuntime;
}

// ---------------------------------------------------------------------------

// `args` excludes the program name.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Additive-gate recurrent networks: solver, training, integer path, cost model"};
  app.name("agrnn");
  app.require_subcommand(1);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Run the exact hand-crafted aGNU adding solver");
  s->add_option("--n", solve.n, "Sequence length (even)")->capture_default_str();
  s->add_option("--count", solve.count, "Number of random instances")->capture_default_str();
  s->add_option("--a", solve.a, "Update-gate magnitude (must be >= 3)")->capture_default_str();
  s->add_option("--seed", solve.seed, "Instance RNG seed")->capture_default_str();
  s->add_option("--int-scale", solve.int_scale,
                "Run the fixed-point path with this power-of-two scale S (0 = float64)")
      ->capture_default_str();

  GenArgs gen;
  auto* g = app.add_subcommand("gen-adding", "Write random adding-problem instances as CSV");
  g->add_option("--n", gen.n, "Sequence length (even)")->capture_default_str();
  g->add_option("--count", gen.count, "Number of instances")->capture_default_str();
  g->add_option("--seed", gen.seed, "RNG seed")->capture_default_str();
  g->add_option("--out", gen.out_path, "Output CSV path")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train cells on the adding task or row-wise MNIST");
  t->add_option("--task", tr.task, "adding or mnist")->capture_default_str();
  t->add_option("--cell", tr.cells,
                "Cell kind(s), comma separated: rnn gru lstm gnu agnu agru agru-shifted alstm")
      ->delimiter(',')
      ->capture_default_str();
  t->add_flag("--paper-scale", tr.paper_scale,
              "Adding task at 20000 train / 5000 test, 20 trials");
  std::size_t units = 0, length = 0, train_size = 0, test_size = 0, trials = 0, epochs = 0,
              batch = 0;
  double lr = 0, clip = 0, rinit = 0, ubias = 0, stop = 0;
  std::uint64_t seed = 0, trial_seed = 0;
  auto* o_units = t->add_option("--units", units, "Hidden units (adding 16, mnist 32)");
  auto* o_len = t->add_option("--length", length, "Adding sequence length (100)");
  auto* o_train = t->add_option("--train-size", train_size, "Training set size");
  auto* o_test = t->add_option("--test-size", test_size, "Test set size");
  auto* o_trials = t->add_option("--trials", trials, "Seeded trials (adding 5, mnist 3)");
  auto* o_epochs = t->add_option("--epochs", epochs, "Epochs per trial (adding 30, mnist 5)");
  auto* o_batch = t->add_option("--batch-size", batch, "Mini-batch size (adding 64, mnist 16)");
  auto* o_lr = t->add_option("--lr", lr, "Adam learning rate (adding 0.01, mnist 0.005)");
  auto* o_clip = t->add_option("--clip", clip, "Gradient L2 clip norm, <= 0 disables (1)");
  auto* o_rinit = t->add_option("--recurrent-init", rinit,
                                "Scale of the Glorot recurrent kernels at init (0)");
  auto* o_ubias = t->add_option("--update-bias", ubias, "Initial update-gate bias (0)");
  auto* o_stop = t->add_option("--stop-below", stop,
                               "Stop a trial once its test loss is below this value");
  auto* o_seed = t->add_option("--seed", seed, "Dataset seed (adding 1234, mnist subset 7)");
  auto* o_tseed = t->add_option("--trial-seed", trial_seed,
                                "Seed of the first trial; trial k uses this + k (1)");
  t->add_option("--history", tr.history,
                "Write per-trial history CSVs to PREFIX_<cell>_seed<k>.csv");
  t->add_option("--save", tr.save, "Save the best trial's parameters here");
  t->add_option("--mnist-dir", tr.mnist_dir, "Directory with the MNIST IDX files")
      ->capture_default_str();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate saved parameters");
  e->add_option("--params", ev.params, "Parameter file from `train --save`")->required();
  e->add_option("--task", ev.task, "adding or mnist")->capture_default_str();
  e->add_option("--length", ev.length, "Adding sequence length")->capture_default_str();
  e->add_option("--count", ev.count, "Adding evaluation sequences")->capture_default_str();
  e->add_option("--seed", ev.seed, "Adding evaluation seed")->capture_default_str();
  e->add_option("--mnist-dir", ev.mnist_dir, "Directory with the MNIST IDX files")
      ->capture_default_str();

  BenchArgs bn;
  auto* b = app.add_subcommand("bench", "Time the plaintext dot / aGNU / GNU adding solvers");
  b->add_option("--n", bn.n, "Sequence length")->capture_default_str();
  b->add_option("--iters", bn.iters, "Timed samples per solver (>= 30)")->capture_default_str();
  b->add_option("--warmup", bn.warmup, "Untimed warmup samples")->capture_default_str();
  b->add_option("--inner", bn.inner, "Solver calls per timed sample")->capture_default_str();
  b->add_option("--reps", bn.reps, "Benchmark repetitions")->capture_default_str();
  b->add_option("--seed", bn.seed, "Instance seed")->capture_default_str();
  b->add_option("--out", bn.out_path, "Timing CSV path (default: stdout)");

  CostArgs co;
  double latency = 0;
  auto* c = app.add_subcommand("cost", "PBS cost model for the encrypted adding solvers");
  c->add_option("--n", co.n, "Sequence length")->capture_default_str();
  auto* o_lat = c->add_option("--pbs-latency-ms", latency,
                              "Per-PBS latency; adds a projected_seconds column");
  c->add_option("--out", co.out_path, "Cost CSV path (default: stdout)");

  QuantArgs qa;
  auto* q = app.add_subcommand("quantize", "Fixed-point aGNU: quantize, dump, check");
  q->add_option("--params", qa.params, "aGNU parameter file (default: hand-crafted solver)");
  q->add_option("--a", qa.a, "Hand-crafted gate magnitude")->capture_default_str();
  q->add_option("--scale", qa.scale, "Power-of-two scale S")->capture_default_str();
  q->add_option("--out", qa.out_path, "Binary dump path");
  q->add_option("--n", qa.n, "Check sequence length")->capture_default_str();
  q->add_option("--count", qa.count, "Check instances")->capture_default_str();
  q->add_option("--seed", qa.seed, "Check seed")->capture_default_str();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? kOk : kValidation;
  }

  auto take = [](CLI::Option* o, auto& dst, const auto& v) {
    if (o->count() > 0) dst = v;
  };
  take(o_units, tr.units, units);
  take(o_len, tr.length, length);
  take(o_train, tr.train_size, train_size);
  take(o_test, tr.test_size, test_size);
  take(o_trials, tr.trials, trials);
  take(o_epochs, tr.epochs, epochs);
  take(o_batch, tr.batch, batch);
  take(o_lr, tr.lr, lr);
  take(o_clip, tr.clip, clip);
  take(o_rinit, tr.recurrent_init, rinit);
  take(o_ubias, tr.update_bias, ubias);
  take(o_stop, tr.stop_below, stop);
  take(o_seed, tr.seed, seed);
  take(o_tseed, tr.trial_seed, trial_seed);
  take(o_lat, co.latency_ms, latency);

  try {
    if (*s) return cmd_solve(solve, out);
    if (*g) return cmd_gen(gen, out);
    if (*t) return cmd_train(tr, out);
    if (*e) return cmd_eval(ev, out);
    if (*b) return cmd_bench(bn, out);
    if (*c) return cmd_cost(co, out);
    if (*q) return cmd_quantize(qa, out);
  } catch (const std::invalid_argument& ex) {
    err << "error: " << ex.what() << '\n';
    return kValidation;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kRuntime;
  }
  return kValidation;
}

}  // namespace agrnn::cli
