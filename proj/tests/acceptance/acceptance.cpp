// Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
// if any selected criterion fails.
//
//   agrnn_acceptance                 all criteria
//   agrnn_acceptance --criterion 3   one criterion (repeatable)

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "agrnn/agrnn.hpp"
#include "support/counted.hpp"
#include "support/gradcheck.hpp"

using namespace agrnn;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* spec, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, a);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string mnist_file(const char* name) {
  return std::string(AGRNN_DATA_DIR) + "/mnist/" + name;
}

// 1. Hand-crafted solver is exact.
Outcome criterion_1() {
  Stopwatch sw;
  Rng rng(1);
  const auto solver = handcrafted_solver(4.0);
  double worst = 0.0;
  for (std::size_t n : {10u, 100u, 1000u}) {
    for (int k = 0; k < 1000; ++k) {
      const auto inst = gen_adding(rng, n);
      worst = std::max(worst, std::fabs(solve_handcrafted(solver, inst) - inst.target));
    }
  }
  const double t = sw.seconds();
  return {worst <= 1e-12 && t < 5.0,
          "max |error| " + fmt("%.3g", worst) + " (<= 1e-12) over 3x1000 instances, n in "
          "{10,100,1000}, " + fmt("%.2f", t) + " s (< 5 s)"};
}

// 2. Constant predictor scores about 1/6.
Outcome criterion_2() {
  Stopwatch sw;
  Rng rng(2);
  const double mse = naive_baseline_mse(gen_adding_set(rng, 100, 100000));
  const double t = sw.seconds();
  return {std::fabs(mse - 0.1667) <= 0.01 && t < 5.0,
          "naive mse " + fmt("%.5f", mse) + " (0.1667 +- 0.01) over 1e5 instances, " +
              fmt("%.2f", t) + " s (< 5 s)"};
}

// 3. Gated cells learn the adding task at desk scale; a simple RNN does not.
Outcome criterion_3() {
  Stopwatch sw;
  std::string detail;
  bool pass = true;
  ExperimentData data;
  for (CellKind kind : {CellKind::AGru, CellKind::Gru, CellKind::SimpleRnn}) {
    auto cfg = adding_defaults(kind);
    cfg.stop_below_test_loss = 0.005;
    if (data.train.empty()) data = make_adding_data(cfg);
    auto trials = run_experiment(cfg, data);
    double best = trials.front().final_test_metric;
    std::string all;
    for (const auto& t : trials) {
      best = std::min(best, t.final_test_metric);
      all += (all.empty() ? "" : " ") + fmt("%.4f", t.final_test_metric);
    }
    const bool ok = kind == CellKind::SimpleRnn ? best > 0.12 : best < 0.02;
    pass = pass && ok;
    detail += std::string(to_string(kind)) + " best " + fmt("%.4f", best) +
              (kind == CellKind::SimpleRnn ? " (> 0.12)" : " (< 0.02)") + " [" + all + "]; ";
  }
  return {pass, detail + fmt("%.0f", sw.seconds()) + " s"};
}

// 4. Limit behaviour of the additive and sigmoid gates, through the cell API.
Outcome criterion_4() {
  Stopwatch sw;
  auto scalar_cell = [](CellKind kind, double u, double hhat_pre) {
    auto p = make_cell_params(kind, 1, 1);
    p.proposal_activation = ActivationKind::Relu;
    p.gate(GateRole::Update).b[0] = u;
    p.gate(GateRole::Proposal).b[0] = hhat_pre;
    return p;
  };
  auto next = [](const CellParams& p, double h) {
    return step(p, CellState{Vector{h}, std::nullopt}, Vector{0.0}).h[0];
  };
  Rng rng(4);
  long keep_bad = 0, swap_bad = 0;
  double gnu_worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double h = rng.uniform(0, 5), hhat = rng.uniform(0, 5);
    if (next(scalar_cell(CellKind::AGnu, hhat + rng.uniform(0, 10), hhat), h) != h) ++keep_bad;
    if (next(scalar_cell(CellKind::AGnu, -h - rng.uniform(0, 10), hhat), h) != hhat) ++swap_bad;
    const double big = rng.uniform(20, 50);
    gnu_worst = std::max(gnu_worst, std::fabs(next(scalar_cell(CellKind::Gnu, big, hhat), h) - h));
    gnu_worst =
        std::max(gnu_worst, std::fabs(next(scalar_cell(CellKind::Gnu, -big, hhat), h) - hhat));
  }
  const double t = sw.seconds();
  return {keep_bad == 0 && swap_bad == 0 && gnu_worst <= 1e-8 && t < 1.0,
          "10^4 configs: keep mismatches " + std::to_string(keep_bad) + ", swap mismatches " +
              std::to_string(swap_bad) + ", GNU |u|>=20 worst " + fmt("%.2e", gnu_worst) +
              " (<= 1e-8), " + fmt("%.3f", t) + " s (< 1 s)"};
}

// 5. BPTT gradients agree with central differences.
Outcome criterion_5() {
  Stopwatch sw;
  bool pass = true;
  std::string detail;
  for (CellKind kind : kAllCellKinds) {
    Rng rng(500 + static_cast<std::uint64_t>(kind));
    double worst = 0.0;
    std::size_t redraws = 0;
    for (int i = 0; i < 20; ++i) {
      auto c = agrnn::testing::sample_smooth_case(kind, rng, &redraws);
      worst = std::max(worst, agrnn::testing::check_gradients(c, 1e-5).worst_rel);
    }
    pass = pass && worst <= 1e-4;
    detail += std::string(to_string(kind)) + " " + fmt("%.1e", worst) + ", ";
  }
  const double t = sw.seconds();
  return {pass && t < 60.0,
          "worst relative error per kind (<= 1e-4): " + detail + fmt("%.1f", t) + " s (< 60 s)"};
}

// 6. PBS model constants.
Outcome criterion_6() {
  const std::size_t want_step[] = {2, 4, 6}, want_total[] = {200, 400, 600};
  bool pass = true;
  std::string detail;
  for (int k = 0; k < 3; ++k) {
    const Solver s = kAddingSolvers[k];
    const auto one = pbs_cost(s, 1), hundred = pbs_cost(s, 100);
    pass = pass && one.pbs_total == want_step[k] && hundred.pbs_total == want_total[k];
    detail += std::string(to_string(s)) + " " + std::to_string(one.pbs_total) + "/step, " +
              std::to_string(hundred.pbs_total) + " at n=100; ";
  }
  return {pass, detail};
}

// 7. Plaintext speed ordering on an optimized build.
Outcome criterion_7() {
  Stopwatch sw;
  if (!optimized_build())
    return {false, "unoptimized build (" + build_fingerprint() + "); rebuild with Release"};
  BenchConfig cfg;
  bool pass = true;
  std::string detail;
  for (int rep = 0; rep < 5; ++rep) {
    cfg.seed = std::uint64_t(rep);
    const auto rs = bench_solvers(cfg);
    const double dot = rs[0].median_ns, add = rs[1].median_ns, mul = rs[2].median_ns;
    pass = pass && dot <= add && add < mul;
    detail += fmt("%.0f", dot) + "/" + fmt("%.0f", add) + "/" + fmt("%.0f", mul) + " ns (ratio " +
              fmt("%.2f", add / mul) + "); ";
  }
  const double t = sw.seconds();
  return {pass && t < 120.0, "median dot/agnu/gnu over 5 reps: " + detail + build_fingerprint() +
                                 ", " + fmt("%.1f", t) + " s"};
}

// Every value entering the integer gate stage is runtime data.
struct VarInt : agrnn::testing::Counted<std::int64_t> {
  VarInt(std::int64_t v) : Counted(Counted::variable(v)) {}  // NOLINT
  VarInt(const Counted<std::int64_t>& c) : Counted(c) {}     // NOLINT
};

// 8. Integer path fidelity.
Outcome criterion_8() {
  Rng rng(8);
  long mismatches = 0;
  for (int fixture = 0; fixture < 1000; ++fixture) {
    const std::size_t in = 1 + rng.index(3), units = 1 + rng.index(3);
    auto p = make_cell_params(CellKind::AGnu, in, units);
    for (auto& g : p.gates) {
      for (auto& w : g.W.span()) w = double(int(rng.index(7)) - 3);
      for (auto& w : g.U.span()) w = double(int(rng.index(7)) - 3);
      for (auto& b : g.b) b = double(int(rng.index(11)) - 5);
    }
    const auto q = quantize(p, 1);
    Vector h(units), x(in);
    IntVector hi(units), xi(in);
    for (std::size_t k = 0; k < units; ++k) h[k] = double(hi[k] = std::int64_t(rng.index(6)));
    for (int t = 0; t < 4; ++t) {
      for (std::size_t k = 0; k < in; ++k) x[k] = double(xi[k] = std::int64_t(rng.index(11)) - 5);
      h = step(p, CellState{h, std::nullopt}, x).h;
      hi = step_agnu_int(q, hi, xi);
      for (std::size_t k = 0; k < units; ++k) mismatches += double(hi[k]) != h[k];
    }
  }

  const std::int64_t s = 1 << 16;
  double worst_ratio = 0.0;
  for (std::size_t n : {10u, 100u, 1000u}) {
    for (int k = 0; k < 200; ++k) {
      const auto inst = gen_adding(rng, n);
      const double err = std::fabs(run_handcrafted_int(4.0, inst, s) - inst.target);
      worst_ratio = std::max(worst_ratio, err / (double(n) * 2.0 / double(s)));
    }
  }

  const auto q = quantize(handcrafted_solver(4.0), s);
  agrnn::testing::reset_op_counts();
  IntVector h{0};
  const auto inst = gen_adding(rng, 100);
  for (std::size_t t = 0; t < inst.n; ++t)
    h = step_agnu_int<VarInt>(q, h, IntVector{quantize_value(inst.v[t], s),
                                              quantize_value(inst.w[t], s)});
  const auto counts = agrnn::testing::op_counts();
  const auto muls = counts.var_var_mul + counts.var_const_mul;

  return {mismatches == 0 && worst_ratio <= 1.0 && muls == 0 && counts.add_sub > 0,
          "S=1 mismatches " + std::to_string(mismatches) + " over 10^3 fixtures; S=2^16 worst "
          "error / (2n/S) " + fmt("%.3f", worst_ratio) + " (<= 1); gate-stage multiplications " +
              std::to_string(muls) + " (additions " + std::to_string(counts.add_sub) + ")"};
}

// 9. Row-wise MNIST: aGRU tracks GRU on the desk subset.
Outcome criterion_9() {
  Stopwatch sw;
  const auto all = load_mnist_idx(mnist_file("mnist5k-images-idx3-ubyte"),
                                  mnist_file("mnist5k-labels-idx1-ubyte"));
  double mean[2] = {0, 0};
  std::string detail;
  ExperimentData data;
  const CellKind kinds[2] = {CellKind::Gru, CellKind::AGru};
  for (int k = 0; k < 2; ++k) {
    const auto cfg = mnist_defaults(kinds[k]);
    if (data.train.empty()) data = make_mnist_data(cfg, all);
    std::string accs;
    for (const auto& t : run_experiment(cfg, data)) {
      mean[k] += t.final_test_metric / double(cfg.trials);
      accs += (accs.empty() ? "" : " ") + fmt("%.3f", t.final_test_metric);
    }
    detail += std::string(to_string(kinds[k])) + " mean " + fmt("%.1f%%", 100 * mean[k]) +
              " [" + accs + "]; ";
  }
  const double gap = 100.0 * std::fabs(mean[1] - mean[0]);
  return {gap <= 5.0 && mean[0] > 0.7 && mean[1] > 0.7,
          detail + "gap " + fmt("%.1f", gap) + " pp (<= 5), both > 70%; " +
              fmt("%.0f", sw.seconds()) + " s"};
}

const std::vector<std::pair<const char*, std::function<Outcome()>>> kCriteria = {
    {"hand-crafted solver exactness", criterion_1},
    {"naive baseline mse", criterion_2},
    {"adding-task learnability", criterion_3},
    {"gate limit equivalence", criterion_4},
    {"gradient correctness", criterion_5},
    {"PBS cost model", criterion_6},
    {"plaintext speed ordering", criterion_7},
    {"integer path fidelity", criterion_8},
    {"MNIST comparative accuracy", criterion_9},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "Criterion number (repeatable; default all)")
      ->check(CLI::Range(1, int(kCriteria.size())));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty())
    for (int k = 1; k <= int(kCriteria.size()); ++k) selected.push_back(k);

  int failures = 0;
  for (int k : selected) {
    const auto& [name, fn] = kCriteria[std::size_t(k - 1)];
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k << " (" << name
              << "): " << o.detail << std::endl;
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
