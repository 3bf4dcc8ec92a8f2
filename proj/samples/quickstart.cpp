// Tour of the library: exact solver, a short training run, the integer path
// and the PBS cost model.

#include <cstdio>

#include "agrnn/agrnn.hpp"

using namespace agrnn;

int main() {
  Rng rng(42);
  const AddingInstance inst = gen_adding(rng, 100);

  const CellParams solver = handcrafted_solver(4.0);
  std::printf("adding instance: target %.6f, aGNU solver %.6f, fixed point (S=2^16) %.6f\n",
              inst.target, solve_handcrafted(solver, inst),
              run_handcrafted_int(4.0, inst, 1 << 16));

  // One gated step at the scalar level: u >= hhat keeps h, u <= -h takes hhat.
  std::printf("additive gate: h=0.5 u=2 hhat=0.3 -> %.2f, h=0.5 u=-2 hhat=0.3 -> %.2f\n",
              additive_gate(0.5, 2.0, 0.3), additive_gate(0.5, -2.0, 0.3));

  ExperimentConfig cfg = adding_defaults(CellKind::AGru);
  cfg.length = 20;
  cfg.train_size = 400;
  cfg.test_size = 100;
  cfg.epochs = 3;
  const auto data = make_adding_data(cfg);
  const auto trial = run_trial(cfg, data, 1);
  std::printf("aGRU on length-20 adding, %zu epochs: test mse %.4f (baseline 0.1667)\n",
              trial.epochs_run, trial.final_test_metric);

  for (Solver s : kAddingSolvers) {
    const auto c = pbs_cost(s, 100);
    std::printf("PBS for n=100, %-4s: %zu\n", to_string(s), c.pbs_total);
  }
  return 0;
}
