#pragma once

// Central finite-difference oracle for the hand-written BPTT.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "agrnn/agrnn.hpp"
#include "support/counted.hpp"

namespace agrnn::testing {

struct GradCase {
  CellParams p;
  ReadoutParams r;
  std::vector<Vector> xs;
  CellState s0;
  Vector target;
};

// input_dim <= 3, units <= 4, length <= 5; weights, biases and inputs in
// [-1, 1]; strictly positive initial state.
inline GradCase random_grad_case(CellKind kind, Rng& rng) {
  const std::size_t in = 1 + rng.index(3);
  const std::size_t units = 1 + rng.index(4);
  const std::size_t len = 1 + rng.index(5);
  GradCase c;
  c.p = make_cell_params(kind, in, units);
  for (auto& g : c.p.gates) {
    for (auto& w : g.W.span()) w = rng.uniform(-1.0, 1.0);
    for (auto& w : g.U.span()) w = rng.uniform(-1.0, 1.0);
    for (auto& b : g.b) b = rng.uniform(-1.0, 1.0);
  }
  c.r = make_readout(units, 2, ActivationKind::Identity);
  for (auto& w : c.r.W.span()) w = rng.uniform(-1.0, 1.0);
  for (auto& b : c.r.b) b = rng.uniform(-1.0, 1.0);
  for (std::size_t t = 0; t < len; ++t) {
    Vector x(in);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    c.xs.push_back(std::move(x));
  }
  c.s0 = zero_state(c.p);
  for (auto& h : c.s0.h) h = rng.uniform(0.1, 1.0);
  if (c.s0.c)
    for (auto& v : *c.s0.c) v = rng.uniform(0.1, 1.0);
  c.target = Vector{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  return c;
}

// Distance of the closest non-zero argument of any comparison with zero in
// the forward pass, i.e. how near the point sits to a ReLU kink. Exact zeros
// come from inputs already clamped upstream and do not move under small
// perturbations.
inline double kink_distance(const GradCase& c) {
  using C = Counted<double>;
  auto p = map_scalars<C>(c.p, [](double v) { return C(v); });
  BasicCellState<C> s;
  s.h = BasicVector<C>(c.s0.h.size());
  for (std::size_t k = 0; k < s.h.size(); ++k) s.h[k] = C::variable(c.s0.h[k]);
  if (c.s0.c) {
    BasicVector<C> cc(c.s0.c->size());
    for (std::size_t k = 0; k < cc.size(); ++k) cc[k] = C::variable((*c.s0.c)[k]);
    s.c = std::move(cc);
  }
  std::vector<BasicVector<C>> xs;
  for (const auto& x : c.xs) {
    BasicVector<C> v(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) v[k] = C::variable(x[k]);
    xs.push_back(std::move(v));
  }
  reset_op_counts();
  run_sequence(p, s, xs);
  return op_counts().min_abs_compared;
}

inline double grad_case_loss(const GradCase& c) {
  auto res = run_sequence(c.p, c.s0, c.xs);
  return loss_mse(readout(c.r, res.final_state.h), c.target);
}

inline Gradients analytic_gradients(const GradCase& c) {
  auto res = run_sequence(c.p, c.s0, c.xs, true);
  auto z = readout_pre(c.r, res.final_state.h);
  auto y = apply_activation(c.r.activation, z);
  auto dz = readout_pre_grad(c.r, z, y, loss_mse_grad(y, c.target));
  return bptt(c.p, c.r, c.xs, res.traces, dz);
}

struct GradCheckReport {
  std::size_t checked = 0;
  double worst_rel = 0.0;  // |fd - an| / max(|fd|, |an|, abs_floor)
};

inline GradCheckReport check_gradients(GradCase c, double eps = 1e-5,
                                       double abs_floor = 1e-6) {
  const Gradients g = analytic_gradients(c);
  std::vector<std::span<const double>> an;
  for_each_tensor(g, [&](std::span<const double> s) { an.push_back(s); });
  std::vector<std::span<double>> ps;
  for_each_tensor(c.p, c.r, [&](std::span<double> s) { ps.push_back(s); });

  GradCheckReport rep;
  for (std::size_t k = 0; k < ps.size(); ++k) {
    for (std::size_t i = 0; i < ps[k].size(); ++i) {
      const double orig = ps[k][i];
      ps[k][i] = orig + eps;
      const double lp = grad_case_loss(c);
      ps[k][i] = orig - eps;
      const double lm = grad_case_loss(c);
      ps[k][i] = orig;
      const double fd = (lp - lm) / (2.0 * eps);
      const double a = an[k][i];
      const double denom = std::max({std::fabs(fd), std::fabs(a), abs_floor});
      rep.worst_rel = std::max(rep.worst_rel, std::fabs(fd - a) / denom);
      ++rep.checked;
    }
  }
  return rep;
}

inline constexpr double kKinkMargin = 1e-4;

// Draws cases until one sits at least kKinkMargin away from every kink.
inline GradCase sample_smooth_case(CellKind kind, Rng& rng, std::size_t* redraws = nullptr) {
  for (;;) {
    GradCase c = random_grad_case(kind, rng);
    if (kink_distance(c) >= kKinkMargin) return c;
    if (redraws) ++*redraws;
  }
}

}  // namespace agrnn::testing
