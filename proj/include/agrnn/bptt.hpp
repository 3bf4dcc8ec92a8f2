#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "agrnn/cells.hpp"
#include "agrnn/tensor.hpp"

namespace agrnn {

// One float per trainable parameter, laid out like CellParams + ReadoutParams.
struct Gradients {
  std::vector<GateParams> gates;
  Matrix readout_W;
  Vector readout_b;

  static Gradients zeros_like(const CellParams& p, const ReadoutParams& r) {
    Gradients g;
    for (const auto& gate : p.gates) {
      g.gates.push_back({Matrix(gate.W.rows(), gate.W.cols()),
                         Matrix(gate.U.rows(), gate.U.cols()),
                         Vector(gate.b.size())});
    }
    g.readout_W = Matrix(r.W.rows(), r.W.cols());
    g.readout_b = Vector(r.b.size());
    return g;
  }

  friend bool operator==(const Gradients&, const Gradients&) = default;
};

// Visits every parameter tensor as a flat span, in a fixed order shared by
// parameters and gradients: gates in layout order (W, U, b), then readout.
template <class F>
void for_each_tensor(CellParams& p, ReadoutParams& r, F&& f) {
  for (auto& g : p.gates) {
    f(g.W.span());
    f(g.U.span());
    f(g.b.span());
  }
  f(r.W.span());
  f(r.b.span());
}

template <class F>
void for_each_tensor(Gradients& g, F&& f) {
  for (auto& gate : g.gates) {
    f(gate.W.span());
    f(gate.U.span());
    f(gate.b.span());
  }
  f(g.readout_W.span());
  f(g.readout_b.span());
}

template <class F>
void for_each_tensor(const Gradients& g, F&& f) {
  for_each_tensor(const_cast<Gradients&>(g), [&](std::span<double> s) {
    f(std::span<const double>(s));
  });
}

inline std::size_t parameter_count(const CellParams& p, const ReadoutParams& r) {
  std::size_t n = 0;
  for (const auto& g : p.gates) n += g.W.size() + g.U.size() + g.b.size();
  return n + r.W.size() + r.b.size();
}

inline void add_scaled(Gradients& acc, const Gradients& g, double scale) {
  std::vector<std::span<double>> dst;
  for_each_tensor(acc, [&](std::span<double> s) { dst.push_back(s); });
  std::size_t k = 0;
  for_each_tensor(g, [&](std::span<const double> s) {
    auto d = dst[k++];
    for (std::size_t i = 0; i < s.size(); ++i) d[i] += scale * s[i];
  });
}

inline double l2_norm(const Gradients& g) {
  double sq = 0.0;
  for_each_tensor(g, [&](std::span<const double> s) {
    for (double x : s) sq += x * x;
  });
  return std::sqrt(sq);
}

inline void scale(Gradients& g, double factor) {
  for_each_tensor(g, [&](std::span<double> s) {
    for (auto& x : s) x *= factor;
  });
}

// ---------------------------------------------------------------------------
// Losses

inline double loss_mse(const Vector& pred, const Vector& target) {
  detail::require(pred.size() == target.size(), "loss_mse target length",
                  target.size(), pred.size());
  if (pred.empty()) throw std::invalid_argument("loss_mse: empty vectors");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    acc += d * d;
  }
  return acc / double(pred.size());
}

// dL/dpred for loss_mse.
inline Vector loss_mse_grad(const Vector& pred, const Vector& target) {
  detail::require(pred.size() == target.size(), "loss_mse target length",
                  target.size(), pred.size());
  Vector g(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i)
    g[i] = 2.0 * (pred[i] - target[i]) / double(pred.size());
  return g;
}

// -log softmax(logits)[label]
inline double loss_cross_entropy(const Vector& logits, std::size_t label) {
  if (label >= logits.size())
    throw std::invalid_argument("loss_cross_entropy: label out of range");
  double mx = logits[0];
  for (double z : logits) mx = std::max(mx, z);
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - mx);
  return -(logits[label] - mx - std::log(sum));
}

// Maps dL/dy at the readout output to dL/dz at the readout pre-activation.
inline Vector readout_pre_grad(const ReadoutParams& r, const Vector& pre,
                               const Vector& y, const Vector& dy) {
  Vector dz(pre.size());
  if (r.activation == ActivationKind::Softmax) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += dy[i] * y[i];
    for (std::size_t i = 0; i < y.size(); ++i) dz[i] = y[i] * (dy[i] - s);
  } else {
    for (std::size_t i = 0; i < pre.size(); ++i)
      dz[i] = dy[i] * activation_derivative(r.activation, pre[i], y[i]);
  }
  return dz;
}

// ---------------------------------------------------------------------------
// Backpropagation through time

struct BpttDiagnostics {
  // dL/dh_t for t = 1..n (index t-1), and dL/dh_0.
  std::vector<Vector> d_states;
  Vector d_initial_state;
};

namespace detail {

inline double step_fn(double x) { return x > 0.0 ? 1.0 : 0.0; }

// dW += d x^T, dU += d hin^T, db += d, dhin += U^T d
inline void accumulate_gate(GateParams& grad, const GateParams& gate,
                            const Vector& d, const Vector& x, const Vector& hin,
                            Vector& dhin) {
  outer_acc(grad.W, d, x);
  outer_acc(grad.U, d, hin);
  for (std::size_t k = 0; k < d.size(); ++k) grad.b[k] += d[k];
  matvec_transpose_acc(gate.U, d, dhin);
}

inline Vector act_grad(ActivationKind kind, const Vector& pre, const Vector& y,
                       const Vector& dy) {
  Vector d(pre.size());
  for (std::size_t k = 0; k < pre.size(); ++k)
    d[k] = dy[k] * activation_derivative(kind, pre[k], y[k]);
  return d;
}

// One reverse step. On entry dh/dc hold dL/dh_t, dL/dc_t; on exit
// dL/dh_{t-1}, dL/dc_{t-1}.
inline void backward_step(const CellParams& p, const StepTrace& tr,
                          Gradients& g, Vector& dh, Vector& dc) {
  const std::size_t n = p.units;
  const auto& hp = tr.h_prev;
  Vector dh_prev(n);
  switch (p.kind) {
    case CellKind::SimpleRnn: {
      auto d = act_grad(p.proposal_activation, tr.pre[0], tr.act[0], dh);
      accumulate_gate(g.gates[0], p.gates[0], d, tr.x, hp, dh_prev);
      break;
    }
    case CellKind::Gru: {
      const auto& z = tr.act[0];
      const auto& r = tr.act[1];
      const auto& hhat = tr.act[2];
      Vector dzp(n), dhat(n);
      for (std::size_t k = 0; k < n; ++k) {
        dzp[k] = dh[k] * (hp[k] - hhat[k]) * z[k] * (1.0 - z[k]);
        dhat[k] = dh[k] * (1.0 - z[k]);
        dh_prev[k] = dh[k] * z[k];
      }
      auto dhp = act_grad(p.proposal_activation, tr.pre[2], hhat, dhat);
      Vector drh(n);
      accumulate_gate(g.gates[2], p.gates[2], dhp, tr.x, tr.reset_state, drh);
      Vector drp(n);
      for (std::size_t k = 0; k < n; ++k) {
        drp[k] = drh[k] * hp[k] * r[k] * (1.0 - r[k]);
        dh_prev[k] += drh[k] * r[k];
      }
      accumulate_gate(g.gates[0], p.gates[0], dzp, tr.x, hp, dh_prev);
      accumulate_gate(g.gates[1], p.gates[1], drp, tr.x, hp, dh_prev);
      break;
    }
    case CellKind::Gnu: {
      const auto& z = tr.act[0];
      const auto& hhat = tr.act[1];
      Vector dzp(n), dhat(n);
      for (std::size_t k = 0; k < n; ++k) {
        dzp[k] = dh[k] * (hp[k] - hhat[k]) * z[k] * (1.0 - z[k]);
        dhat[k] = dh[k] * (1.0 - z[k]);
        dh_prev[k] = dh[k] * z[k];
      }
      auto dhp = act_grad(p.proposal_activation, tr.pre[1], hhat, dhat);
      accumulate_gate(g.gates[0], p.gates[0], dzp, tr.x, hp, dh_prev);
      accumulate_gate(g.gates[1], p.gates[1], dhp, tr.x, hp, dh_prev);
      break;
    }
    case CellKind::Lstm: {
      const auto& f = tr.act[0];
      const auto& i = tr.act[1];
      const auto& o = tr.act[2];
      const auto& chat = tr.act[3];
      Vector dfp(n), dip(n), dop(n), dchat(n), dc_prev(n);
      for (std::size_t k = 0; k < n; ++k) {
        const double a = activate(p.output_activation, tr.c[k]);
        const double dct =
            dc[k] + dh[k] * o[k] *
                        activation_derivative(p.output_activation, tr.c[k], a);
        dop[k] = dh[k] * a * o[k] * (1.0 - o[k]);
        dfp[k] = dct * tr.c_prev[k] * f[k] * (1.0 - f[k]);
        dip[k] = dct * chat[k] * i[k] * (1.0 - i[k]);
        dchat[k] = dct * i[k];
        dc_prev[k] = dct * f[k];
      }
      auto dcp = act_grad(p.proposal_activation, tr.pre[3], chat, dchat);
      accumulate_gate(g.gates[0], p.gates[0], dfp, tr.x, hp, dh_prev);
      accumulate_gate(g.gates[1], p.gates[1], dip, tr.x, hp, dh_prev);
      accumulate_gate(g.gates[2], p.gates[2], dop, tr.x, hp, dh_prev);
      accumulate_gate(g.gates[3], p.gates[3], dcp, tr.x, hp, dh_prev);
      dc = std::move(dc_prev);
      break;
    }
    case CellKind::AGnu:
    case CellKind::AGru:
    case CellKind::AGruShifted: {
      const bool shifted = p.kind == CellKind::AGruShifted;
      const std::size_t prop = p.kind == CellKind::AGnu ? 1 : 2;
      const auto& u = tr.pre[0];
      const auto& hhat = tr.act[prop];
      Vector du(n), dhat(n);
      for (std::size_t k = 0; k < n; ++k) {
        if (shifted) {
          const double a = hp[k] + neg(u[k] - 1.0) + 1.0;
          const double b = hhat[k] - pos(u[k] + 1.0) + 1.0;
          const double dA = dh[k] * step_fn(a);
          const double dB = dh[k] * step_fn(b);
          dh_prev[k] = dA;
          dhat[k] = dB;
          du[k] = dA * (u[k] - 1.0 < 0.0 ? 1.0 : 0.0) - dB * step_fn(u[k] + 1.0);
        } else {
          const double a = hp[k] + neg(u[k]);
          const double b = hhat[k] - pos(u[k]);
          const double dA = dh[k] * step_fn(a);
          const double dB = dh[k] * step_fn(b);
          dh_prev[k] = dA;
          dhat[k] = dB;
          du[k] = dA * (u[k] < 0.0 ? 1.0 : 0.0) - dB * step_fn(u[k]);
        }
      }
      auto dhp = act_grad(p.proposal_activation, tr.pre[prop], hhat, dhat);
      if (p.kind == CellKind::AGnu) {
        accumulate_gate(g.gates[1], p.gates[1], dhp, tr.x, hp, dh_prev);
      } else {
        const auto& r = tr.pre[1];
        Vector drs(n);
        accumulate_gate(g.gates[2], p.gates[2], dhp, tr.x, tr.reset_state, drs);
        Vector dr(n);
        for (std::size_t k = 0; k < n; ++k) {
          const double ds = drs[k] * step_fn(hp[k] + neg(r[k]));
          dh_prev[k] += ds;
          dr[k] = r[k] < 0.0 ? ds : 0.0;
        }
        accumulate_gate(g.gates[1], p.gates[1], dr, tr.x, hp, dh_prev);
      }
      accumulate_gate(g.gates[0], p.gates[0], du, tr.x, hp, dh_prev);
      break;
    }
    case CellKind::ALstm: {
      const auto& chat = tr.act[3];
      Vector dfp(n), dip(n), dop(n), dchat(n), dc_prev(n);
      for (std::size_t k = 0; k < n; ++k) {
        const double q = tr.c[k] - tr.act[2][k];
        const double dq =
            dh[k] * activation_derivative(p.output_activation, q, tr.h[k]);
        const double dct = dc[k] + dq;
        const double dA = dct * step_fn(tr.c_prev[k] - tr.act[0][k]);
        const double dB = dct * step_fn(chat[k] - tr.act[1][k]);
        dc_prev[k] = dA;
        dchat[k] = dB;
        dfp[k] = -dA * step_fn(tr.pre[0][k]);
        dip[k] = -dB * step_fn(tr.pre[1][k]);
        dop[k] = -dq * step_fn(tr.pre[2][k]);
      }
      auto dcp = act_grad(p.proposal_activation, tr.pre[3], chat, dchat);
      accumulate_gate(g.gates[0], p.gates[0], dfp, tr.x, hp, dh_prev);
      accumulate_gate(g.gates[1], p.gates[1], dip, tr.x, hp, dh_prev);
      accumulate_gate(g.gates[2], p.gates[2], dop, tr.x, hp, dh_prev);
      accumulate_gate(g.gates[3], p.gates[3], dcp, tr.x, hp, dh_prev);
      dc = std::move(dc_prev);
      break;
    }
  }
  dh = std::move(dh_prev);
}

}  // namespace detail

// Reverse-mode gradient of a loss applied to the readout of the final state.
// `d_readout_pre` is dL/dz for the readout pre-activation z = W h_n + b (use
// readout_pre_grad to convert from dL/dy). `traces` must come from
// run_sequence(..., record = true) over `xs`.
inline Gradients bptt(const CellParams& p, const ReadoutParams& r,
                      const std::vector<Vector>& xs,
                      const std::vector<StepTrace>& traces,
                      const Vector& d_readout_pre,
                      BpttDiagnostics* diag = nullptr) {
  if (traces.size() != xs.size()) {
    throw std::invalid_argument("bptt: traces missing (" +
                                std::to_string(traces.size()) + " for " +
                                std::to_string(xs.size()) + " steps)");
  }
  detail::require(d_readout_pre.size() == r.b.size(), "bptt output gradient",
                  d_readout_pre.size(), r.b.size());
  Gradients g = Gradients::zeros_like(p, r);
  Vector dh(p.units);
  Vector dc(p.units);
  if (!traces.empty()) {
    const auto& h_last = traces.back().h;
    outer_acc(g.readout_W, d_readout_pre, h_last);
    for (std::size_t k = 0; k < d_readout_pre.size(); ++k)
      g.readout_b[k] += d_readout_pre[k];
    matvec_transpose_acc(r.W, d_readout_pre, dh);
  }
  if (diag) diag->d_states.assign(traces.size(), Vector());
  for (std::size_t t = traces.size(); t-- > 0;) {
    if (diag) diag->d_states[t] = dh;
    detail::backward_step(p, traces[t], g, dh, dc);
  }
  if (diag) diag->d_initial_state = dh;
  return g;
}

}  // namespace agrnn
