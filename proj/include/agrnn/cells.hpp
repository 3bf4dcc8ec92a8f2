#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "agrnn/rng.hpp"
#include "agrnn/tensor.hpp"

namespace agrnn {

class StateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class CellKind { SimpleRnn, Gru, Lstm, Gnu, AGnu, AGru, AGruShifted, ALstm };

inline constexpr std::array<CellKind, 8> kAllCellKinds = {
    CellKind::SimpleRnn, CellKind::Gru,  CellKind::Lstm,        CellKind::Gnu,
    CellKind::AGnu,      CellKind::AGru, CellKind::AGruShifted, CellKind::ALstm};

inline const char* to_string(CellKind k) {
  switch (k) {
    case CellKind::SimpleRnn: return "rnn";
    case CellKind::Gru: return "gru";
    case CellKind::Lstm: return "lstm";
    case CellKind::Gnu: return "gnu";
    case CellKind::AGnu: return "agnu";
    case CellKind::AGru: return "agru";
    case CellKind::AGruShifted: return "agru-shifted";
    case CellKind::ALstm: return "alstm";
  }
  return "?";
}

inline CellKind cell_kind_from_string(const std::string& s) {
  for (auto k : kAllCellKinds) {
    if (s == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown cell kind '" + s + "'");
}

inline bool is_addition_based(CellKind k) {
  return k == CellKind::AGnu || k == CellKind::AGru ||
         k == CellKind::AGruShifted || k == CellKind::ALstm;
}

inline bool has_cell_state(CellKind k) {
  return k == CellKind::Lstm || k == CellKind::ALstm;
}

enum class GateRole { Update, Reset, Proposal, Forget, Input, Output, Candidate };

inline const char* to_string(GateRole g) {
  switch (g) {
    case GateRole::Update: return "update";
    case GateRole::Reset: return "reset";
    case GateRole::Proposal: return "proposal";
    case GateRole::Forget: return "forget";
    case GateRole::Input: return "input";
    case GateRole::Output: return "output";
    case GateRole::Candidate: return "candidate";
  }
  return "?";
}

// Fixed gate order per kind; also the serialization order.
inline std::span<const GateRole> gate_layout(CellKind k) {
  static constexpr GateRole simple[] = {GateRole::Proposal};
  static constexpr GateRole gru[] = {GateRole::Update, GateRole::Reset,
                                     GateRole::Proposal};
  static constexpr GateRole gnu[] = {GateRole::Update, GateRole::Proposal};
  static constexpr GateRole lstm[] = {GateRole::Forget, GateRole::Input,
                                      GateRole::Output, GateRole::Candidate};
  switch (k) {
    case CellKind::SimpleRnn: return simple;
    case CellKind::Gru:
    case CellKind::AGru:
    case CellKind::AGruShifted: return gru;
    case CellKind::Gnu:
    case CellKind::AGnu: return gnu;
    case CellKind::Lstm:
    case CellKind::ALstm: return lstm;
  }
  return {};
}

inline std::size_t gate_slot(CellKind k, GateRole role) {
  auto layout = gate_layout(k);
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (layout[i] == role) return i;
  }
  throw std::invalid_argument(std::string("cell '") + to_string(k) +
                              "' has no " + to_string(role) + " gate");
}

template <class T>
struct BasicGateParams {
  BasicMatrix<T> W;  // units x input_dim
  BasicMatrix<T> U;  // units x units
  BasicVector<T> b;  // units

  friend bool operator==(const BasicGateParams&, const BasicGateParams&) = default;
};

template <class T>
struct BasicCellParams {
  CellKind kind = CellKind::SimpleRnn;
  std::size_t input_dim = 0;
  std::size_t units = 0;
  // phi_h for the RNN/GRU/GNU families, phi_c for the LSTM families.
  ActivationKind proposal_activation = ActivationKind::Tanh;
  // phi_h applied to the cell state (LSTM families only).
  ActivationKind output_activation = ActivationKind::Tanh;
  std::vector<BasicGateParams<T>> gates;

  const BasicGateParams<T>& gate(GateRole role) const {
    return gates[gate_slot(kind, role)];
  }
  BasicGateParams<T>& gate(GateRole role) {
    return gates[gate_slot(kind, role)];
  }

  friend bool operator==(const BasicCellParams&, const BasicCellParams&) = default;
};

using GateParams = BasicGateParams<double>;
using CellParams = BasicCellParams<double>;

inline ActivationKind default_proposal_activation(CellKind k) {
  switch (k) {
    case CellKind::Gnu: return ActivationKind::Sigmoid;
    case CellKind::AGnu:
    case CellKind::AGru:
    case CellKind::ALstm: return ActivationKind::Relu;
    default: return ActivationKind::Tanh;
  }
}

inline ActivationKind default_output_activation(CellKind k) {
  return k == CellKind::ALstm ? ActivationKind::Relu : ActivationKind::Tanh;
}

// Throws std::invalid_argument describing the first violated invariant.
template <class T>
void validate(const BasicCellParams<T>& p) {
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument(std::string(to_string(p.kind)) + ": " + msg);
  };
  if (p.input_dim == 0 || p.units == 0) fail("input_dim and units must be >= 1");
  if (p.gates.size() != gate_layout(p.kind).size()) fail("wrong number of gates");
  for (const auto& g : p.gates) {
    if (g.W.rows() != p.units || g.W.cols() != p.input_dim)
      fail("input kernel must be units x input_dim");
    if (g.U.rows() != p.units || g.U.cols() != p.units)
      fail("recurrent kernel must be units x units");
    if (g.b.size() != p.units) fail("bias must have length units");
  }
  if (p.proposal_activation == ActivationKind::Softmax ||
      p.output_activation == ActivationKind::Softmax)
    fail("softmax is only valid as a readout activation");
  switch (p.kind) {
    case CellKind::AGnu:
    case CellKind::AGru:
      if (!is_non_negative(p.proposal_activation))
        fail("proposal activation must be non-negative (relu or sigmoid)");
      break;
    case CellKind::AGruShifted:
      if (p.proposal_activation != ActivationKind::Tanh)
        fail("shifted cell requires a tanh proposal activation");
      break;
    case CellKind::ALstm:
      if (!is_non_negative(p.proposal_activation) ||
          !is_non_negative(p.output_activation))
        fail("candidate and output activations must be non-negative");
      break;
    default: break;
  }
}

inline CellParams make_cell_params(CellKind kind, std::size_t input_dim,
                                   std::size_t units) {
  CellParams p;
  p.kind = kind;
  p.input_dim = input_dim;
  p.units = units;
  p.proposal_activation = default_proposal_activation(kind);
  p.output_activation = default_output_activation(kind);
  for (std::size_t i = 0; i < gate_layout(kind).size(); ++i) {
    p.gates.push_back({Matrix(units, input_dim), Matrix(units, units),
                       Vector(units)});
  }
  return p;
}

struct InitOptions {
  // Multiplies the sampled recurrent kernels U (0 starts with U = 0).
  double recurrent_scale = 1.0;
  // Initial bias of the update gate, for kinds that have one.
  double update_bias = 0.0;
};

// Glorot-uniform kernels in +-sqrt(6 / (fan_in + fan_out)), zero biases.
// Draw order is fixed (per gate: W then U), so options never shift the stream.
inline void init_glorot(CellParams& p, Rng& rng, const InitOptions& opt = {}) {
  auto fill = [&](Matrix& m, double scale) {
    const double limit = std::sqrt(6.0 / double(m.rows() + m.cols()));
    for (auto& w : m.span()) w = scale * rng.uniform(-limit, limit);
  };
  for (auto& g : p.gates) {
    fill(g.W, 1.0);
    fill(g.U, opt.recurrent_scale);
    for (auto& b : g.b) b = 0.0;
  }
  auto layout = gate_layout(p.kind);
  for (std::size_t k = 0; k < layout.size(); ++k) {
    if (layout[k] == GateRole::Update)
      for (auto& b : p.gates[k].b) b = opt.update_bias;
  }
}

template <class U, class T, class F>
BasicCellParams<U> map_scalars(const BasicCellParams<T>& p, F&& f) {
  auto mat = [&](const BasicMatrix<T>& m) {
    BasicMatrix<U> out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.size(); ++i) out.data()[i] = f(m.data()[i]);
    return out;
  };
  BasicCellParams<U> out;
  out.kind = p.kind;
  out.input_dim = p.input_dim;
  out.units = p.units;
  out.proposal_activation = p.proposal_activation;
  out.output_activation = p.output_activation;
  for (const auto& g : p.gates) {
    BasicVector<U> b(g.b.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = f(g.b[i]);
    out.gates.push_back({mat(g.W), mat(g.U), std::move(b)});
  }
  return out;
}

template <class T>
struct BasicCellState {
  BasicVector<T> h;
  std::optional<BasicVector<T>> c;  // LSTM families only

  friend bool operator==(const BasicCellState&, const BasicCellState&) = default;
};

using CellState = BasicCellState<double>;

template <class T = double>
BasicCellState<T> zero_state(const BasicCellParams<T>& p) {
  BasicCellState<T> s{BasicVector<T>(p.units), std::nullopt};
  if (has_cell_state(p.kind)) s.c = BasicVector<T>(p.units);
  return s;
}

// Per-step intermediates retained for backpropagation. `pre[k]` holds the
// linear pre-activation of gate slot k and `act[k]` its activated value, in
// gate_layout order. For addition-based update/reset gates act == pre.
template <class T>
struct BasicStepTrace {
  BasicVector<T> x;
  BasicVector<T> h_prev;
  BasicVector<T> c_prev;
  BasicVector<T> h;
  BasicVector<T> c;
  std::array<BasicVector<T>, 4> pre;
  std::array<BasicVector<T>, 4> act;
  // State seen by the proposal kernel: r (.) h for GRU, (h + r^-)^+ for aGRU.
  BasicVector<T> reset_state;
};

using StepTrace = BasicStepTrace<double>;

// ---------------------------------------------------------------------------
// Gate/combine stages. These touch only ReLU, addition and negation.

// h_t = (h + u^-)^+ + (hhat - u^+)^+
template <class T>
T additive_gate(const T& h, const T& u, const T& hhat) {
  return pos(h + neg(u)) + pos(hhat - pos(u));
}

// h'_t = (h' + (u - 1)^- + 1)^+ + (hhat - (u + 1)^+ + 1)^+ - 1
template <class T>
T shifted_additive_gate(const T& h, const T& u, const T& hhat) {
  const T one(1);
  return pos(h + neg(u - one) + one) + pos(hhat - pos(u + one) + one) - one;
}

// c_t = (c - f)^+ + (chat - i)^+
template <class T>
T additive_cell_update(const T& c, const T& f, const T& chat, const T& i) {
  return pos(c - f) + pos(chat - i);
}

namespace detail {

template <class T>
void require_state(const BasicCellParams<T>& p, const BasicCellState<T>& s) {
  require(s.h.size() == p.units, "state length", s.h.size(), p.units);
  if (has_cell_state(p.kind)) {
    if (!s.c) throw StateError(std::string(to_string(p.kind)) + ": missing cell state c");
    require(s.c->size() == p.units, "cell state length", s.c->size(), p.units);
  }
}

template <class T>
void require_non_negative(const BasicVector<T>& v, const char* cell,
                          const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < T(0)) {
      throw StateError(std::string(cell) + ": incoming " + what +
                       " must be non-negative (element " + std::to_string(i) +
                       ")");
    }
  }
}

template <class T>
BasicVector<T> gate_pre(const BasicGateParams<T>& g, const BasicVector<T>& x,
                        const BasicVector<T>& h) {
  return affine(g.W, x, g.U, h, g.b);
}

template <class T>
void begin_trace(BasicStepTrace<T>* tr, const BasicCellState<T>& s,
                 const BasicVector<T>& x) {
  if (!tr) return;
  tr->x = x;
  tr->h_prev = s.h;
  tr->c_prev = s.c ? *s.c : BasicVector<T>();
}

template <class T>
void record(BasicStepTrace<T>* tr, std::size_t slot, const BasicVector<T>& pre,
            const BasicVector<T>& act) {
  if (!tr) return;
  tr->pre[slot] = pre;
  tr->act[slot] = act;
}

template <class T>
void end_trace(BasicStepTrace<T>* tr, const BasicCellState<T>& out) {
  if (!tr) return;
  tr->h = out.h;
  tr->c = out.c ? *out.c : BasicVector<T>();
}

template <class T>
void require_kind(const BasicCellParams<T>& p, CellKind k) {
  if (p.kind != k) {
    throw std::invalid_argument(std::string("step for '") + to_string(k) +
                                "' called with '" + to_string(p.kind) +
                                "' parameters");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Conventional cells

template <class T>
BasicCellState<T> step_simple_rnn(const BasicCellParams<T>& p,
                                  const BasicCellState<T>& s,
                                  const BasicVector<T>& x,
                                  BasicStepTrace<T>* tr = nullptr) {
  detail::require_kind(p, CellKind::SimpleRnn);
  detail::require_state(p, s);
  detail::begin_trace(tr, s, x);
  auto pre = detail::gate_pre(p.gates[0], x, s.h);
  auto h = apply_activation(p.proposal_activation, pre);
  detail::record(tr, 0, pre, h);
  BasicCellState<T> out{std::move(h), std::nullopt};
  detail::end_trace(tr, out);
  return out;
}

template <class T>
BasicCellState<T> step_gru(const BasicCellParams<T>& p,
                           const BasicCellState<T>& s, const BasicVector<T>& x,
                           BasicStepTrace<T>* tr = nullptr) {
  detail::require_kind(p, CellKind::Gru);
  detail::require_state(p, s);
  detail::begin_trace(tr, s, x);
  const auto& h = s.h;
  auto zp = detail::gate_pre(p.gates[0], x, h);
  auto rp = detail::gate_pre(p.gates[1], x, h);
  auto z = apply_activation(ActivationKind::Sigmoid, zp);
  auto r = apply_activation(ActivationKind::Sigmoid, rp);
  BasicVector<T> rh(p.units);
  for (std::size_t k = 0; k < p.units; ++k) rh[k] = r[k] * h[k];
  auto hp = detail::gate_pre(p.gates[2], x, rh);
  auto hhat = apply_activation(p.proposal_activation, hp);
  BasicVector<T> next(p.units);
  for (std::size_t k = 0; k < p.units; ++k)
    next[k] = z[k] * h[k] + (T(1) - z[k]) * hhat[k];
  detail::record(tr, 0, zp, z);
  detail::record(tr, 1, rp, r);
  detail::record(tr, 2, hp, hhat);
  if (tr) tr->reset_state = rh;
  BasicCellState<T> out{std::move(next), std::nullopt};
  detail::end_trace(tr, out);
  return out;
}

template <class T>
BasicCellState<T> step_lstm(const BasicCellParams<T>& p,
                            const BasicCellState<T>& s, const BasicVector<T>& x,
                            BasicStepTrace<T>* tr = nullptr) {
  detail::require_kind(p, CellKind::Lstm);
  detail::require_state(p, s);
  detail::begin_trace(tr, s, x);
  const auto& h = s.h;
  const auto& c = *s.c;
  auto fp = detail::gate_pre(p.gates[0], x, h);
  auto ip = detail::gate_pre(p.gates[1], x, h);
  auto op = detail::gate_pre(p.gates[2], x, h);
  auto cp = detail::gate_pre(p.gates[3], x, h);
  auto f = apply_activation(ActivationKind::Sigmoid, fp);
  auto i = apply_activation(ActivationKind::Sigmoid, ip);
  auto o = apply_activation(ActivationKind::Sigmoid, op);
  auto chat = apply_activation(p.proposal_activation, cp);
  BasicVector<T> cn(p.units), hn(p.units);
  for (std::size_t k = 0; k < p.units; ++k) {
    cn[k] = f[k] * c[k] + i[k] * chat[k];
    hn[k] = o[k] * activate(p.output_activation, cn[k]);
  }
  detail::record(tr, 0, fp, f);
  detail::record(tr, 1, ip, i);
  detail::record(tr, 2, op, o);
  detail::record(tr, 3, cp, chat);
  BasicCellState<T> out{std::move(hn), std::move(cn)};
  detail::end_trace(tr, out);
  return out;
}

template <class T>
BasicCellState<T> step_gnu(const BasicCellParams<T>& p,
                           const BasicCellState<T>& s, const BasicVector<T>& x,
                           BasicStepTrace<T>* tr = nullptr) {
  detail::require_kind(p, CellKind::Gnu);
  detail::require_state(p, s);
  detail::begin_trace(tr, s, x);
  const auto& h = s.h;
  auto zp = detail::gate_pre(p.gates[0], x, h);
  auto hp = detail::gate_pre(p.gates[1], x, h);
  auto z = apply_activation(ActivationKind::Sigmoid, zp);
  auto hhat = apply_activation(p.proposal_activation, hp);
  BasicVector<T> next(p.units);
  for (std::size_t k = 0; k < p.units; ++k)
    next[k] = z[k] * h[k] + (T(1) - z[k]) * hhat[k];
  detail::record(tr, 0, zp, z);
  detail::record(tr, 1, hp, hhat);
  BasicCellState<T> out{std::move(next), std::nullopt};
  detail::end_trace(tr, out);
  return out;
}

// ---------------------------------------------------------------------------
// Addition-based cells

template <class T>
BasicCellState<T> step_agnu(const BasicCellParams<T>& p,
                            const BasicCellState<T>& s, const BasicVector<T>& x,
                            BasicStepTrace<T>* tr = nullptr) {
  detail::require_kind(p, CellKind::AGnu);
  detail::require_state(p, s);
  detail::require_non_negative(s.h, "agnu", "state h");
  detail::begin_trace(tr, s, x);
  const auto& h = s.h;
  auto u = detail::gate_pre(p.gates[0], x, h);
  auto hp = detail::gate_pre(p.gates[1], x, h);
  auto hhat = apply_activation(p.proposal_activation, hp);
  BasicVector<T> next(p.units);
  for (std::size_t k = 0; k < p.units; ++k)
    next[k] = additive_gate(h[k], u[k], hhat[k]);
  detail::record(tr, 0, u, u);
  detail::record(tr, 1, hp, hhat);
  BasicCellState<T> out{std::move(next), std::nullopt};
  detail::end_trace(tr, out);
  return out;
}

namespace detail {

// Shared by aGRU and its shifted variant: linear update and reset gates,
// additive reset (h + r^-)^+ feeding the proposal kernel.
template <class T>
void agru_gates(const BasicCellParams<T>& p, const BasicVector<T>& h,
                const BasicVector<T>& x, BasicVector<T>& u,
                BasicVector<T>& hhat, BasicStepTrace<T>* tr) {
  u = gate_pre(p.gates[0], x, h);
  auto r = gate_pre(p.gates[1], x, h);
  BasicVector<T> rs(p.units);
  for (std::size_t k = 0; k < p.units; ++k) rs[k] = pos(h[k] + neg(r[k]));
  auto hp = gate_pre(p.gates[2], x, rs);
  hhat = apply_activation(p.proposal_activation, hp);
  record(tr, 0, u, u);
  record(tr, 1, r, r);
  record(tr, 2, hp, hhat);
  if (tr) tr->reset_state = rs;
}

}  // namespace detail

template <class T>
BasicCellState<T> step_agru(const BasicCellParams<T>& p,
                            const BasicCellState<T>& s, const BasicVector<T>& x,
                            BasicStepTrace<T>* tr = nullptr) {
  detail::require_kind(p, CellKind::AGru);
  detail::require_state(p, s);
  detail::require_non_negative(s.h, "agru", "state h");
  detail::begin_trace(tr, s, x);
  BasicVector<T> u, hhat;
  detail::agru_gates(p, s.h, x, u, hhat, tr);
  BasicVector<T> next(p.units);
  for (std::size_t k = 0; k < p.units; ++k)
    next[k] = additive_gate(s.h[k], u[k], hhat[k]);
  BasicCellState<T> out{std::move(next), std::nullopt};
  detail::end_trace(tr, out);
  return out;
}

// Stores and propagates the shifted state h' = h - 1; u, r and the proposal
// are all computed from h'.
template <class T>
BasicCellState<T> step_agru_shifted(const BasicCellParams<T>& p,
                                    const BasicCellState<T>& s,
                                    const BasicVector<T>& x,
                                    BasicStepTrace<T>* tr = nullptr) {
  detail::require_kind(p, CellKind::AGruShifted);
  detail::require_state(p, s);
  if (p.proposal_activation != ActivationKind::Tanh)
    throw std::invalid_argument("agru-shifted: proposal activation must be tanh");
  detail::begin_trace(tr, s, x);
  BasicVector<T> u, hhat;
  detail::agru_gates(p, s.h, x, u, hhat, tr);
  BasicVector<T> next(p.units);
  for (std::size_t k = 0; k < p.units; ++k)
    next[k] = shifted_additive_gate(s.h[k], u[k], hhat[k]);
  BasicCellState<T> out{std::move(next), std::nullopt};
  detail::end_trace(tr, out);
  return out;
}

template <class T>
BasicCellState<T> step_alstm(const BasicCellParams<T>& p,
                             const BasicCellState<T>& s,
                             const BasicVector<T>& x,
                             BasicStepTrace<T>* tr = nullptr) {
  detail::require_kind(p, CellKind::ALstm);
  detail::require_state(p, s);
  detail::require_non_negative(*s.c, "alstm", "cell state c");
  detail::begin_trace(tr, s, x);
  const auto& h = s.h;
  const auto& c = *s.c;
  auto fp = detail::gate_pre(p.gates[0], x, h);
  auto ip = detail::gate_pre(p.gates[1], x, h);
  auto op = detail::gate_pre(p.gates[2], x, h);
  auto cp = detail::gate_pre(p.gates[3], x, h);
  auto f = apply_activation(ActivationKind::Relu, fp);
  auto i = apply_activation(ActivationKind::Relu, ip);
  auto o = apply_activation(ActivationKind::Relu, op);
  auto chat = apply_activation(p.proposal_activation, cp);
  BasicVector<T> cn(p.units), hn(p.units);
  for (std::size_t k = 0; k < p.units; ++k) {
    cn[k] = additive_cell_update(c[k], f[k], chat[k], i[k]);
    hn[k] = activate(p.output_activation, cn[k] - o[k]);
  }
  detail::record(tr, 0, fp, f);
  detail::record(tr, 1, ip, i);
  detail::record(tr, 2, op, o);
  detail::record(tr, 3, cp, chat);
  BasicCellState<T> out{std::move(hn), std::move(cn)};
  detail::end_trace(tr, out);
  return out;
}

// Dispatches on p.kind.
template <class T>
BasicCellState<T> step(const BasicCellParams<T>& p, const BasicCellState<T>& s,
                       const BasicVector<T>& x, BasicStepTrace<T>* tr = nullptr) {
  switch (p.kind) {
    case CellKind::SimpleRnn: return step_simple_rnn(p, s, x, tr);
    case CellKind::Gru: return step_gru(p, s, x, tr);
    case CellKind::Lstm: return step_lstm(p, s, x, tr);
    case CellKind::Gnu: return step_gnu(p, s, x, tr);
    case CellKind::AGnu: return step_agnu(p, s, x, tr);
    case CellKind::AGru: return step_agru(p, s, x, tr);
    case CellKind::AGruShifted: return step_agru_shifted(p, s, x, tr);
    case CellKind::ALstm: return step_alstm(p, s, x, tr);
  }
  throw std::invalid_argument("unknown cell kind");
}

template <class T>
struct BasicSequenceResult {
  BasicCellState<T> final_state;
  std::vector<BasicVector<T>> states;         // h_1 .. h_n
  std::vector<BasicStepTrace<T>> traces;      // empty unless recorded
};

using SequenceResult = BasicSequenceResult<double>;

template <class T>
BasicSequenceResult<T> run_sequence(const BasicCellParams<T>& p,
                                    const BasicCellState<T>& init,
                                    const std::vector<BasicVector<T>>& xs,
                                    bool record = false) {
  BasicSequenceResult<T> out;
  out.final_state = init;
  out.states.reserve(xs.size());
  if (record) out.traces.resize(xs.size());
  for (std::size_t t = 0; t < xs.size(); ++t) {
    detail::require(xs[t].size() == p.input_dim, "sequence input length",
                    xs[t].size(), p.input_dim);
    out.final_state =
        step(p, out.final_state, xs[t], record ? &out.traces[t] : nullptr);
    out.states.push_back(out.final_state.h);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Readout y = psi(W h + b)

struct ReadoutParams {
  Matrix W;  // outputs x units
  Vector b;  // outputs
  ActivationKind activation = ActivationKind::Identity;

  friend bool operator==(const ReadoutParams&, const ReadoutParams&) = default;
};

inline ReadoutParams make_readout(std::size_t units, std::size_t outputs,
                                  ActivationKind activation) {
  return {Matrix(outputs, units), Vector(outputs), activation};
}

inline void init_glorot(ReadoutParams& r, Rng& rng) {
  const double limit = std::sqrt(6.0 / double(r.W.rows() + r.W.cols()));
  for (auto& w : r.W.span()) w = rng.uniform(-limit, limit);
  for (auto& b : r.b) b = 0.0;
}

inline Vector readout_pre(const ReadoutParams& r, const Vector& h) {
  auto z = matvec(r.W, h);
  detail::require(z.size() == r.b.size(), "readout bias length", r.b.size(),
                  z.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += r.b[i];
  return z;
}

inline Vector readout(const ReadoutParams& r, const Vector& h) {
  return apply_activation(r.activation, readout_pre(r, h));
}

}  // namespace agrnn
