#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "agrnn/cells.hpp"
#include "agrnn/tasks.hpp"
#include "agrnn/tensor.hpp"

namespace agrnn {

class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

// int64 with overflow-checked +, -, *.
class CheckedInt {
 public:
  constexpr CheckedInt() = default;
  constexpr CheckedInt(std::int64_t v) : v_(v) {}  // NOLINT(google-explicit-constructor)

  constexpr std::int64_t value() const { return v_; }

  friend CheckedInt operator+(CheckedInt a, CheckedInt b) {
    std::int64_t r;
    if (__builtin_add_overflow(a.v_, b.v_, &r)) throw OverflowError("integer overflow in addition");
    return r;
  }
  friend CheckedInt operator-(CheckedInt a, CheckedInt b) {
    std::int64_t r;
    if (__builtin_sub_overflow(a.v_, b.v_, &r)) throw OverflowError("integer overflow in subtraction");
    return r;
  }
  friend CheckedInt operator*(CheckedInt a, CheckedInt b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a.v_, b.v_, &r)) throw OverflowError("integer overflow in multiplication");
    return r;
  }
  friend bool operator<(CheckedInt a, CheckedInt b) { return a.v_ < b.v_; }
  friend bool operator==(CheckedInt a, CheckedInt b) = default;

 private:
  std::int64_t v_ = 0;
};

inline std::int64_t to_int64(CheckedInt v) { return v.value(); }

// Values interpreted as value * S.
using IntVector = BasicVector<std::int64_t>;

struct QuantParams {
  std::int64_t scale = 1;  // S, a power of two
  int shift = 0;           // log2(S)
  CellKind kind = CellKind::AGnu;
  std::size_t input_dim = 0;
  std::size_t units = 0;
  ActivationKind proposal_activation = ActivationKind::Relu;
  std::vector<BasicGateParams<std::int64_t>> gates;

  friend bool operator==(const QuantParams&, const QuantParams&) = default;
};

inline void require_power_of_two(std::int64_t s) {
  if (s <= 0 || !std::has_single_bit(static_cast<std::uint64_t>(s)))
    throw std::invalid_argument("scale must be a positive power of two (got " +
                                std::to_string(s) + ")");
}

// Round-to-nearest, ties to even.
inline std::int64_t quantize_value(double x, std::int64_t scale) {
  const double scaled = std::nearbyint(x * double(scale));
  if (!std::isfinite(scaled) || std::fabs(scaled) >= 0x1p62)
    throw OverflowError("value " + std::to_string(x) + " out of fixed-point range");
  return static_cast<std::int64_t>(scaled);
}

inline double dequantize_value(std::int64_t q, std::int64_t scale) {
  return double(q) / double(scale);
}

inline IntVector quantize_vector(const Vector& v, std::int64_t scale) {
  require_power_of_two(scale);
  IntVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = quantize_value(v[i], scale);
  return out;
}

inline Vector dequantize_vector(const IntVector& v, std::int64_t scale) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = dequantize_value(v[i], scale);
  return out;
}

inline QuantParams quantize(const CellParams& p, std::int64_t scale) {
  require_power_of_two(scale);
  validate(p);
  if (p.kind != CellKind::AGnu)
    throw std::invalid_argument(std::string("quantize: integer path supports agnu, got ") +
                                to_string(p.kind));
  if (p.proposal_activation != ActivationKind::Relu)
    throw std::invalid_argument(
        std::string("quantize: proposal activation must be relu (") +
        to_string(p.proposal_activation) + " is not integer-exact)");
  QuantParams q;
  q.scale = scale;
  q.shift = std::countr_zero(static_cast<std::uint64_t>(scale));
  q.kind = p.kind;
  q.input_dim = p.input_dim;
  q.units = p.units;
  q.proposal_activation = p.proposal_activation;
  q.gates = map_scalars<std::int64_t>(p, [&](double x) {
              return quantize_value(x, scale);
            }).gates;
  return q;
}

inline CellParams dequantize(const QuantParams& q) {
  BasicCellParams<std::int64_t> ip;
  ip.kind = q.kind;
  ip.input_dim = q.input_dim;
  ip.units = q.units;
  ip.proposal_activation = q.proposal_activation;
  ip.output_activation = default_output_activation(q.kind);
  ip.gates = q.gates;
  return map_scalars<double>(ip, [&](std::int64_t v) {
    return dequantize_value(v, q.scale);
  });
}

namespace detail {

// (acc + S/2) >> log2(S): round half up; arithmetic shift floors negatives.
inline CheckedInt rescale(CheckedInt acc, int shift) {
  if (shift == 0) return acc;
  const CheckedInt half(std::int64_t{1} << (shift - 1));
  return CheckedInt((acc + half).value() >> shift);
}

// W x + U h at scale S^2 in a 64-bit accumulator, one rescale, then + b.
inline IntVector int_gate_pre(const BasicGateParams<std::int64_t>& g,
                              const IntVector& x, const IntVector& h, int shift) {
  require(g.W.cols() == x.size(), "input length", x.size(), g.W.cols());
  require(g.U.cols() == h.size(), "state length", h.size(), g.U.cols());
  IntVector out(g.b.size());
  for (std::size_t r = 0; r < g.W.rows(); ++r) {
    CheckedInt acc(0);
    auto wr = g.W.row(r);
    auto ur = g.U.row(r);
    for (std::size_t c = 0; c < wr.size(); ++c) acc = acc + CheckedInt(wr[c]) * CheckedInt(x[c]);
    for (std::size_t c = 0; c < ur.size(); ++c) acc = acc + CheckedInt(ur[c]) * CheckedInt(h[c]);
    out[r] = (rescale(acc, shift) + CheckedInt(g.b[r])).value();
  }
  return out;
}

}  // namespace detail

// Integer aGNU step. The matvec stage multiplies by constant weights; the
// gate/combine stage runs additive_gate over `GateScalar`, which only needs
// +, -, < and construction from int64.
template <class GateScalar = CheckedInt>
IntVector step_agnu_int(const QuantParams& q, const IntVector& h,
                        const IntVector& x) {
  if (q.kind != CellKind::AGnu)
    throw std::invalid_argument("step_agnu_int: parameters are not agnu");
  detail::require(h.size() == q.units, "state length", h.size(), q.units);
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (h[k] < 0)
      throw StateError("agnu (int): incoming state h must be non-negative (element " +
                       std::to_string(k) + ")");
  }
  auto u = detail::int_gate_pre(q.gates[0], x, h, q.shift);
  auto hp = detail::int_gate_pre(q.gates[1], x, h, q.shift);
  IntVector next(q.units);
  for (std::size_t k = 0; k < q.units; ++k) {
    const GateScalar hhat = pos(GateScalar(hp[k]));
    next[k] = to_int64(additive_gate(GateScalar(h[k]), GateScalar(u[k]), hhat));
  }
  return next;
}

// Hand-crafted adding solver run entirely in fixed point; returns the
// dequantized final state.
inline double run_handcrafted_int(double a, const AddingInstance& inst,
                                  std::int64_t scale) {
  const QuantParams q = quantize(handcrafted_solver(a), scale);
  IntVector h(1);
  for (std::size_t t = 0; t < inst.n; ++t) {
    const IntVector x{quantize_value(inst.v[t], scale),
                      quantize_value(inst.w[t], scale)};
    h = step_agnu_int(q, h, x);
  }
  return dequantize_value(h[0], scale);
}

// ---------------------------------------------------------------------------
// Binary dump, all integers little-endian:
//   "AGQ1" | i64 scale | u32 kind | u32 proposal_activation |
//   u64 input_dim | u64 units | u32 gate_count |
//   per gate: units*input_dim i64 (W, row-major), units*units i64 (U),
//             units i64 (b)

namespace detail {

inline void put_le(std::ostream& os, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_le(std::istream& is, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = is.get();
    if (c == EOF) throw std::runtime_error("quantized dump: truncated");
    v |= std::uint64_t(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

}  // namespace detail

inline void write_quant_params(std::ostream& os, const QuantParams& q) {
  os.write("AGQ1", 4);
  detail::put_le(os, static_cast<std::uint64_t>(q.scale), 8);
  detail::put_le(os, static_cast<std::uint32_t>(q.kind), 4);
  detail::put_le(os, static_cast<std::uint32_t>(q.proposal_activation), 4);
  detail::put_le(os, q.input_dim, 8);
  detail::put_le(os, q.units, 8);
  detail::put_le(os, q.gates.size(), 4);
  for (const auto& g : q.gates) {
    for (auto v : g.W.span()) detail::put_le(os, static_cast<std::uint64_t>(v), 8);
    for (auto v : g.U.span()) detail::put_le(os, static_cast<std::uint64_t>(v), 8);
    for (auto v : g.b) detail::put_le(os, static_cast<std::uint64_t>(v), 8);
  }
}

inline QuantParams read_quant_params(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != "AGQ1")
    throw std::runtime_error("quantized dump: bad magic");
  QuantParams q;
  q.scale = static_cast<std::int64_t>(detail::get_le(is, 8));
  require_power_of_two(q.scale);
  q.shift = std::countr_zero(static_cast<std::uint64_t>(q.scale));
  q.kind = static_cast<CellKind>(detail::get_le(is, 4));
  q.proposal_activation = static_cast<ActivationKind>(detail::get_le(is, 4));
  q.input_dim = detail::get_le(is, 8);
  q.units = detail::get_le(is, 8);
  const auto gates = detail::get_le(is, 4);
  if (q.kind != CellKind::AGnu || gates != gate_layout(q.kind).size())
    throw std::runtime_error("quantized dump: unsupported cell layout");
  for (std::uint64_t k = 0; k < gates; ++k) {
    BasicGateParams<std::int64_t> g{
        BasicMatrix<std::int64_t>(q.units, q.input_dim),
        BasicMatrix<std::int64_t>(q.units, q.units), IntVector(q.units)};
    for (auto& v : g.W.span()) v = static_cast<std::int64_t>(detail::get_le(is, 8));
    for (auto& v : g.U.span()) v = static_cast<std::int64_t>(detail::get_le(is, 8));
    for (auto& v : g.b) v = static_cast<std::int64_t>(detail::get_le(is, 8));
    q.gates.push_back(std::move(g));
  }
  return q;
}

inline void write_quant_params(const std::string& path, const QuantParams& q) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_quant_params(os, q);
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

inline QuantParams read_quant_params(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_quant_params(is);
}

}  // namespace agrnn
