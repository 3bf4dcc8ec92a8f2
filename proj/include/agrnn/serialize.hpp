#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "agrnn/cells.hpp"

namespace agrnn {

// Text parameter format. Floats are written as C99 hex literals ("%a"), so a
// save/load round trip is bit-exact.
//
//   agrnn-params 1
//   kind <cell kind>
//   input_dim <n>
//   units <n>
//   proposal_activation <activation>
//   output_activation <activation>
//   gate <role>             repeated in gate_layout order
//   W <rows> <cols> <values...>
//   U <rows> <cols> <values...>
//   b <len> <values...>
//   readout <activation>    optional
//   W <rows> <cols> <values...>
//   b <len> <values...>
//   end

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string hex(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

inline void write_matrix(std::ostream& os, const char* tag, const Matrix& m) {
  os << tag << ' ' << m.rows() << ' ' << m.cols();
  for (double x : m.span()) os << ' ' << hex(x);
  os << '\n';
}

inline void write_vector(std::ostream& os, const char* tag, const Vector& v) {
  os << tag << ' ' << v.size();
  for (double x : v) os << ' ' << hex(x);
  os << '\n';
}

class TokenReader {
 public:
  explicit TokenReader(std::istream& is) : is_(is) {}

  std::string word() {
    std::string w;
    if (!(is_ >> w)) throw FormatError("parameter file: unexpected end of input");
    return w;
  }
  void expect(const std::string& want) {
    auto got = word();
    if (got != want)
      throw FormatError("parameter file: expected '" + want + "', got '" + got + "'");
  }
  std::size_t count() {
    auto w = word();
    char* end = nullptr;
    const auto v = std::strtoull(w.c_str(), &end, 10);
    if (*end != '\0') throw FormatError("parameter file: bad count '" + w + "'");
    return static_cast<std::size_t>(v);
  }
  double real() {
    auto w = word();
    char* end = nullptr;
    const double v = std::strtod(w.c_str(), &end);
    if (*end != '\0') throw FormatError("parameter file: bad number '" + w + "'");
    return v;
  }
  Matrix matrix(const char* tag) {
    expect(tag);
    const auto r = count();
    const auto c = count();
    Matrix m(r, c);
    for (auto& x : m.span()) x = real();
    return m;
  }
  template <class F>
  auto named(F parse) {
    auto w = word();
    try {
      return parse(w);
    } catch (const std::invalid_argument& e) {
      throw FormatError(std::string("parameter file: ") + e.what());
    }
  }
  Vector vector(const char* tag) {
    expect(tag);
    Vector v(count());
    for (auto& x : v) x = real();
    return v;
  }

 private:
  std::istream& is_;
};

}  // namespace detail

inline void save_params(std::ostream& os, const CellParams& p,
                        const ReadoutParams* r = nullptr) {
  os << "agrnn-params 1\n";
  os << "kind " << to_string(p.kind) << '\n';
  os << "input_dim " << p.input_dim << '\n';
  os << "units " << p.units << '\n';
  os << "proposal_activation " << to_string(p.proposal_activation) << '\n';
  os << "output_activation " << to_string(p.output_activation) << '\n';
  auto layout = gate_layout(p.kind);
  for (std::size_t k = 0; k < p.gates.size(); ++k) {
    os << "gate " << to_string(layout[k]) << '\n';
    detail::write_matrix(os, "W", p.gates[k].W);
    detail::write_matrix(os, "U", p.gates[k].U);
    detail::write_vector(os, "b", p.gates[k].b);
  }
  if (r) {
    os << "readout " << to_string(r->activation) << '\n';
    detail::write_matrix(os, "W", r->W);
    detail::write_vector(os, "b", r->b);
  }
  os << "end\n";
}

struct LoadedParams {
  CellParams cell;
  std::optional<ReadoutParams> readout;
};

inline LoadedParams load_params(std::istream& is) {
  detail::TokenReader in(is);
  in.expect("agrnn-params");
  if (in.count() != 1) throw FormatError("parameter file: unsupported version");
  LoadedParams out;
  auto& p = out.cell;
  in.expect("kind");
  p.kind = in.named(cell_kind_from_string);
  in.expect("input_dim");
  p.input_dim = in.count();
  in.expect("units");
  p.units = in.count();
  in.expect("proposal_activation");
  p.proposal_activation = in.named(activation_from_string);
  in.expect("output_activation");
  p.output_activation = in.named(activation_from_string);
  for (GateRole role : gate_layout(p.kind)) {
    in.expect("gate");
    in.expect(to_string(role));
    GateParams g;
    g.W = in.matrix("W");
    g.U = in.matrix("U");
    g.b = in.vector("b");
    p.gates.push_back(std::move(g));
  }
  try {
    validate(p);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("parameter file: ") + e.what());
  }
  auto tag = in.word();
  if (tag == "readout") {
    ReadoutParams r;
    r.activation = in.named(activation_from_string);
    r.W = in.matrix("W");
    r.b = in.vector("b");
    if (r.W.cols() != p.units || r.b.size() != r.W.rows())
      throw FormatError("parameter file: readout shape does not match units");
    out.readout = std::move(r);
    tag = in.word();
  }
  if (tag != "end") throw FormatError("parameter file: expected 'end', got '" + tag + "'");
  return out;
}

inline void save_params(const std::string& path, const CellParams& p,
                        const ReadoutParams* r = nullptr) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  save_params(os, p, r);
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

inline LoadedParams load_params(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return load_params(is);
}

}  // namespace agrnn
