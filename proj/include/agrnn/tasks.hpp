#pragma once

#include <charconv>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "agrnn/cells.hpp"
#include "agrnn/rng.hpp"
#include "agrnn/train.hpp"

namespace agrnn {

// Adding problem: target = v_i + v_j with i in [0, n/2), j in [n/2, n).
struct AddingInstance {
  std::size_t n = 0;
  Vector v;
  Vector w;
  std::size_t i = 0;
  std::size_t j = 0;
  double target = 0.0;

  friend bool operator==(const AddingInstance&, const AddingInstance&) = default;
};

inline AddingInstance gen_adding(Rng& rng, std::size_t n) {
  if (n < 2 || n % 2 != 0) {
    throw std::invalid_argument("gen_adding: n must be even and >= 2 (got " +
                                std::to_string(n) + ")");
  }
  AddingInstance a;
  a.n = n;
  a.v = rng_uniform(rng, n);
  a.w = Vector(n);
  a.i = rng.index(n / 2);
  a.j = n / 2 + rng.index(n / 2);
  a.w[a.i] = 1.0;
  a.w[a.j] = 1.0;
  a.target = dot(a.v, a.w);
  return a;
}

inline std::vector<AddingInstance> gen_adding_set(Rng& rng, std::size_t n,
                                                  std::size_t count) {
  std::vector<AddingInstance> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(gen_adding(rng, n));
  return out;
}

// x_t = (v_t, w_t)
inline std::vector<Vector> adding_inputs(const AddingInstance& a) {
  std::vector<Vector> xs;
  xs.reserve(a.n);
  for (std::size_t t = 0; t < a.n; ++t) xs.push_back(Vector{a.v[t], a.w[t]});
  return xs;
}

inline Dataset adding_dataset(const std::vector<AddingInstance>& set) {
  Dataset d;
  d.reserve(set.size());
  for (const auto& a : set) d.push_back({adding_inputs(a), Vector{a.target}});
  return d;
}

inline constexpr double kNaivePrediction = 1.0;

// MSE of always predicting E[v_i + v_j] = 1.
inline double naive_baseline_mse(const std::vector<AddingInstance>& set) {
  if (set.empty()) throw std::invalid_argument("naive_baseline_mse: empty dataset");
  double acc = 0.0;
  for (const auto& a : set) {
    const double d = a.target - kNaivePrediction;
    acc += d * d;
  }
  return acc / double(set.size());
}

// With v <= 1 and h <= 2 after the second marker, a non-marker step leaks
// (v_t + h - a)^+ unless a >= 3.
inline constexpr double kMinGateMagnitude = 3.0;
inline constexpr double kDefaultGateMagnitude = 4.0;

// aGNU weights that solve the adding problem exactly:
//   hhat_t = (v_t + h_{t-1})^+,  u_t = -2a w_t + a.
inline CellParams handcrafted_solver(double a = kDefaultGateMagnitude) {
  if (!(a >= kMinGateMagnitude)) {
    throw std::invalid_argument(
        "handcrafted_solver: gate magnitude a must be >= 3 (got " +
        std::to_string(a) +
        "); below that a non-marker step can leak v_t + h - a > 0 once h "
        "holds two marked values");
  }
  CellParams p = make_cell_params(CellKind::AGnu, 2, 1);
  p.proposal_activation = ActivationKind::Relu;
  auto& u = p.gate(GateRole::Update);
  u.W(0, 0) = 0.0;
  u.W(0, 1) = -2.0 * a;
  u.U(0, 0) = 0.0;
  u.b[0] = a;
  auto& h = p.gate(GateRole::Proposal);
  h.W(0, 0) = 1.0;
  h.W(0, 1) = 0.0;
  h.U(0, 0) = 1.0;
  h.b[0] = 0.0;
  return p;
}

inline double solve_handcrafted(const CellParams& solver,
                                const AddingInstance& a) {
  auto res = run_sequence(solver, zero_state(solver), adding_inputs(a));
  return res.final_state.h[0];
}

// ---------------------------------------------------------------------------
// CSV fixtures, one instance per line: n,v_0,...,v_{n-1},i,j,target
// (no header; %.17g so doubles round-trip exactly).

inline void write_adding_csv(std::ostream& os,
                             const std::vector<AddingInstance>& set) {
  char buf[32];
  for (const auto& a : set) {
    os << a.n;
    for (double x : a.v) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      os << ',' << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", a.target);
    os << ',' << a.i << ',' << a.j << ',' << buf << '\n';
  }
}

inline void write_adding_csv(const std::string& path,
                             const std::vector<AddingInstance>& set) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_adding_csv(os, set);
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

inline std::vector<AddingInstance> read_adding_csv(std::istream& is) {
  std::vector<AddingInstance> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    auto bad = [&](const std::string& why) {
      return std::runtime_error("adding csv line " + std::to_string(lineno) +
                                ": " + why);
    };
    if (fields.empty()) throw bad("empty record");
    AddingInstance a;
    a.n = std::stoul(fields[0]);
    if (fields.size() != a.n + 4) throw bad("expected n + 4 fields");
    a.v = Vector(a.n);
    a.w = Vector(a.n);
    for (std::size_t t = 0; t < a.n; ++t) a.v[t] = std::strtod(fields[1 + t].c_str(), nullptr);
    a.i = std::stoul(fields[a.n + 1]);
    a.j = std::stoul(fields[a.n + 2]);
    a.target = std::strtod(fields[a.n + 3].c_str(), nullptr);
    if (a.i >= a.n / 2 || a.j < a.n / 2 || a.j >= a.n) throw bad("marker out of range");
    a.w[a.i] = 1.0;
    a.w[a.j] = 1.0;
    out.push_back(std::move(a));
  }
  return out;
}

inline std::vector<AddingInstance> read_adding_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_adding_csv(is);
}

}  // namespace agrnn
