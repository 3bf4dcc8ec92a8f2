#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace agrnn {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dense vector. Templated on the scalar so the cell equations can be
// evaluated under instrumented or integer scalar types as well as double.
template <class T>
class BasicVector {
 public:
  using value_type = T;

  BasicVector() = default;
  explicit BasicVector(std::size_t n, T fill = T(0)) : data_(n, fill) {}
  BasicVector(std::initializer_list<T> init) : data_(init) {}
  explicit BasicVector(std::vector<T> data) : data_(std::move(data)) {}

  static BasicVector zeros(std::size_t n) { return BasicVector(n); }

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> span() { return data_; }
  std::span<const T> span() const { return data_; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  const std::vector<T>& values() const { return data_; }

  friend bool operator==(const BasicVector&, const BasicVector&) = default;

 private:
  std::vector<T> data_;
};

// Row-major dense matrix.
template <class T>
class BasicMatrix {
 public:
  using value_type = T;

  BasicMatrix() = default;
  BasicMatrix(std::size_t rows, std::size_t cols, T fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  BasicMatrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("matrix data length " + std::to_string(data_.size()) +
                           " != " + std::to_string(rows_) + "x" +
                           std::to_string(cols_));
    }
  }
  BasicMatrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionError("ragged matrix initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static BasicMatrix zeros(std::size_t rows, std::size_t cols) {
    return BasicMatrix(rows, cols);
  }
  static BasicMatrix identity(std::size_t n) {
    BasicMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> span() { return data_; }
  std::span<const T> span() const { return data_; }

  friend bool operator==(const BasicMatrix&, const BasicMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Vector = BasicVector<double>;
using Matrix = BasicMatrix<double>;

namespace detail {
inline void require(bool ok, const char* what, std::size_t got,
                    std::size_t want) {
  if (!ok) {
    throw DimensionError(std::string(what) + ": got " + std::to_string(got) +
                         ", expected " + std::to_string(want));
  }
}
}  // namespace detail

template <class T>
BasicVector<T> matvec(const BasicMatrix<T>& m, const BasicVector<T>& v) {
  detail::require(m.cols() == v.size(), "matvec operand length", v.size(),
                  m.cols());
  BasicVector<T> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    T acc(0);
    for (std::size_t c = 0; c < row.size(); ++c) acc = acc + row[c] * v[c];
    out[r] = acc;
  }
  return out;
}

// W x + U h + b, the pre-activation shared by every gate.
template <class T>
BasicVector<T> affine(const BasicMatrix<T>& w, const BasicVector<T>& x,
                      const BasicMatrix<T>& u, const BasicVector<T>& h,
                      const BasicVector<T>& b) {
  detail::require(w.cols() == x.size(), "input length", x.size(), w.cols());
  detail::require(u.cols() == h.size(), "state length", h.size(), u.cols());
  detail::require(w.rows() == u.rows() && w.rows() == b.size(),
                  "gate rows", b.size(), w.rows());
  BasicVector<T> out(b);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    auto wr = w.row(r);
    auto ur = u.row(r);
    T acc = out[r];
    for (std::size_t c = 0; c < wr.size(); ++c) acc = acc + wr[c] * x[c];
    for (std::size_t c = 0; c < ur.size(); ++c) acc = acc + ur[c] * h[c];
    out[r] = acc;
  }
  return out;
}

// out += m^T d
inline void matvec_transpose_acc(const Matrix& m, const Vector& d, Vector& out) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double dr = d[r];
    if (dr == 0.0) continue;
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c] * dr;
  }
}

// m += a b^T
inline void outer_acc(Matrix& m, const Vector& a, const Vector& b) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double ar = a[r];
    if (ar == 0.0) continue;
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += ar * b[c];
  }
}

inline double dot(const Vector& a, const Vector& b) {
  detail::require(a.size() == b.size(), "dot operand length", b.size(),
                  a.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// ---------------------------------------------------------------------------
// Activations

enum class ActivationKind { Tanh, Sigmoid, Relu, Identity, Softmax };

inline const char* to_string(ActivationKind k) {
  switch (k) {
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::Sigmoid: return "sigmoid";
    case ActivationKind::Relu: return "relu";
    case ActivationKind::Identity: return "identity";
    case ActivationKind::Softmax: return "softmax";
  }
  return "?";
}

inline ActivationKind activation_from_string(const std::string& s) {
  for (auto k : {ActivationKind::Tanh, ActivationKind::Sigmoid,
                 ActivationKind::Relu, ActivationKind::Identity,
                 ActivationKind::Softmax}) {
    if (s == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown activation '" + s + "'");
}

// Relu and Sigmoid are the non-negative ones usable as a phi^+.
inline bool is_non_negative(ActivationKind k) {
  return k == ActivationKind::Relu || k == ActivationKind::Sigmoid;
}

// x^+ = max(0, x)
template <class T>
T pos(const T& x) {
  return x < T(0) ? T(0) : x;
}

// x^- = min(0, x)
template <class T>
T neg(const T& x) {
  return x < T(0) ? x : T(0);
}

template <class T>
T sigmoid(const T& x) {
  using std::exp;
  if (x < T(0)) {
    const T e = exp(x);
    return e / (T(1) + e);
  }
  return T(1) / (T(1) + exp(T(0) - x));
}

template <class T>
T activate(ActivationKind kind, const T& x) {
  using std::tanh;
  switch (kind) {
    case ActivationKind::Tanh: return tanh(x);
    case ActivationKind::Sigmoid: return sigmoid(x);
    case ActivationKind::Relu: return pos(x);
    case ActivationKind::Identity: return x;
    case ActivationKind::Softmax: break;
  }
  throw std::invalid_argument("softmax is not an elementwise activation");
}

// Derivative expressed through the activation output y where possible;
// the Relu branch needs the pre-activation (subgradient 0 at the kink).
inline double activation_derivative(ActivationKind kind, double pre, double y) {
  switch (kind) {
    case ActivationKind::Tanh: return 1.0 - y * y;
    case ActivationKind::Sigmoid: return y * (1.0 - y);
    case ActivationKind::Relu: return pre > 0.0 ? 1.0 : 0.0;
    case ActivationKind::Identity: return 1.0;
    case ActivationKind::Softmax: break;
  }
  throw std::invalid_argument("softmax derivative is not elementwise");
}

inline Vector softmax(const Vector& v) {
  Vector out(v.size());
  if (v.empty()) return out;
  const double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - mx);
    sum += out[i];
  }
  for (auto& x : out) x /= sum;
  return out;
}

template <class T>
BasicVector<T> apply_activation(ActivationKind kind, const BasicVector<T>& v) {
  if constexpr (std::is_same_v<T, double>) {
    if (kind == ActivationKind::Softmax) return softmax(v);
  }
  BasicVector<T> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = activate(kind, v[i]);
  return out;
}

template <class T>
std::pair<BasicVector<T>, BasicVector<T>> relu_pos_neg(const BasicVector<T>& v) {
  BasicVector<T> p(v.size()), n(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    p[i] = pos(v[i]);
    n[i] = neg(v[i]);
  }
  return {std::move(p), std::move(n)};
}

inline bool all_finite(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(),
                     [](double x) { return std::isfinite(x); });
}

}  // namespace agrnn
