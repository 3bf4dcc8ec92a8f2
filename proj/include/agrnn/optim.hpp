#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "agrnn/bptt.hpp"

namespace agrnn {

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step_count = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_params(const CellParams& p, const ReadoutParams& r,
                              double lr = 1e-3, double beta1 = 0.9,
                              double beta2 = 0.999, double epsilon = 1e-8) {
    const std::size_t n = parameter_count(p, r);
    return {std::vector<double>(n), std::vector<double>(n), 0, lr, beta1, beta2,
            epsilon};
  }

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

// Bias-corrected Adam update, applied in place to `p` and `r`.
inline void adam_step(AdamState& st, CellParams& p, ReadoutParams& r,
                      const Gradients& g) {
  const std::size_t n = parameter_count(p, r);
  std::size_t gn = 0;
  for_each_tensor(g, [&](std::span<const double> s) { gn += s.size(); });
  if (st.m.size() != n || st.v.size() != n || gn != n) {
    throw DimensionError("adam_step: state/gradient size does not match parameters");
  }

  std::vector<std::span<const double>> grads;
  for_each_tensor(g, [&](std::span<const double> s) { grads.push_back(s); });

  ++st.step_count;
  const double t = double(st.step_count);
  const double c1 = 1.0 - std::pow(st.beta1, t);
  const double c2 = 1.0 - std::pow(st.beta2, t);

  std::size_t k = 0;
  std::size_t tensor = 0;
  for_each_tensor(p, r, [&](std::span<double> w) {
    auto gs = grads[tensor++];
    if (gs.size() != w.size())
      throw DimensionError("adam_step: gradient tensor shape mismatch");
    for (std::size_t i = 0; i < w.size(); ++i, ++k) {
      const double gi = gs[i];
      st.m[k] = st.beta1 * st.m[k] + (1.0 - st.beta1) * gi;
      st.v[k] = st.beta2 * st.v[k] + (1.0 - st.beta2) * gi * gi;
      const double mhat = st.m[k] / c1;
      const double vhat = st.v[k] / c2;
      w[i] -= st.lr * mhat / (std::sqrt(vhat) + st.epsilon);
    }
  });
}

}  // namespace agrnn
