#pragma once

#include <cmath>
#include <cstddef>

#include "yatt/matrix.hpp"

namespace yatt {

struct AdamState {
  Vec m;  // first-moment accumulator
  Vec v;  // second-moment accumulator
  std::size_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double learning_rate = 0.001;

  explicit AdamState(std::size_t n, double lr = 0.001)
      : m(n, 0.0), v(n, 0.0), learning_rate(lr) {}
};

// standard bias-corrected Adam update
inline void adam_step(Vec& params, const Vec& grads, AdamState& st) {
  if (params.size() != grads.size() || params.size() != st.m.size()) {
    throw ShapeError("adam_step: params " + std::to_string(params.size()) +
                     ", grads " + std::to_string(grads.size()) + ", state " +
                     std::to_string(st.m.size()));
  }
  st.step += 1;
  const double b1 = st.beta1, b2 = st.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(st.step));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(st.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    st.m[i] = b1 * st.m[i] + (1.0 - b1) * g;
    st.v[i] = b2 * st.v[i] + (1.0 - b2) * g * g;
    const double mhat = st.m[i] / corr1;
    const double vhat = st.v[i] / corr2;
    params[i] -= st.learning_rate * mhat / (std::sqrt(vhat) + st.eps);
  }
}

}  // namespace yatt
