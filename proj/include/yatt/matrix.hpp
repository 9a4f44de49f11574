#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "yatt/common.hpp"

namespace yatt {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles. Sequence lengths and hidden sizes in
/// this codebase are small enough that dense storage is the right call.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double* row(std::size_t r) { return data.data() + r * cols; }

  std::size_t size() const { return data.size(); }

  std::string shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// out = W x + b
inline void affine_into(const Matrix& w, const Vec& x, const Vec& b, Vec& out) {
  if (w.cols != x.size() || w.rows != b.size()) {
    throw ShapeError("affine: W is " + w.shape_str() + ", x has length " +
                     std::to_string(x.size()) + ", b has length " +
                     std::to_string(b.size()));
  }
  out.resize(w.rows);
  for (std::size_t r = 0; r < w.rows; ++r) {
    out[r] = b[r] + dot(w.row(r), x.data(), w.cols);
  }
}

inline Vec affine(const Matrix& w, const Vec& x, const Vec& b) {
  Vec out;
  affine_into(w, x, b, out);
  return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// max-subtraction keeps saturated scores from overflowing exp
inline Vec softmax(const Vec& v) {
  Vec out(v.size());
  double mx = v[0];
  for (double x : v) mx = std::max(mx, x);
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - mx);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

inline double mse_loss(const Vec& pred, const Vec& target) {
  if (pred.size() != target.size()) {
    throw ShapeError("mse_loss: pred has length " + std::to_string(pred.size()) +
                     ", target has length " + std::to_string(target.size()));
  }
  if (pred.empty()) throw ShapeError("mse_loss: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double d = pred[i] - target[i];
    s += d * d;
  }
  return s / static_cast<double>(pred.size());
}

}  // namespace yatt
