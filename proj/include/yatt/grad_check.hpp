#pragma once

#include <cmath>
#include <functional>

#include "yatt/matrix.hpp"

namespace yatt {

/// Central-difference check of an analytic gradient. Returns the max over
/// parameters of |analytic - numeric| / max(1, |analytic| + |numeric|).
inline double grad_check(const std::function<double(const Vec&)>& loss_fn,
                         const Vec& params, const Vec& analytic,
                         double h = 1e-5) {
  if (params.size() != analytic.size()) {
    throw ShapeError("grad_check: params " + std::to_string(params.size()) +
                     " vs analytic " + std::to_string(analytic.size()));
  }
  Vec p = params;
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + h;
    const double up = loss_fn(p);
    p[i] = keep - h;
    const double down = loss_fn(p);
    p[i] = keep;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("grad_check: non-finite loss at parameter " +
                         std::to_string(i));
    }
    const double numeric = (up - down) / (2.0 * h);
    const double denom =
        std::max(1.0, std::abs(analytic[i]) + std::abs(numeric));
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace yatt
