#pragma once

#include <string>
#include <vector>

#include "yatt/matrix.hpp"

namespace yatt {

/// Alignment model: a single affine map from an annotation to a scalar score.
/// The two regressor variants differ by exactly h2 + 1 parameters, so the
/// scorer has no hidden layer.
struct AttentionParams {
  Vec weight;        // h2
  double bias = 0.0;
};

struct AttentionMap {
  std::string record_id;
  Vec weights;  // per time step, nonnegative, sums to 1
};

struct AttentionCache {
  std::vector<Vec> annotations;
  Vec alpha;
};

/// Soft temporal attention: scores each annotation, softmax-normalizes, and
/// returns the weighted sum of annotations as the context vector.
Vec attend(const AttentionParams& params, const std::vector<Vec>& annotations,
           Vec* alpha_out = nullptr, AttentionCache* cache = nullptr);

/// Exact gradients through the softmax-weighted sum. Parameter gradients come
/// back as an AttentionParams of the same shape; `annotation_grads`, when
/// given, receives the gradient on each annotation.
AttentionParams attend_backward(const AttentionParams& params,
                                const AttentionCache& cache,
                                const Vec& upstream_context,
                                std::vector<Vec>* annotation_grads = nullptr);

}  // namespace yatt
