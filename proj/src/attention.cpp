#include "yatt/attention.hpp"

#include <string>

#include "yatt/common.hpp"

namespace yatt {

Vec attend(const AttentionParams& params, const std::vector<Vec>& annotations,
           Vec* alpha_out, AttentionCache* cache) {
  if (annotations.empty()) throw ShapeError("attend: empty annotation sequence");
  const std::size_t h = params.weight.size();
  const std::size_t t_steps = annotations.size();

  Vec scores(t_steps);
  for (std::size_t t = 0; t < t_steps; ++t) {
    if (annotations[t].size() != h) {
      throw ShapeError("attend: annotation " + std::to_string(t) + " has length " +
                       std::to_string(annotations[t].size()) +
                       ", alignment layer expects " + std::to_string(h));
    }
    scores[t] = params.bias + dot(params.weight.data(), annotations[t].data(), h);
  }

  Vec alpha = softmax(scores);
  Vec context(h, 0.0);
  for (std::size_t t = 0; t < t_steps; ++t) {
    const double a = alpha[t];
    for (std::size_t i = 0; i < h; ++i) context[i] += a * annotations[t][i];
  }

  if (alpha_out) *alpha_out = alpha;
  if (cache) {
    cache->annotations = annotations;
    cache->alpha = std::move(alpha);
  }
  return context;
}

AttentionParams attend_backward(const AttentionParams& params,
                                const AttentionCache& cache,
                                const Vec& upstream_context,
                                std::vector<Vec>* annotation_grads) {
  const std::size_t h = params.weight.size();
  const std::size_t t_steps = cache.annotations.size();
  if (upstream_context.size() != h) {
    throw ShapeError("attend_backward: upstream has length " +
                     std::to_string(upstream_context.size()) + ", expected " +
                     std::to_string(h));
  }
  if (cache.alpha.size() != t_steps || t_steps == 0) {
    throw ShapeError("attend_backward: cache is inconsistent or empty");
  }

  // context = sum_t alpha_t a_t
  Vec dalpha(t_steps);
  for (std::size_t t = 0; t < t_steps; ++t) {
    dalpha[t] = dot(upstream_context.data(), cache.annotations[t].data(), h);
  }

  // softmax Jacobian: ds_t = alpha_t (dalpha_t - sum_j alpha_j dalpha_j)
  double mix = 0.0;
  for (std::size_t t = 0; t < t_steps; ++t) mix += cache.alpha[t] * dalpha[t];
  Vec dscore(t_steps);
  for (std::size_t t = 0; t < t_steps; ++t) {
    dscore[t] = cache.alpha[t] * (dalpha[t] - mix);
  }

  AttentionParams g;
  g.weight.assign(h, 0.0);
  g.bias = 0.0;
  if (annotation_grads) annotation_grads->assign(t_steps, Vec(h, 0.0));

  for (std::size_t t = 0; t < t_steps; ++t) {
    const double ds = dscore[t];
    const double a = cache.alpha[t];
    g.bias += ds;
    for (std::size_t i = 0; i < h; ++i) {
      g.weight[i] += ds * cache.annotations[t][i];
      if (annotation_grads) {
        (*annotation_grads)[t][i] = a * upstream_context[i] + ds * params.weight[i];
      }
    }
  }
  return g;
}

}  // namespace yatt
