#include <cmath>

#include "doctest.h"
#include "yatt/attention.hpp"
#include "yatt/common.hpp"
#include "yatt/grad_check.hpp"
#include "yatt/rng.hpp"

using namespace yatt;

namespace {

std::vector<Vec> random_annotations(std::size_t t, std::size_t h, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec> a(t, Vec(h));
  for (auto& row : a) {
    for (double& x : row) x = rng.uniform(-2.0, 2.0);
  }
  return a;
}

}  // namespace

TEST_CASE("weights form a distribution and the context stays in the hull") {
  AttentionParams p;
  p.weight = {0.7, -0.3, 0.1};
  p.bias = 0.2;
  const auto annotations = random_annotations(6, 3, 5);

  Vec alpha;
  const Vec ctx = attend(p, annotations, &alpha);
  REQUIRE(alpha.size() == 6);
  REQUIRE(ctx.size() == 3);

  double sum = 0.0;
  for (double a : alpha) {
    CHECK(a >= 0.0);
    sum += a;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

  for (std::size_t d = 0; d < 3; ++d) {
    double lo = annotations[0][d], hi = annotations[0][d];
    for (const auto& a : annotations) {
      lo = std::min(lo, a[d]);
      hi = std::max(hi, a[d]);
    }
    CHECK(ctx[d] >= lo - 1e-12);
    CHECK(ctx[d] <= hi + 1e-12);
  }
}

TEST_CASE("identical annotations get uniform weight and their own context") {
  AttentionParams p;
  p.weight = {1.0, -2.0};
  p.bias = 0.5;
  const Vec row = {0.3, -1.1};
  const std::vector<Vec> annotations(4, row);

  Vec alpha;
  const Vec ctx = attend(p, annotations, &alpha);
  for (double a : alpha) CHECK(a == doctest::Approx(0.25).epsilon(1e-12));
  for (std::size_t d = 0; d < row.size(); ++d) {
    CHECK(ctx[d] == doctest::Approx(row[d]).epsilon(1e-12));
  }
}

TEST_CASE("a single annotation takes all the weight") {
  AttentionParams p;
  p.weight = {0.4};
  p.bias = -1.0;
  Vec alpha;
  const Vec ctx = attend(p, {Vec{2.5}}, &alpha);
  CHECK(alpha == Vec{1.0});
  CHECK(ctx[0] == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("scoring bias shifts cancel out") {
  AttentionParams p;
  p.weight = {0.9, 0.1};
  p.bias = 0.0;
  AttentionParams shifted = p;
  shifted.bias = 42.0;
  const auto annotations = random_annotations(5, 2, 7);

  Vec a1, a2;
  attend(p, annotations, &a1);
  attend(shifted, annotations, &a2);
  for (std::size_t t = 0; t < a1.size(); ++t) {
    CHECK(a1[t] == doctest::Approx(a2[t]).epsilon(1e-12));
  }
}

TEST_CASE("a dominant score wins almost all mass") {
  AttentionParams p;
  p.weight = {1.0};
  p.bias = 0.0;
  const std::vector<Vec> annotations = {Vec{0.0}, Vec{100.0}, Vec{1.0}};
  Vec alpha;
  attend(p, annotations, &alpha);
  CHECK(alpha[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(alpha[0] < 1e-40);
}

TEST_CASE("attend validates its inputs") {
  AttentionParams p;
  p.weight = {1.0, 2.0};
  CHECK_THROWS_AS(attend(p, {}), ShapeError);
  CHECK_THROWS_AS(attend(p, {Vec{1.0}}), ShapeError);  // annotation width mismatch
}

TEST_CASE("attention parameter gradients match central differences") {
  const std::size_t t_steps = 4, h = 3;
  AttentionParams p;
  p.weight = {0.3, -0.8, 0.5};
  p.bias = 0.1;
  const auto annotations = random_annotations(t_steps, h, 11);

  Rng urng(13);
  Vec u(h);
  for (double& x : u) x = urng.uniform(-1.0, 1.0);

  auto loss_fn = [&](const Vec& flat) {
    AttentionParams probe;
    probe.weight.assign(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(h));
    probe.bias = flat[h];
    const Vec ctx = attend(probe, annotations);
    return dot(u.data(), ctx.data(), h);
  };

  AttentionCache cache;
  attend(p, annotations, nullptr, &cache);
  const AttentionParams g = attend_backward(p, cache, u);

  Vec flat = p.weight;
  flat.push_back(p.bias);
  Vec analytic = g.weight;
  analytic.push_back(g.bias);
  const double err = grad_check(loss_fn, flat, analytic);
  CHECK(err < 1e-4);
  CHECK(err < 1e-8);
}

TEST_CASE("annotation gradients match central differences") {
  const std::size_t t_steps = 3, h = 2;
  AttentionParams p;
  p.weight = {0.6, -0.4};
  p.bias = -0.2;
  auto annotations = random_annotations(t_steps, h, 17);

  Rng urng(19);
  Vec u(h);
  for (double& x : u) x = urng.uniform(-1.0, 1.0);

  auto loss_fn = [&](const Vec& flat) {
    std::vector<Vec> probe(t_steps, Vec(h));
    for (std::size_t t = 0; t < t_steps; ++t) {
      for (std::size_t d = 0; d < h; ++d) probe[t][d] = flat[t * h + d];
    }
    const Vec ctx = attend(p, probe);
    return dot(u.data(), ctx.data(), h);
  };

  AttentionCache cache;
  attend(p, annotations, nullptr, &cache);
  std::vector<Vec> ann_grads;
  attend_backward(p, cache, u, &ann_grads);

  Vec flat, analytic;
  for (std::size_t t = 0; t < t_steps; ++t) {
    flat.insert(flat.end(), annotations[t].begin(), annotations[t].end());
    analytic.insert(analytic.end(), ann_grads[t].begin(), ann_grads[t].end());
  }
  CHECK(grad_check(loss_fn, flat, analytic) < 1e-8);
}
