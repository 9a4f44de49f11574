#include "yatt/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "yatt/common.hpp"
#include "yatt/exec.hpp"
#include "yatt/rng.hpp"

using namespace yatt;

namespace {

// Soft-threshold reference used by the closed-form checks.
double soft(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

// Centered +/-1 design with orthogonal columns: column j of an 8x8 sign
// matrix H[i][j] = (-1)^popcount(i & j), skipping the all-ones column 0.
// Every column has mean 0 and squared norm n, so the penalized solution is
// the soft-thresholded per-column correlation.
Matrix hadamard_design(std::size_t p) {
  REQUIRE(p <= 7);
  Matrix x(8, p);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      unsigned bits = static_cast<unsigned>(i) & static_cast<unsigned>(j + 1);
      x(i, j) = __builtin_popcount(bits) % 2 == 0 ? 1.0 : -1.0;
    }
  return x;
}

// Dense least squares via normal equations + Gaussian elimination with
// partial pivoting; independent oracle for the lambda = 0 case.
std::vector<double> ols_fit(const Matrix& x, const Vec& y) {
  const std::size_t n = x.rows, p = x.cols, d = p + 1;
  std::vector<std::vector<double>> a(d, std::vector<double>(d + 1, 0.0));
  auto z = [&](std::size_t i, std::size_t j) {
    return j == 0 ? 1.0 : x(i, j - 1);
  };
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c)
      for (std::size_t i = 0; i < n; ++i) a[r][c] += z(i, r) * z(i, c);
    for (std::size_t i = 0; i < n; ++i) a[r][d] += z(i, r) * y[i];
  }
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < d; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    REQUIRE(std::fabs(a[col][col]) > 1e-12);
    for (std::size_t r = 0; r < d; ++r) {
      if (r == col) continue;
      double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= d; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> beta(d);
  for (std::size_t r = 0; r < d; ++r) beta[r] = a[r][d] / a[r][r];
  return beta;  // [intercept, beta...]
}

PreparedRecord tiny_record(double base, double target) {
  PreparedRecord r;
  r.sequence = {{base, base + 0.1}, {base + 0.2, base + 0.3}};
  r.statics_after = {base + 0.4};
  r.target_scaled = target;
  return r;
}

}  // namespace

TEST_CASE("flatten_features lays out steps then statics") {
  Scaler scaler;
  scaler.feature_names = {"ADNI", "AP", "MG"};
  std::vector<PreparedRecord> recs = {tiny_record(0.0, 0.5),
                                      tiny_record(1.0, -0.5)};
  FlatDataset d = flatten_features(recs, scaler);
  REQUIRE(d.x.rows == 2);
  REQUIRE(d.x.cols == 5);
  CHECK(d.x(0, 0) == 0.0);
  CHECK(d.x(0, 1) == 0.1);
  CHECK(d.x(0, 2) == 0.2);
  CHECK(d.x(0, 3) == 0.3);
  CHECK(d.x(0, 4) == 0.4);
  CHECK(d.x(1, 0) == 1.0);
  CHECK(d.y[0] == 0.5);
  CHECK(d.y[1] == -0.5);
  REQUIRE(d.feature_names.size() == 5);
  CHECK(d.feature_names[0] == "ADNI_t1");
  CHECK(d.feature_names[1] == "AP_t1");
  CHECK(d.feature_names[2] == "ADNI_t2");
  CHECK(d.feature_names[3] == "AP_t2");
  CHECK(d.feature_names[4] == "MG");
}

TEST_CASE("flatten_features rejects empty and ragged inputs") {
  Scaler scaler;
  scaler.feature_names = {"ADNI", "AP", "MG"};
  CHECK_THROWS_AS(flatten_features({}, scaler), DataError);
  std::vector<PreparedRecord> recs = {tiny_record(0.0, 0.5),
                                      tiny_record(1.0, -0.5)};
  recs[1].sequence.pop_back();
  CHECK_THROWS_AS(flatten_features(recs, scaler), ShapeError);
}

TEST_CASE("lasso matches the soft-threshold closed form on orthogonal designs") {
  const Matrix x = hadamard_design(4);
  const std::size_t n = 8;
  for (std::uint64_t draw = 0; draw < 20; ++draw) {
    Rng rng(900 + draw);
    Vec y(n);
    for (double& v : y) v = rng.uniform(-3.0, 3.0);
    double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / 8.0;
    for (double lambda : {0.0, 0.05, 0.3, 2.0}) {
      LassoModel m = lasso_fit(x, y, lambda);
      CHECK(m.intercept == doctest::Approx(mean_y).epsilon(1e-10));
      for (std::size_t j = 0; j < 4; ++j) {
        double corr = 0.0;
        for (std::size_t i = 0; i < n; ++i) corr += x(i, j) * y[i];
        corr /= static_cast<double>(n);
        CHECK(m.beta[j] == doctest::Approx(soft(corr, lambda)).epsilon(1e-8));
      }
    }
    // Past the largest per-column correlation everything is pinned to zero.
    double lam_max = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      double corr = 0.0;
      for (std::size_t i = 0; i < n; ++i) corr += x(i, j) * y[i];
      lam_max = std::max(lam_max, std::fabs(corr) / static_cast<double>(n));
    }
    LassoModel dead = lasso_fit(x, y, lam_max * 1.001);
    for (double b : dead.beta) CHECK(b == 0.0);
  }
}

TEST_CASE("lasso with zero penalty reproduces direct least squares") {
  Rng rng(4242);
  const std::size_t n = 60, p = 4;
  Matrix x(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) x(i, j) = rng.uniform(-1.0, 1.0);
  Vec y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = 0.7 - 1.3 * x(i, 0) + 0.4 * x(i, 2) + 0.05 * rng.normal();

  std::vector<double> direct = ols_fit(x, y);
  LassoModel m = lasso_fit(x, y, 0.0, 1e-12, 50000);
  CHECK(m.intercept == doctest::Approx(direct[0]).epsilon(1e-6));
  for (std::size_t j = 0; j < p; ++j)
    CHECK(m.beta[j] == doctest::Approx(direct[j + 1]).epsilon(1e-6));
}

TEST_CASE("lasso objective never increases across sweeps") {
  Rng rng(77);
  const std::size_t n = 40, p = 12;
  Matrix x(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) x(i, j) = rng.uniform(-1.0, 1.0);
  Vec y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = x(i, 1) - 0.5 * x(i, 7) + 0.3 * rng.normal();

  for (double lambda : {0.0, 0.01, 0.1}) {
    LassoModel m = lasso_fit(x, y, lambda);
    REQUIRE(m.objective_trace.size() == m.sweeps);
    REQUIRE(m.sweeps >= 1);
    for (std::size_t s = 1; s < m.objective_trace.size(); ++s)
      CHECK(m.objective_trace[s] <= m.objective_trace[s - 1] + 1e-12);
    CHECK(m.objective_trace.back() ==
          doctest::Approx(lasso_objective(x, y, m)).epsilon(1e-12));
  }
}

TEST_CASE("lasso ignores constant columns") {
  Rng rng(55);
  const std::size_t n = 30;
  Matrix x(n, 3);
  Vec y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform(-1.0, 1.0);
    x(i, 1) = 3.7;  // constant; must not absorb the intercept
    x(i, 2) = rng.uniform(-1.0, 1.0);
    y[i] = 2.0 * x(i, 0) + 1.0;
  }
  LassoModel m = lasso_fit(x, y, 1e-4);
  CHECK(m.beta[1] == 0.0);
  CHECK(m.beta[0] == doctest::Approx(2.0).epsilon(2e-3));
}

TEST_CASE("lasso input validation") {
  Matrix x(4, 2);
  Vec y(3);
  CHECK_THROWS_AS(lasso_fit(x, y, 0.1), ShapeError);
  CHECK_THROWS_AS(lasso_fit(Matrix(), {}, 0.1), DataError);
  Vec y4(4);
  CHECK_THROWS_AS(lasso_fit(x, y4, -0.5), ConfigError);
  LassoModel m;
  m.beta = {1.0};
  CHECK_THROWS_AS(lasso_predict(m, x), ShapeError);
}

namespace {

struct ForestFixture {
  Matrix x;
  Vec y;
  ForestFixture(std::size_t n, std::uint64_t seed) : x(n, 5), y(n) {
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < 5; ++j) x(i, j) = rng.uniform(-1.0, 1.0);
      y[i] = 3.0 * x(i, 0) - 2.0 * x(i, 3) + 0.2 * rng.normal();
    }
  }
};

double rms_error(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

}  // namespace

TEST_CASE("forest predictions are convex combinations of training targets") {
  ForestFixture f(120, 31);
  ForestParams params;
  params.n_trees = 25;
  ForestModel m = forest_fit(f.x, f.y, params, 9);
  double lo = *std::min_element(f.y.begin(), f.y.end());
  double hi = *std::max_element(f.y.begin(), f.y.end());
  Matrix probe(50, 5);
  Rng rng(77);
  for (std::size_t i = 0; i < probe.rows; ++i)
    for (std::size_t j = 0; j < 5; ++j) probe(i, j) = rng.uniform(-2.0, 2.0);
  for (double p : forest_predict(m, probe)) {
    CHECK(p >= lo);
    CHECK(p <= hi);
  }
}

TEST_CASE("forest with bootstrap off and leaf-sized root is the mean predictor") {
  ForestFixture f(40, 5);
  ForestParams params;
  params.n_trees = 7;
  params.bootstrap = false;
  params.min_samples_leaf = 40;  // forces every tree to a single leaf
  ForestModel m = forest_fit(f.x, f.y, params, 123);
  double mean = std::accumulate(f.y.begin(), f.y.end(), 0.0) / 40.0;
  for (const Tree& t : m.trees) {
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.nodes[0].feature == -1);
  }
  for (double p : forest_predict(m, f.x))
    CHECK(p == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("forest learns smooth structure better than the mean") {
  ForestFixture f(300, 11);
  ForestParams params;
  ForestModel m = forest_fit(f.x, f.y, params, 21);
  Vec pred = forest_predict(m, f.x);
  double mean = std::accumulate(f.y.begin(), f.y.end(), 0.0) / 300.0;
  Vec flat(300, mean);
  CHECK(rms_error(pred, f.y) < 0.5 * rms_error(flat, f.y));
}

TEST_CASE("forest training is deterministic and execution-mode independent") {
  ForestFixture f(80, 3);
  ForestParams params;
  params.n_trees = 12;
  ForestModel a = forest_fit(f.x, f.y, params, 42);
  ForestModel b = forest_fit(f.x, f.y, params, 42);

  exec::Mode saved = exec::mode();
  exec::set_mode(exec::Mode::serial);
  ForestModel c = forest_fit(f.x, f.y, params, 42);
  exec::set_mode(saved);

  ForestModel d = forest_fit(f.x, f.y, params, 43);

  Vec pa = forest_predict(a, f.x), pb = forest_predict(b, f.x),
      pc = forest_predict(c, f.x), pd = forest_predict(d, f.x);
  bool differs = false;
  for (std::size_t i = 0; i < 80; ++i) {
    CHECK(pa[i] == pb[i]);
    CHECK(pa[i] == pc[i]);
    differs = differs || pa[i] != pd[i];
  }
  CHECK(differs);
  REQUIRE(a.trees.size() == c.trees.size());
  for (std::size_t t = 0; t < a.trees.size(); ++t)
    REQUIRE(a.trees[t].nodes.size() == c.trees[t].nodes.size());
}

TEST_CASE("forest respects leaf size and depth limits") {
  ForestFixture f(100, 17);
  ForestParams params;
  params.n_trees = 5;
  params.max_depth = 2;
  params.min_samples_leaf = 10;
  params.bootstrap = false;
  ForestModel m = forest_fit(f.x, f.y, params, 1);
  for (const Tree& t : m.trees) {
    // Depth limit 2 allows at most 7 nodes.
    CHECK(t.nodes.size() <= 7);
    // Count training rows reaching each leaf; none may hold fewer than 10.
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
      if (t.nodes[i].feature >= 0) continue;
      std::size_t hits = 0;
      for (std::size_t r = 0; r < 100; ++r) {
        int id = 0;
        for (;;) {
          const TreeNode& node = t.nodes[static_cast<std::size_t>(id)];
          if (node.feature < 0) break;
          id = f.x(r, static_cast<std::size_t>(node.feature)) <= node.threshold
                   ? node.left
                   : node.right;
        }
        if (static_cast<std::size_t>(id) == i) ++hits;
      }
      CHECK(hits >= 10);
    }
  }
}

TEST_CASE("forest input validation") {
  Matrix x(4, 2);
  Vec y(4);
  ForestParams params;
  params.n_trees = 0;
  CHECK_THROWS_AS(forest_fit(x, y, params, 1), ConfigError);
  params.n_trees = 1;
  params.feature_fraction = 0.0;
  CHECK_THROWS_AS(forest_fit(x, y, params, 1), ConfigError);
  params.feature_fraction = 0.5;
  Vec y3(3);
  CHECK_THROWS_AS(forest_fit(x, y3, params, 1), ShapeError);
  ForestModel empty;
  CHECK_THROWS_AS(forest_predict(empty, x), DataError);
}
