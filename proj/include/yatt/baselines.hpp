#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "yatt/matrix.hpp"
#include "yatt/pipeline.hpp"

namespace yatt {

/// Row-per-record design matrix for the flat baselines: the scaled sequence
/// values in step-major order followed by the head statics.
struct FlatDataset {
  Matrix x;
  Vec y;  // scaled targets
  std::vector<std::string> feature_names;
};

FlatDataset flatten_features(const std::vector<PreparedRecord>& records,
                             const Scaler& scaler);

// ---------------------------------------------------------------------------
// LASSO
// ---------------------------------------------------------------------------

struct LassoModel {
  Vec beta;
  double intercept = 0.0;
  double lambda = 0.0;
  std::vector<double> objective_trace;  // after each full sweep
  std::size_t sweeps = 0;
};

/// Cyclic coordinate descent on (1/(2n))||y - b0 - X beta||^2 + lambda*||beta||_1
/// with an unpenalized intercept. Converges when no coefficient moves more
/// than tol in a sweep.
LassoModel lasso_fit(const Matrix& x, const Vec& y, double lambda,
                     double tol = 1e-8, std::size_t max_sweeps = 10000);

Vec lasso_predict(const LassoModel& m, const Matrix& x);
double lasso_objective(const Matrix& x, const Vec& y, const LassoModel& m);

// ---------------------------------------------------------------------------
// Random forest
// ---------------------------------------------------------------------------

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 12;
  std::size_t min_samples_leaf = 5;
  double feature_fraction = 1.0 / 3.0;  // per split
  bool bootstrap = true;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf mean
};

struct Tree {
  std::vector<TreeNode> nodes;  // node 0 is the root
};

struct ForestModel {
  ForestParams params;
  std::vector<Tree> trees;
};

/// Variance-reduction regression trees on bootstrap resamples. Each tree draws
/// from its own derived seed, so results do not depend on the execution mode.
ForestModel forest_fit(const Matrix& x, const Vec& y, const ForestParams& params,
                       std::uint64_t seed);

double tree_predict(const Tree& t, const double* row);
Vec forest_predict(const ForestModel& m, const Matrix& x);

}  // namespace yatt
