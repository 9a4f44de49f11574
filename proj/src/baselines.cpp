#include "yatt/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>

#include "yatt/common.hpp"
#include "yatt/exec.hpp"
#include "yatt/rng.hpp"

namespace yatt {

FlatDataset flatten_features(const std::vector<PreparedRecord>& records,
                             const Scaler& scaler) {
  if (records.empty()) throw DataError("cannot flatten an empty record set");
  const std::size_t t_steps = records.front().sequence.size();
  const std::size_t seq_dim = t_steps > 0 ? records.front().sequence.front().size() : 0;
  const std::size_t statics = records.front().statics_after.size();
  const std::size_t cols = t_steps * seq_dim + statics;
  if (cols == 0) throw DataError("records carry no features to flatten");

  FlatDataset out;
  out.x = Matrix(records.size(), cols);
  out.y.resize(records.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    const PreparedRecord& rec = records[r];
    if (rec.sequence.size() != t_steps || rec.statics_after.size() != statics)
      throw ShapeError("inconsistent record shapes in flatten_features");
    double* row = out.x.row(r);
    std::size_t c = 0;
    for (const Vec& step : rec.sequence) {
      if (step.size() != seq_dim)
        throw ShapeError("inconsistent sequence width in flatten_features");
      for (double v : step) row[c++] = v;
    }
    for (double v : rec.statics_after) row[c++] = v;
    out.y[r] = rec.target_scaled;
  }

  // Sequence columns reuse the scaler's leading names; statics take the
  // trailing ones (MG/Cluster).
  for (std::size_t t = 0; t < t_steps; ++t)
    for (std::size_t c = 0; c < seq_dim; ++c) {
      std::string base = c < scaler.feature_names.size()
                             ? scaler.feature_names[c]
                             : "f" + std::to_string(c);
      out.feature_names.push_back(base + "_t" + std::to_string(t + 1));
    }
  for (std::size_t j = 0; j < statics; ++j) {
    std::size_t idx = scaler.feature_names.size() - statics + j;
    out.feature_names.push_back(idx < scaler.feature_names.size()
                                    ? scaler.feature_names[idx]
                                    : "s" + std::to_string(j));
  }
  return out;
}

// ---------------------------------------------------------------------------
// LASSO
// ---------------------------------------------------------------------------

namespace {

double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

}  // namespace

double lasso_objective(const Matrix& x, const Vec& y, const LassoModel& m) {
  if (x.rows != y.size() || x.cols != m.beta.size())
    throw ShapeError("lasso_objective: dimension mismatch");
  const std::size_t n = x.rows;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = m.intercept;
    const double* row = x.row(i);
    for (std::size_t j = 0; j < x.cols; ++j) pred += row[j] * m.beta[j];
    double e = y[i] - pred;
    sse += e * e;
  }
  double l1 = 0.0;
  for (double b : m.beta) l1 += std::fabs(b);
  return sse / (2.0 * static_cast<double>(n)) + m.lambda * l1;
}

LassoModel lasso_fit(const Matrix& x, const Vec& y, double lambda, double tol,
                     std::size_t max_sweeps) {
  if (x.rows == 0 || x.cols == 0)
    throw DataError("lasso_fit needs a non-empty design matrix");
  if (x.rows != y.size()) throw ShapeError("lasso_fit: rows != targets");
  if (lambda < 0.0 || !std::isfinite(lambda))
    throw ConfigError("lasso_fit: lambda must be finite and >= 0");

  const std::size_t n = x.rows;
  const std::size_t p = x.cols;
  const double inv_n = 1.0 / static_cast<double>(n);

  // Second moments and variance flags; zero-variance columns stay at zero.
  Vec col_sq(p, 0.0);
  std::vector<bool> active(p, true);
  for (std::size_t j = 0; j < p; ++j) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double v = x(i, j);
      sum += v;
      sq += v * v;
    }
    col_sq[j] = sq * inv_n;
    double mean = sum * inv_n;
    if (sq * inv_n - mean * mean <= 1e-300) active[j] = false;
  }

  LassoModel m;
  m.lambda = lambda;
  m.beta.assign(p, 0.0);
  m.intercept = std::accumulate(y.begin(), y.end(), 0.0) * inv_n;

  Vec resid(n);
  for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - m.intercept;

  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      if (!active[j]) continue;
      double rho = 0.0;
      for (std::size_t i = 0; i < n; ++i) rho += x(i, j) * resid[i];
      rho = rho * inv_n + col_sq[j] * m.beta[j];
      double updated = soft_threshold(rho, lambda) / col_sq[j];
      double delta = updated - m.beta[j];
      if (delta != 0.0) {
        for (std::size_t i = 0; i < n; ++i) resid[i] -= x(i, j) * delta;
        m.beta[j] = updated;
        max_delta = std::max(max_delta, std::fabs(delta));
      }
    }
    double shift = std::accumulate(resid.begin(), resid.end(), 0.0) * inv_n;
    if (shift != 0.0) {
      m.intercept += shift;
      for (std::size_t i = 0; i < n; ++i) resid[i] -= shift;
      max_delta = std::max(max_delta, std::fabs(shift));
    }
    m.sweeps = sweep + 1;
    double obj = lasso_objective(x, y, m);
    if (!std::isfinite(obj)) throw NumericError("lasso_fit: objective diverged");
    m.objective_trace.push_back(obj);
    if (max_delta <= tol) break;
  }
  return m;
}

Vec lasso_predict(const LassoModel& m, const Matrix& x) {
  if (x.cols != m.beta.size())
    throw ShapeError("lasso_predict: feature count mismatch");
  Vec out(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    double pred = m.intercept;
    const double* row = x.row(i);
    for (std::size_t j = 0; j < x.cols; ++j) pred += row[j] * m.beta[j];
    out[i] = pred;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random forest
// ---------------------------------------------------------------------------

namespace {

struct TreeBuilder {
  const Matrix& x;
  const Vec& y;
  const ForestParams& params;
  Rng& rng;
  Tree& tree;
  std::vector<std::pair<double, double>> scratch;  // (feature value, target)

  int build(std::vector<std::size_t>& samples, std::size_t depth) {
    const std::size_t m = samples.size();
    double sum = 0.0, sq = 0.0;
    for (std::size_t i : samples) {
      sum += y[i];
      sq += y[i] * y[i];
    }
    const double mean = sum / static_cast<double>(m);
    const double var = sq / static_cast<double>(m) - mean * mean;

    TreeNode node;
    node.value = mean;
    if (depth >= params.max_depth || m < 2 * params.min_samples_leaf ||
        var <= 1e-300)
      return emit(node);

    // Per-node feature subset, evaluated in ascending index order so ties
    // break toward the lowest feature.
    const std::size_t p = x.cols;
    std::size_t take = static_cast<std::size_t>(
        std::ceil(params.feature_fraction * static_cast<double>(p)));
    take = std::clamp<std::size_t>(take, 1, p);
    std::vector<std::size_t> feats(p);
    std::iota(feats.begin(), feats.end(), 0);
    for (std::size_t i = 0; i < take; ++i) {
      std::size_t j = i + rng.uniform_index(p - i);
      std::swap(feats[i], feats[j]);
    }
    feats.resize(take);
    std::sort(feats.begin(), feats.end());

    double best_score = -1.0;
    int best_feat = -1;
    double best_thr = 0.0;
    for (std::size_t f : feats) {
      scratch.clear();
      for (std::size_t i : samples) scratch.emplace_back(x(i, f), y[i]);
      std::sort(scratch.begin(), scratch.end());
      double left_sum = 0.0;
      for (std::size_t cut = 1; cut < m; ++cut) {
        left_sum += scratch[cut - 1].second;
        if (scratch[cut].first <= scratch[cut - 1].first) continue;
        if (cut < params.min_samples_leaf || m - cut < params.min_samples_leaf)
          continue;
        double right_sum = sum - left_sum;
        double score = left_sum * left_sum / static_cast<double>(cut) +
                       right_sum * right_sum / static_cast<double>(m - cut);
        if (score > best_score) {
          best_score = score;
          best_feat = static_cast<int>(f);
          best_thr = 0.5 * (scratch[cut - 1].first + scratch[cut].first);
        }
      }
    }
    if (best_feat < 0) return emit(node);

    std::vector<std::size_t> left, right;
    for (std::size_t i : samples)
      (x(i, static_cast<std::size_t>(best_feat)) <= best_thr ? left : right)
          .push_back(i);
    samples.clear();
    samples.shrink_to_fit();

    node.feature = best_feat;
    node.threshold = best_thr;
    int id = emit(node);
    int l = build(left, depth + 1);
    int r = build(right, depth + 1);
    tree.nodes[static_cast<std::size_t>(id)].left = l;
    tree.nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  int emit(const TreeNode& node) {
    tree.nodes.push_back(node);
    return static_cast<int>(tree.nodes.size() - 1);
  }
};

}  // namespace

ForestModel forest_fit(const Matrix& x, const Vec& y, const ForestParams& params,
                       std::uint64_t seed) {
  if (x.rows == 0 || x.cols == 0)
    throw DataError("forest_fit needs a non-empty design matrix");
  if (x.rows != y.size()) throw ShapeError("forest_fit: rows != targets");
  if (params.n_trees == 0) throw ConfigError("forest_fit: n_trees must be >= 1");
  if (params.min_samples_leaf == 0)
    throw ConfigError("forest_fit: min_samples_leaf must be >= 1");
  if (!(params.feature_fraction > 0.0) || params.feature_fraction > 1.0)
    throw ConfigError("forest_fit: feature_fraction must be in (0, 1]");

  ForestModel model;
  model.params = params;
  model.trees.resize(params.n_trees);
  const std::size_t n = x.rows;
  exec::parallel_for(params.n_trees, [&](std::size_t t) {
    Rng rng(derive_seed(seed, "tree", t));
    std::vector<std::size_t> samples(n);
    if (params.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) samples[i] = rng.uniform_index(n);
    } else {
      std::iota(samples.begin(), samples.end(), 0);
    }
    TreeBuilder builder{x, y, params, rng, model.trees[t], {}};
    builder.build(samples, 0);
  });
  return model;
}

double tree_predict(const Tree& t, const double* row) {
  if (t.nodes.empty()) throw DataError("tree_predict on an empty tree");
  int id = 0;
  for (;;) {
    const TreeNode& node = t.nodes[static_cast<std::size_t>(id)];
    if (node.feature < 0) return node.value;
    id = row[node.feature] <= node.threshold ? node.left : node.right;
  }
}

Vec forest_predict(const ForestModel& m, const Matrix& x) {
  if (m.trees.empty()) throw DataError("forest_predict on an empty model");
  Vec out(x.rows, 0.0);
  for (std::size_t i = 0; i < x.rows; ++i) {
    double sum = 0.0;
    for (const Tree& t : m.trees) sum += tree_predict(t, x.row(i));
    out[i] = sum / static_cast<double>(m.trees.size());
  }
  return out;
}

}  // namespace yatt
