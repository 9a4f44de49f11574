#include "yatt/genotype.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "yatt/common.hpp"
#include "yatt/exec.hpp"
#include "yatt/rng.hpp"

namespace yatt {

void validate_correlation(const CorrelationMatrix& m) {
  const std::size_t n = m.ids.size();
  if (n == 0) throw DataError("correlation matrix is empty");
  if (m.values.rows != n || m.values.cols != n) {
    throw DataError("correlation matrix shape " + m.values.shape_str() +
                    " does not match " + std::to_string(n) + " genotype ids");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = m.values(i, j);
      if (!std::isfinite(v)) {
        throw DataError("non-finite correlation at (" + m.ids[i] + ", " +
                        m.ids[j] + ")");
      }
      if (v < -1.0 || v > 1.0) {
        throw DataError("correlation " + fmt_double(v) + " at (" + m.ids[i] +
                        ", " + m.ids[j] + ") outside [-1, 1]");
      }
      if (std::abs(v - m.values(j, i)) > 1e-9) {
        throw DataError("correlation matrix is not symmetric at (" + m.ids[i] +
                        ", " + m.ids[j] + ")");
      }
    }
    if (std::abs(m.values(i, i) - 1.0) > 1e-9) {
      throw DataError("correlation diagonal for " + m.ids[i] + " is " +
                      fmt_double(m.values(i, i)) + ", expected 1");
    }
  }
}

CorrelationMatrix load_correlation_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  CorrelationMatrix m;
  {
    std::stringstream header(line);
    std::string cell;
    bool first = true;
    while (std::getline(header, cell, ',')) {
      if (first) {
        first = false;  // top-left corner cell, content ignored
        continue;
      }
      if (cell.empty()) throw DataError(path.string() + ": empty genotype id in header");
      m.ids.push_back(cell);
    }
  }
  const std::size_t n = m.ids.size();
  if (n == 0) throw DataError(path.string() + ": header lists no genotypes");

  m.values = Matrix(n, n);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (row >= n) throw DataError(path.string() + ": more rows than header genotypes");
    std::stringstream ss(line);
    std::string cell;
    if (!std::getline(ss, cell, ',')) throw DataError(path.string() + ": bad row");
    if (cell != m.ids[row]) {
      throw DataError(path.string() + ": row label '" + cell +
                      "' does not match header order ('" + m.ids[row] + "')");
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::getline(ss, cell, ',')) {
        throw DataError(path.string() + ": row " + m.ids[row] + " has " +
                        std::to_string(j) + " values, expected " + std::to_string(n));
      }
      try {
        std::size_t used = 0;
        m.values(row, j) = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw DataError(path.string() + ": malformed value '" + cell +
                        "' in row " + m.ids[row]);
      }
    }
    ++row;
  }
  if (row != n) {
    throw DataError(path.string() + ": " + std::to_string(row) +
                    " rows, expected " + std::to_string(n));
  }
  validate_correlation(m);
  return m;
}

void write_correlation_csv(const std::filesystem::path& path,
                           const CorrelationMatrix& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "genotype_id";
  for (const auto& id : m.ids) out << ',' << id;
  out << '\n';
  for (std::size_t i = 0; i < m.ids.size(); ++i) {
    out << m.ids[i];
    for (std::size_t j = 0; j < m.ids.size(); ++j) {
      out << ',' << fmt_double(m.values(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

namespace {

double sq_dist(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Nearest centroid; ties go to the lowest index via strict comparison.
void assign_points(const Matrix& points, const Matrix& centroids,
                   std::vector<int>& assign, std::vector<double>& dist2) {
  const std::size_t dim = points.cols;
  exec::parallel_for(points.rows, [&](std::size_t i) {
    const double* p = points.row(i);
    int best = 0;
    double best_d = sq_dist(p, centroids.row(0), dim);
    for (std::size_t c = 1; c < centroids.rows; ++c) {
      const double d = sq_dist(p, centroids.row(c), dim);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    assign[i] = best;
    dist2[i] = best_d;
  });
}

}  // namespace

KmeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iters, double tol) {
  const std::size_t n = points.rows;
  const std::size_t dim = points.cols;
  if (k == 0) throw ConfigError("k-means needs k >= 1");
  if (n == 0) throw DataError("k-means needs at least one point");
  if (k > n) {
    throw DataError("k-means: k=" + std::to_string(k) + " exceeds " +
                    std::to_string(n) + " points");
  }
  for (std::size_t i = 0; i < points.data.size(); ++i) {
    if (!std::isfinite(points.data[i])) {
      throw DataError("k-means input has a non-finite coordinate");
    }
  }

  Rng rng(seed);
  Matrix centroids(k, dim);

  // k-means++ seeding: first centroid uniform, then proportional to squared
  // distance from the nearest chosen centroid.
  {
    const std::size_t first = rng.uniform_index(n);
    std::copy_n(points.row(first), dim, centroids.row(0));
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = sq_dist(points.row(i), centroids.row(0), dim);
    }
    for (std::size_t c = 1; c < k; ++c) {
      double total = std::accumulate(d2.begin(), d2.end(), 0.0);
      std::size_t pick;
      if (total > 0.0) {
        double u = rng.uniform() * total;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          u -= d2[i];
          if (u <= 0.0) {
            pick = i;
            break;
          }
        }
      } else {
        pick = rng.uniform_index(n);  // all residual distances zero
      }
      std::copy_n(points.row(pick), dim, centroids.row(c));
      for (std::size_t i = 0; i < n; ++i) {
        d2[i] = std::min(d2[i], sq_dist(points.row(i), centroids.row(c), dim));
      }
    }
  }

  KmeansResult res;
  res.assignment.assign(n, 0);
  res.centroids = centroids;
  std::vector<double> dist2(n, 0.0);
  std::vector<int> prev_assign;

  assign_points(points, res.centroids, res.assignment, dist2);
  res.inertia = std::accumulate(dist2.begin(), dist2.end(), 0.0);
  res.inertia_trace.push_back(res.inertia);

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    res.iterations = iter + 1;

    // Means of each cluster's members.
    Matrix next(k, dim);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = static_cast<std::size_t>(res.assignment[i]);
      ++counts[c];
      const double* p = points.row(i);
      double* t = next.row(c);
      for (std::size_t j = 0; j < dim; ++j) t[j] += p[j];
    }
    std::vector<double> repair_d2 = dist2;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        double* t = next.row(c);
        for (std::size_t j = 0; j < dim; ++j) t[j] /= static_cast<double>(counts[c]);
      } else {
        // Reseed an empty cluster at the point farthest from its centroid
        // (ties: lowest index); zero it out so a second empty cluster picks a
        // different point.
        std::size_t far = 0;
        for (std::size_t i = 1; i < n; ++i) {
          if (repair_d2[i] > repair_d2[far]) far = i;
        }
        std::copy_n(points.row(far), dim, next.row(c));
        repair_d2[far] = 0.0;
      }
    }

    double max_shift2 = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      max_shift2 = std::max(max_shift2, sq_dist(next.row(c), res.centroids.row(c), dim));
    }
    res.centroids = std::move(next);

    prev_assign = res.assignment;
    assign_points(points, res.centroids, res.assignment, dist2);
    res.inertia = std::accumulate(dist2.begin(), dist2.end(), 0.0);
    res.inertia_trace.push_back(res.inertia);

    if (res.assignment == prev_assign) break;  // exact fixed point
    if (std::sqrt(max_shift2) < tol) break;
  }
  return res;
}

int ClusterAssignment::cluster_for(const std::string& genotype_id) const {
  auto it = cluster_of.find(genotype_id);
  if (it == cluster_of.end()) {
    throw DataError("genotype '" + genotype_id + "' has no cluster assignment");
  }
  return it->second;
}

ClusterAssignment cluster_genotypes(const CorrelationMatrix& m, std::size_t k,
                                    std::uint64_t seed) {
  validate_correlation(m);
  const std::size_t n = m.ids.size();

  // Canonical order: sort ids, permute rows AND columns to match, so the
  // caller's row order never affects the partition.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return m.ids[a] < m.ids[b];
  });
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (m.ids[order[i]] == m.ids[order[i + 1]]) {
      throw DataError("duplicate genotype id '" + m.ids[order[i]] + "'");
    }
  }

  Matrix points(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      points(i, j) = m.values(order[i], order[j]);
    }
  }

  KmeansResult km = kmeans(points, k, seed);

  ClusterAssignment out;
  out.k = k;
  out.inertia = km.inertia;
  out.centroids = std::move(km.centroids);
  out.ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.ids.push_back(m.ids[order[i]]);
    out.cluster_of[m.ids[order[i]]] = km.assignment[i];
  }
  return out;
}

ClusterAssignment load_assignment_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "genotype_id,cluster_id") {
    throw DataError(path.string() + ": expected header 'genotype_id,cluster_id'");
  }
  ClusterAssignment out;
  std::size_t lineno = 1;
  int max_cluster = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 2 fields");
    }
    const std::string id = line.substr(0, comma);
    const std::string cl = line.substr(comma + 1);
    int cluster;
    try {
      std::size_t used = 0;
      cluster = std::stoi(cl, &used);
      if (used != cl.size()) throw std::invalid_argument(cl);
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": malformed cluster id '" + cl + "'");
    }
    if (cluster < 0) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": negative cluster id");
    }
    if (!out.cluster_of.emplace(id, cluster).second) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": duplicate genotype '" + id + "'");
    }
    out.ids.push_back(id);
    max_cluster = std::max(max_cluster, cluster);
  }
  if (out.ids.empty()) throw DataError(path.string() + ": no assignments");
  std::sort(out.ids.begin(), out.ids.end());
  out.k = static_cast<std::size_t>(max_cluster + 1);
  out.inertia = std::numeric_limits<double>::quiet_NaN();  // not stored in the CSV
  return out;
}

void write_assignment_csv(const std::filesystem::path& path,
                          const ClusterAssignment& a) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "genotype_id,cluster_id\n";
  for (const auto& id : a.ids) {
    out << id << ',' << a.cluster_of.at(id) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace yatt
