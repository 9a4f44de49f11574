#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "yatt/matrix.hpp"

namespace yatt {

/// Pairwise genotype relatedness. Symmetric, unit diagonal, entries in [-1, 1];
/// how the correlations were produced upstream is not this library's concern.
struct CorrelationMatrix {
  std::vector<std::string> ids;
  Matrix values;  // n x n
};

void validate_correlation(const CorrelationMatrix& m);
CorrelationMatrix load_correlation_csv(const std::filesystem::path& path);
void write_correlation_csv(const std::filesystem::path& path,
                           const CorrelationMatrix& m);

struct KmeansResult {
  std::vector<int> assignment;       // per point, nearest centroid (ties: lowest index)
  Matrix centroids;                  // k x dim
  double inertia = 0.0;              // sum of squared distances to assigned centroids
  std::vector<double> inertia_trace; // after each assignment pass
  std::size_t iterations = 0;
};

/// Lloyd iterations from k-means++ seeding until the largest centroid shift
/// drops below tol, membership stops changing, or max_iters. A final
/// reassignment pass runs after convergence, so the returned assignment is a
/// fixed point of the returned centroids. Empty clusters are reseeded at the
/// point farthest from its assigned centroid.
KmeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iters = 300, double tol = 1e-6);

struct ClusterAssignment {
  std::vector<std::string> ids;  // canonical (sorted) genotype order
  std::unordered_map<std::string, int> cluster_of;
  Matrix centroids;
  double inertia = 0.0;
  std::size_t k = 0;

  int cluster_for(const std::string& genotype_id) const;
};

/// Clusters correlation-matrix rows. Genotypes are put in canonical sorted
/// order first, so any permutation of the input yields the same partition.
ClusterAssignment cluster_genotypes(const CorrelationMatrix& m, std::size_t k,
                                    std::uint64_t seed);

ClusterAssignment load_assignment_csv(const std::filesystem::path& path);
void write_assignment_csv(const std::filesystem::path& path,
                          const ClusterAssignment& a);

}  // namespace yatt
