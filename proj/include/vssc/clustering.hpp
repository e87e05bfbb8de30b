#pragma once

#include <cstdint>
#include <vector>

#include "vssc/types.hpp"

namespace vssc {

enum class KmeansVariant { Euclidean, Spherical };

// Lloyd k-means result. Invariants on return: every row assigned to exactly
// one cluster, no empty cluster, assignment is the argmin (Euclidean) or
// argmax-cosine (Spherical) over the returned centroids, Spherical centroids
// have unit norm.
struct Clustering {
  KmeansVariant variant = KmeansVariant::Euclidean;
  int k = 0;
  RowMatrixXf centroids;
  std::vector<std::int32_t> assignment;
  int iterations = 0;
  // Objective after each assignment step: within-cluster sum of squared
  // Euclidean distances, or sum of cosine distances for Spherical. The
  // Euclidean sequence is non-increasing.
  std::vector<double> objective_history;
};

struct KmeansOptions {
  int max_iters = 50;
  double tol = 1e-4;  // max centroid displacement (Euclidean norm) to converge
  std::uint64_t seed = 0;
  int workers = 0;  // 0 = worker_count()
};

// k-means++ seeded Lloyd iterations. The Spherical variant clusters the
// unit-normalized rows: assignment by maximum cosine, centroid = normalized
// member mean, and zero-norm input rows are an error. Empty clusters (and
// spherical clusters whose member mean cancels to zero) are reseeded to the
// point farthest from its current centroid. Deterministic under fixed seed
// regardless of worker count.
// Requires 1 <= k <= n.
Clustering kmeans(const VectorDataset& dataset, int k, KmeansVariant variant,
                  const KmeansOptions& options = {});

}  // namespace vssc
