#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vssc/types.hpp"

namespace vssc {

// Desk-scale reference retrieval methods for both Euclidean and InnerProduct:
// IVF-flat (partition family) and a navigable-small-world graph (graph
// family). Exhaustive search is the oracle itself. Indexes are non-owning;
// searches take the dataset they were built on.

// Inverted-file index. Posting lists partition [0, n): every row sits in
// exactly the cell of its nearest centroid. Clustering is Euclidean k-means
// over the raw vectors regardless of the search metric; ranking cells by
// centroid inner product over Euclidean cells reproduces the norm-bias
// behavior of partition methods under InnerProduct, which the funnel report
// is designed to expose. That asymmetry is intentional.
struct IvfIndex {
  Metric metric = Metric::Euclidean;
  std::uint64_t seed = 0;
  Eigen::Index n = 0;  // rows of the dataset the index was built on
  RowMatrixXf centroids;
  std::vector<std::vector<std::int32_t>> cells;

  int nlist() const { return static_cast<int>(centroids.rows()); }
};

// Conventional default cell count, 4*sqrt(n), clamped to [2, n].
int default_nlist(Eigen::Index n);

// Requires 2 <= nlist <= n and metric in {Euclidean, InnerProduct}.
IvfIndex build_ivf(const VectorDataset& dataset, Metric metric, int nlist,
                   std::uint64_t seed);

// Ranks cells by centroid score under the index metric, exhaustively scores
// the union of the top-nprobe cells, and returns the top-K under the global
// tie-break. When the candidate union holds fewer than K rows the list is
// returned short; callers treat missing slots as misses.
NeighborList search_ivf(const VectorDataset& dataset, const IvfIndex& index,
                        const Eigen::Ref<const Eigen::RowVectorXf>& query,
                        int k, int nprobe);

// Navigable-small-world graph: nodes inserted in dataset order, node 0 is the
// permanent entry point, each insertion beam-searches the current graph
// (width ef_construction) and connects bidirectionally to its best <= M
// candidates; nodes exceeding degree M keep their M best neighbors by raw
// score. Fully deterministic; the seed is recorded for provenance only since
// no step draws randomness.
struct NswIndex {
  Metric metric = Metric::Euclidean;
  int max_degree = 0;        // M
  int ef_construction = 0;   // build beam width
  std::uint64_t seed = 0;
  std::int32_t entry = 0;
  std::vector<std::vector<std::int32_t>> adjacency;

  Eigen::Index node_count() const {
    return static_cast<Eigen::Index>(adjacency.size());
  }
};

inline constexpr int kDefaultNswMaxDegree = 32;
inline constexpr int kDefaultNswEfConstruction = 256;

// Requires M >= 2, efc >= M, metric in {Euclidean, InnerProduct}.
NswIndex build_nsw(const VectorDataset& dataset, Metric metric, int max_degree,
                   int ef_construction, std::uint64_t seed);

// Best-first beam search from the entry point with a result pool of size ef;
// stops when the best frontier candidate ranks worse than the worst pooled
// result. Returns the pool's top-K (short when fewer than K nodes are
// reachable). Requires ef >= K.
NeighborList search_nsw(const VectorDataset& dataset, const NswIndex& index,
                        const Eigen::Ref<const Eigen::RowVectorXf>& query,
                        int k, int ef);

// Nodes reachable from the entry point along out-edges; search can only ever
// return these.
Eigen::Index reachable_count(const NswIndex& index);

// Versioned binary container (magic "VSSCIDX1", then a format-tagged section
// per index kind). Round-trips are exact.
void save_index(const std::string& path, const IvfIndex& index);
void save_index(const std::string& path, const NswIndex& index);
IvfIndex load_ivf_index(const std::string& path);
NswIndex load_nsw_index(const std::string& path);

}  // namespace vssc
