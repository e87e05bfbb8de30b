#include "vssc/refindex.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "vssc/clustering.hpp"

namespace vssc {
namespace {

void check_index_metric(Metric metric) {
  if (metric == Metric::Cosine)
    throw ValidationError(
        "reference indexes support l2 and ip; pre-normalize and use ip for "
        "cosine workloads");
}

struct WorstOnTop {
  Metric metric;
  bool operator()(const Neighbor& a, const Neighbor& b) const {
    return ranks_before(metric, a, b);
  }
};

struct BestOnTop {
  Metric metric;
  bool operator()(const Neighbor& a, const Neighbor& b) const {
    return ranks_before(metric, b, a);
  }
};

using MinPool = std::priority_queue<Neighbor, std::vector<Neighbor>, WorstOnTop>;

NeighborList drain_ranked(MinPool& pool) {
  NeighborList out(pool.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = pool.top();
    pool.pop();
  }
  return out;
}

// Shared beam search over an adjacency list. During build the adjacency only
// references already-inserted nodes, so the same routine serves both phases.
NeighborList nsw_beam(const VectorDataset& dataset,
                      const std::vector<std::vector<std::int32_t>>& adjacency,
                      Metric metric,
                      const Eigen::Ref<const Eigen::RowVectorXf>& query,
                      int ef, std::int32_t entry) {
  std::vector<char> visited(adjacency.size(), 0);
  std::priority_queue<Neighbor, std::vector<Neighbor>, BestOnTop> frontier{
      BestOnTop{metric}};
  MinPool pool{WorstOnTop{metric}};

  const Neighbor first{entry, score(metric, query, dataset.row(entry))};
  visited[static_cast<std::size_t>(entry)] = 1;
  frontier.push(first);
  pool.push(first);

  while (!frontier.empty()) {
    const Neighbor cand = frontier.top();
    frontier.pop();
    if (static_cast<int>(pool.size()) >= ef &&
        !ranks_before(metric, cand, pool.top()))
      break;
    for (const std::int32_t nb : adjacency[static_cast<std::size_t>(cand.index)]) {
      if (visited[static_cast<std::size_t>(nb)]) continue;
      visited[static_cast<std::size_t>(nb)] = 1;
      const Neighbor next{nb, score(metric, query, dataset.row(nb))};
      if (static_cast<int>(pool.size()) < ef) {
        pool.push(next);
        frontier.push(next);
      } else if (ranks_before(metric, next, pool.top())) {
        pool.pop();
        pool.push(next);
        frontier.push(next);
      }
    }
  }
  return drain_ranked(pool);
}

}  // namespace

int default_nlist(Eigen::Index n) {
  const long raw = std::lround(4.0 * std::sqrt(static_cast<double>(n)));
  return static_cast<int>(std::clamp<long>(raw, 2, n));
}

IvfIndex build_ivf(const VectorDataset& dataset, Metric metric, int nlist,
                   std::uint64_t seed) {
  check_index_metric(metric);
  if (nlist < 2 || nlist > dataset.n())
    throw ValidationError("nlist=" + std::to_string(nlist) +
                          " out of range [2, n=" + std::to_string(dataset.n()) +
                          "]");

  KmeansOptions options;
  options.seed = seed;
  const Clustering clustering =
      kmeans(dataset, nlist, KmeansVariant::Euclidean, options);

  IvfIndex index;
  index.metric = metric;
  index.seed = seed;
  index.n = dataset.n();
  index.centroids = clustering.centroids;
  index.cells.resize(static_cast<std::size_t>(nlist));
  for (Eigen::Index i = 0; i < dataset.n(); ++i)
    index.cells[static_cast<std::size_t>(
                    clustering.assignment[static_cast<std::size_t>(i)])]
        .push_back(static_cast<std::int32_t>(i));
  return index;
}

NeighborList search_ivf(const VectorDataset& dataset, const IvfIndex& index,
                        const Eigen::Ref<const Eigen::RowVectorXf>& query,
                        int k, int nprobe) {
  if (dataset.n() != index.n)
    throw ValidationError("index was built on a dataset of " +
                          std::to_string(index.n) + " rows, got " +
                          std::to_string(dataset.n()));
  if (query.size() != dataset.d())
    throw ValidationError("query dimension mismatch");
  if (nprobe < 1 || nprobe > index.nlist())
    throw ValidationError("nprobe=" + std::to_string(nprobe) +
                          " out of range [1, nlist=" +
                          std::to_string(index.nlist()) + "]");
  if (k < 1) throw ValidationError("K must be >= 1");

  // Cell ranking under the index metric; for Euclidean that is nearest
  // centroid first, for InnerProduct largest dot first.
  NeighborList cell_rank(static_cast<std::size_t>(index.nlist()));
  for (int c = 0; c < index.nlist(); ++c)
    cell_rank[static_cast<std::size_t>(c)] =
        Neighbor{c, score(index.metric, query, index.centroids.row(c))};
  std::sort(cell_rank.begin(), cell_rank.end(),
            [&](const Neighbor& a, const Neighbor& b) {
              return ranks_before(index.metric, a, b);
            });

  MinPool best{WorstOnTop{index.metric}};
  for (int p = 0; p < nprobe; ++p) {
    const auto& cell =
        index.cells[static_cast<std::size_t>(cell_rank[static_cast<std::size_t>(p)].index)];
    for (const std::int32_t row : cell) {
      const Neighbor cand{row, score(index.metric, query, dataset.row(row))};
      if (static_cast<int>(best.size()) < k) {
        best.push(cand);
      } else if (ranks_before(index.metric, cand, best.top())) {
        best.pop();
        best.push(cand);
      }
    }
  }
  return drain_ranked(best);
}

NswIndex build_nsw(const VectorDataset& dataset, Metric metric, int max_degree,
                   int ef_construction, std::uint64_t seed) {
  check_index_metric(metric);
  if (max_degree < 2)
    throw ValidationError("NSW max degree must be >= 2");
  if (ef_construction < max_degree)
    throw ValidationError("NSW ef_construction must be >= max degree");

  NswIndex index;
  index.metric = metric;
  index.max_degree = max_degree;
  index.ef_construction = ef_construction;
  index.seed = seed;
  index.entry = 0;
  index.adjacency.assign(static_cast<std::size_t>(dataset.n()), {});

  auto prune = [&](std::int32_t node) {
    auto& edges = index.adjacency[static_cast<std::size_t>(node)];
    if (static_cast<int>(edges.size()) <= max_degree) return;
    NeighborList scored(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e)
      scored[e] = Neighbor{edges[e],
                           score(metric, dataset.row(node), dataset.row(edges[e]))};
    std::sort(scored.begin(), scored.end(),
              [&](const Neighbor& a, const Neighbor& b) {
                return ranks_before(metric, a, b);
              });
    edges.clear();
    for (int e = 0; e < max_degree; ++e) edges.push_back(scored[static_cast<std::size_t>(e)].index);
  };

  for (Eigen::Index i = 1; i < dataset.n(); ++i) {
    const NeighborList candidates = nsw_beam(
        dataset, index.adjacency, metric, dataset.row(i), ef_construction,
        index.entry);
    const int connect =
        std::min<int>(max_degree, static_cast<int>(candidates.size()));
    auto& own = index.adjacency[static_cast<std::size_t>(i)];
    for (int c = 0; c < connect; ++c) {
      const std::int32_t nb = candidates[static_cast<std::size_t>(c)].index;
      own.push_back(nb);
      index.adjacency[static_cast<std::size_t>(nb)].push_back(
          static_cast<std::int32_t>(i));
      prune(nb);
    }
  }
  return index;
}

NeighborList search_nsw(const VectorDataset& dataset, const NswIndex& index,
                        const Eigen::Ref<const Eigen::RowVectorXf>& query,
                        int k, int ef) {
  if (dataset.n() != index.node_count())
    throw ValidationError("index was built on a dataset of " +
                          std::to_string(index.node_count()) + " rows, got " +
                          std::to_string(dataset.n()));
  if (query.size() != dataset.d())
    throw ValidationError("query dimension mismatch");
  if (k < 1) throw ValidationError("K must be >= 1");
  if (ef < k)
    throw ValidationError("ef=" + std::to_string(ef) +
                          " must be >= K=" + std::to_string(k));

  NeighborList pool =
      nsw_beam(dataset, index.adjacency, index.metric, query, ef, index.entry);
  if (static_cast<int>(pool.size()) > k)
    pool.resize(static_cast<std::size_t>(k));
  return pool;
}

Eigen::Index reachable_count(const NswIndex& index) {
  if (index.adjacency.empty()) return 0;
  std::vector<char> seen(index.adjacency.size(), 0);
  std::vector<std::int32_t> stack{index.entry};
  seen[static_cast<std::size_t>(index.entry)] = 1;
  Eigen::Index count = 0;
  while (!stack.empty()) {
    const std::int32_t node = stack.back();
    stack.pop_back();
    ++count;
    for (const std::int32_t nb : index.adjacency[static_cast<std::size_t>(node)]) {
      if (seen[static_cast<std::size_t>(nb)]) continue;
      seen[static_cast<std::size_t>(nb)] = 1;
      stack.push_back(nb);
    }
  }
  return count;
}

}  // namespace vssc
