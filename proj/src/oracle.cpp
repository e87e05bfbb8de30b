#include "vssc/oracle.hpp"

#include <algorithm>
#include <queue>

#include "vssc/parallel.hpp"

namespace vssc {
namespace {

// priority_queue ordered by ranks_before keeps the *worst* kept neighbor on
// top, which is exactly the eviction candidate.
struct WorstOnTop {
  Metric metric;
  bool operator()(const Neighbor& a, const Neighbor& b) const {
    return ranks_before(metric, a, b);
  }
};

}  // namespace

NeighborList exact_topk(const VectorDataset& dataset,
                        const Eigen::Ref<const Eigen::RowVectorXf>& query,
                        int k, Metric metric, std::int32_t exclude) {
  if (query.size() != dataset.d())
    throw ValidationError("query dimension " + std::to_string(query.size()) +
                          " does not match dataset dimension " +
                          std::to_string(dataset.d()));
  const Eigen::Index pool = dataset.n() - (exclude >= 0 ? 1 : 0);
  if (k < 1 || k > pool)
    throw ValidationError("K=" + std::to_string(k) +
                          " out of range for candidate pool of " +
                          std::to_string(pool));

  std::priority_queue<Neighbor, std::vector<Neighbor>, WorstOnTop> best{
      WorstOnTop{metric}};
  for (Eigen::Index i = 0; i < dataset.n(); ++i) {
    if (static_cast<std::int32_t>(i) == exclude) continue;
    const Neighbor cand{static_cast<std::int32_t>(i),
                        score(metric, query, dataset.row(i))};
    if (static_cast<int>(best.size()) < k) {
      best.push(cand);
    } else if (ranks_before(metric, cand, best.top())) {
      best.pop();
      best.push(cand);
    }
  }

  NeighborList out(best.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = best.top();
    best.pop();
  }
  return out;
}

GroundTruth batch_ground_truth(const VectorDataset& dataset,
                               const QuerySet& queries, int k, Metric metric,
                               bool self_exclude, int workers) {
  check_same_dim(dataset, queries);
  if (self_exclude && queries.n() > dataset.n())
    throw ValidationError(
        "self-exclusion requires queries to be positionally aligned with "
        "dataset rows");
  if (workers == 0) workers = worker_count();

  GroundTruth truth;
  truth.metric = metric;
  truth.k = k;
  truth.indices.resize(queries.n(), k);
  truth.scores.resize(queries.n(), k);

  parallel_for(0, queries.n(), workers, [&](std::int64_t q) {
    const std::int32_t exclude =
        self_exclude ? static_cast<std::int32_t>(q) : kNoExclusion;
    const NeighborList list =
        exact_topk(dataset, queries.row(q), k, metric, exclude);
    for (int j = 0; j < k; ++j) {
      truth.indices(q, j) = list[static_cast<std::size_t>(j)].index;
      truth.scores(q, j) = list[static_cast<std::size_t>(j)].score;
    }
  });
  return truth;
}

}  // namespace vssc
