#pragma once

#include <cstdint>

#include "vssc/types.hpp"

namespace vssc {

inline constexpr std::int32_t kNoExclusion = -1;

// Exhaustive top-K scan under the metric's ordering convention, ties broken
// by ascending index. `exclude`, when set to a row id, removes that row from
// the candidate pool (self-exclusion for in-dataset queries). Results are a
// pure function of the arguments.
// Requires 1 <= K <= n (n-1 when exclude is set) and matching dimensions.
NeighborList exact_topk(const VectorDataset& dataset,
                        const Eigen::Ref<const Eigen::RowVectorXf>& query,
                        int k, Metric metric,
                        std::int32_t exclude = kNoExclusion);

// exact_topk over a query batch, parallel over queries with fixed-order
// result assembly: output is independent of worker count. With self_exclude,
// query i excludes dataset row i (the query set is positionally aligned with
// the dataset). workers = 0 means worker_count().
GroundTruth batch_ground_truth(const VectorDataset& dataset,
                               const QuerySet& queries, int k, Metric metric,
                               bool self_exclude, int workers = 0);

}  // namespace vssc
