#pragma once

#include <vector>

#include "vssc/types.hpp"

namespace vssc {

// Evaluation formulas over per-query retrieval results.
//
// Retrieved lists may be shorter than K (indexes are allowed to return short
// lists at tiny search parameters); missing slots count as misses. Lists
// longer than K are an error, as is a ground-truth side whose width differs
// from K.

// Mean over queries of |retrieved ∩ truth| / K, intersecting dataset indices.
double synthetic_recall(const std::vector<NeighborList>& retrieved,
                        const GroundTruth& truth, int k);

// (1 / (|Q| * K)) * sum over queries and retrieved items of
// 1[label(item) == label(query)].
double label_recall(const std::vector<NeighborList>& retrieved,
                    const LabelMap& labels,
                    const std::vector<std::int64_t>& query_labels, int k);

// Fraction of queries whose label appears among its retrieved items' labels.
double hit_at_k(const std::vector<NeighborList>& retrieved,
                const LabelMap& labels,
                const std::vector<std::int64_t>& query_labels, int k);

struct MatchingScore {
  double total = 0.0;           // raw unnormalized sum over all queries
  double per_query_mean = 0.0;  // total / |Q|, for plotting
};

// Sum over queries and retrieved items of P(label(item)) when label(item) is
// in the query's hit set. Duplicate labels among retrieved items each count.
// Every label appearing in a hit set must have a popularity entry.
MatchingScore matching_score(
    const std::vector<NeighborList>& retrieved, const LabelMap& labels,
    const std::vector<std::unordered_set<std::int64_t>>& hit_sets,
    const PopularityMap& popularity, int k);

}  // namespace vssc
