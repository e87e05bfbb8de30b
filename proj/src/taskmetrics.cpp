#include "vssc/taskmetrics.hpp"

#include <algorithm>

namespace vssc {
namespace {

void check_list_width(const NeighborList& list, int k, std::size_t q) {
  if (static_cast<int>(list.size()) > k)
    throw ValidationError("query " + std::to_string(q) + " retrieved " +
                          std::to_string(list.size()) +
                          " items, more than K=" + std::to_string(k));
}

std::int64_t label_of(const LabelMap& labels, std::int32_t index) {
  if (index < 0 || static_cast<std::size_t>(index) >= labels.size())
    throw ValidationError("retrieved index " + std::to_string(index) +
                          " has no label (label map covers " +
                          std::to_string(labels.size()) + " rows)");
  return labels.labels[static_cast<std::size_t>(index)];
}

void check_query_labels(const std::vector<NeighborList>& retrieved,
                        const std::vector<std::int64_t>& query_labels) {
  if (retrieved.size() != query_labels.size())
    throw ValidationError("query label count " +
                          std::to_string(query_labels.size()) +
                          " does not match query count " +
                          std::to_string(retrieved.size()));
}

}  // namespace

double synthetic_recall(const std::vector<NeighborList>& retrieved,
                        const GroundTruth& truth, int k) {
  if (static_cast<Eigen::Index>(retrieved.size()) != truth.query_count())
    throw ValidationError("retrieved query count " +
                          std::to_string(retrieved.size()) +
                          " does not match ground truth count " +
                          std::to_string(truth.query_count()));
  if (truth.k != k)
    throw ValidationError("ground truth width " + std::to_string(truth.k) +
                          " does not match K=" + std::to_string(k));
  if (k < 1) throw ValidationError("K must be >= 1");

  std::int64_t matches = 0;
  std::vector<std::int32_t> truth_row(static_cast<std::size_t>(k));
  for (std::size_t q = 0; q < retrieved.size(); ++q) {
    check_list_width(retrieved[q], k, q);
    for (int j = 0; j < k; ++j)
      truth_row[static_cast<std::size_t>(j)] =
          truth.indices(static_cast<Eigen::Index>(q), j);
    std::sort(truth_row.begin(), truth_row.end());
    for (const Neighbor& nb : retrieved[q])
      if (std::binary_search(truth_row.begin(), truth_row.end(), nb.index))
        ++matches;
  }
  return static_cast<double>(matches) /
         (static_cast<double>(retrieved.size()) * static_cast<double>(k));
}

double label_recall(const std::vector<NeighborList>& retrieved,
                    const LabelMap& labels,
                    const std::vector<std::int64_t>& query_labels, int k) {
  check_query_labels(retrieved, query_labels);
  if (k < 1) throw ValidationError("K must be >= 1");

  std::int64_t matches = 0;
  for (std::size_t q = 0; q < retrieved.size(); ++q) {
    check_list_width(retrieved[q], k, q);
    for (const Neighbor& nb : retrieved[q])
      if (label_of(labels, nb.index) == query_labels[q]) ++matches;
  }
  return static_cast<double>(matches) /
         (static_cast<double>(retrieved.size()) * static_cast<double>(k));
}

double hit_at_k(const std::vector<NeighborList>& retrieved,
                const LabelMap& labels,
                const std::vector<std::int64_t>& query_labels, int k) {
  check_query_labels(retrieved, query_labels);
  if (k < 1) throw ValidationError("K must be >= 1");

  std::int64_t hits = 0;
  for (std::size_t q = 0; q < retrieved.size(); ++q) {
    check_list_width(retrieved[q], k, q);
    for (const Neighbor& nb : retrieved[q]) {
      if (label_of(labels, nb.index) == query_labels[q]) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(retrieved.size());
}

MatchingScore matching_score(
    const std::vector<NeighborList>& retrieved, const LabelMap& labels,
    const std::vector<std::unordered_set<std::int64_t>>& hit_sets,
    const PopularityMap& popularity, int k) {
  if (retrieved.size() != hit_sets.size())
    throw ValidationError("hit-set count " + std::to_string(hit_sets.size()) +
                          " does not match query count " +
                          std::to_string(retrieved.size()));
  if (k < 1) throw ValidationError("K must be >= 1");

  double total = 0.0;
  for (std::size_t q = 0; q < retrieved.size(); ++q) {
    check_list_width(retrieved[q], k, q);
    for (const Neighbor& nb : retrieved[q]) {
      const std::int64_t label = label_of(labels, nb.index);
      if (!hit_sets[q].count(label)) continue;
      const auto it = popularity.weight.find(label);
      if (it == popularity.weight.end())
        throw ValidationError("label " + std::to_string(label) +
                              " is in a hit set but has no popularity entry");
      total += it->second;
    }
  }
  MatchingScore score;
  score.total = total;
  score.per_query_mean =
      retrieved.empty() ? 0.0 : total / static_cast<double>(retrieved.size());
  return score;
}

}  // namespace vssc
