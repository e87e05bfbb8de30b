#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace vssc {

// Error taxonomy. ValidationError covers contract violations in arguments or
// file contents; IoError covers filesystem-level failures (missing files,
// short writes). The CLI maps them to exit codes 2 and 3.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using RowMatrixXf =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixXi =
    Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Metric { Euclidean, InnerProduct, Cosine };

inline const char* metric_name(Metric m) {
  switch (m) {
    case Metric::Euclidean: return "l2";
    case Metric::InnerProduct: return "ip";
    case Metric::Cosine: return "cosine";
  }
  throw ValidationError("unknown metric enum value");
}

inline Metric metric_from_name(std::string_view name) {
  if (name == "l2") return Metric::Euclidean;
  if (name == "ip") return Metric::InnerProduct;
  if (name == "cosine") return Metric::Cosine;
  throw ValidationError("unknown metric name: " + std::string(name) +
                        " (expected l2, ip, or cosine)");
}

// Euclidean ranks smaller scores first; InnerProduct and Cosine rank larger
// scores first.
inline bool larger_is_better(Metric m) { return m != Metric::Euclidean; }

// Pairwise score between two vectors. Euclidean scores are *squared*
// distances: monotone in the true distance, cheaper, and exact ties stay
// exact because no extra rounding step is applied. InnerProduct is the raw
// dot product. Cosine is the cosine similarity with a 1e-12 additive guard on
// the norm product so zero vectors score 0 instead of NaN.
inline float score(Metric m, const Eigen::Ref<const Eigen::RowVectorXf>& a,
                   const Eigen::Ref<const Eigen::RowVectorXf>& b) {
  switch (m) {
    case Metric::Euclidean:
      return (a - b).squaredNorm();
    case Metric::InnerProduct:
      return a.dot(b);
    case Metric::Cosine: {
      const double denom =
          static_cast<double>(a.norm()) * static_cast<double>(b.norm()) + 1e-12;
      return static_cast<float>(a.dot(b) / denom);
    }
  }
  throw ValidationError("unknown metric enum value");
}

// One retrieved item: dataset row index plus its score under some metric.
struct Neighbor {
  std::int32_t index = 0;
  float score = 0.0f;
};

// Strict total order "a ranks before b": better score first, exact score ties
// broken by ascending dataset index. This is the single tie-break rule used
// everywhere (oracle, indexes, beam search).
inline bool ranks_before(Metric m, const Neighbor& a, const Neighbor& b) {
  if (a.score != b.score)
    return larger_is_better(m) ? a.score > b.score : a.score < b.score;
  return a.index < b.index;
}

// Ranked retrieval result, best first. Invariant: sorted by ranks_before and
// indices are distinct.
using NeighborList = std::vector<Neighbor>;

inline bool is_ranked(Metric m, const NeighborList& list) {
  for (std::size_t i = 1; i < list.size(); ++i)
    if (!ranks_before(m, list[i - 1], list[i])) return false;
  return true;
}

// Dense float32 dataset, n rows of dimension d.
// Invariants: n >= 1, d >= 1, every entry finite.
struct VectorDataset {
  RowMatrixXf rows;

  Eigen::Index n() const { return rows.rows(); }
  Eigen::Index d() const { return rows.cols(); }
  Eigen::Ref<const Eigen::RowVectorXf> row(Eigen::Index i) const {
    return rows.row(i);
  }
};

// Validates the dataset invariants and wraps the matrix.
inline VectorDataset make_dataset(RowMatrixXf rows) {
  if (rows.rows() < 1 || rows.cols() < 1)
    throw ValidationError("a vector dataset needs at least one row and one dimension");
  if (!rows.allFinite())
    throw ValidationError("vector dataset contains a non-finite value");
  return VectorDataset{std::move(rows)};
}

// Queries share the dataset layout; callers dimension-check against the
// dataset they target.
using QuerySet = VectorDataset;

inline void check_same_dim(const VectorDataset& data, const QuerySet& queries) {
  if (data.d() != queries.d())
    throw ValidationError("query dimension " + std::to_string(queries.d()) +
                          " does not match dataset dimension " +
                          std::to_string(data.d()));
}

// Per-row integer labels, aligned with a dataset by position. Labels are
// non-negative.
struct LabelMap {
  std::vector<std::int64_t> labels;

  std::size_t size() const { return labels.size(); }
  void check_aligned_with(Eigen::Index n, const char* what) const {
    if (static_cast<Eigen::Index>(labels.size()) != n)
      throw ValidationError(std::string(what) + ": label count " +
                            std::to_string(labels.size()) +
                            " does not match row count " + std::to_string(n));
  }
};

// Label popularity weights, shared across all queries of a workload.
struct PopularityMap {
  std::unordered_map<std::int64_t, double> weight;
};

// Per-query relevant-label sets plus the popularity weights parsed from the
// same file.
struct HitSetFile {
  std::vector<std::unordered_set<std::int64_t>> hit_sets;
  PopularityMap popularity;
};

// Exact top-K answers for a query batch: row i holds the K best dataset
// indices for query i, best first, with the matching scores side by side.
struct GroundTruth {
  Metric metric = Metric::Euclidean;
  int k = 0;
  RowMatrixXi indices;
  RowMatrixXf scores;

  Eigen::Index query_count() const { return indices.rows(); }
};

}  // namespace vssc
