#include "vssc/clustering.hpp"

#include <cmath>
#include <limits>

#include "vssc/parallel.hpp"
#include "vssc/rng.hpp"

namespace vssc {
namespace {

using RowMatrixXd =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Nearest centroid under the variant's geometry, ties to the lowest cluster
// id. Works on the (possibly normalized) working matrix.
std::int32_t assign_row(const RowMatrixXf& x, Eigen::Index row,
                        const RowMatrixXf& centroids, KmeansVariant variant) {
  std::int32_t best = 0;
  if (variant == KmeansVariant::Euclidean) {
    float best_d = (x.row(row) - centroids.row(0)).squaredNorm();
    for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
      const float d = (x.row(row) - centroids.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<std::int32_t>(c);
      }
    }
  } else {
    float best_dot = x.row(row).dot(centroids.row(0));
    for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
      const float dot = x.row(row).dot(centroids.row(c));
      if (dot > best_dot) {
        best_dot = dot;
        best = static_cast<std::int32_t>(c);
      }
    }
  }
  return best;
}

// k-means++ seeding: first centroid uniform, then D^2-weighted draws where D
// is the squared Euclidean distance to the nearest chosen centroid. For the
// Spherical variant the rows are already unit-normalized, making squared
// Euclidean an order-equivalent proxy for cosine distance.
RowMatrixXf kmeanspp_init(const RowMatrixXf& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  RowMatrixXf centroids(k, x.cols());
  centroids.row(0) = x.row(static_cast<Eigen::Index>(rng.uniform_index(n)));

  Eigen::VectorXd mindist(n);
  for (Eigen::Index i = 0; i < n; ++i)
    mindist(i) = (x.row(i) - centroids.row(0)).squaredNorm();

  for (int c = 1; c < k; ++c) {
    const double total = mindist.sum();
    Eigen::Index pick;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double cum = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        cum += mindist(i);
        if (cum > r) {
          pick = i;
          break;
        }
      }
    } else {
      // All remaining mass is zero (duplicate-dominated data); fall back to a
      // uniform draw so seeding still terminates.
      pick = static_cast<Eigen::Index>(rng.uniform_index(n));
    }
    centroids.row(c) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = (x.row(i) - centroids.row(c)).squaredNorm();
      if (d < mindist(i)) mindist(i) = d;
    }
  }
  return centroids;
}

}  // namespace

Clustering kmeans(const VectorDataset& dataset, int k, KmeansVariant variant,
                  const KmeansOptions& options) {
  const Eigen::Index n = dataset.n();
  const Eigen::Index d = dataset.d();
  if (k < 1 || k > n)
    throw ValidationError("k=" + std::to_string(k) +
                          " out of range for n=" + std::to_string(n));
  const int workers = options.workers > 0 ? options.workers : worker_count();

  // Working copy: raw rows for Euclidean, unit rows for Spherical.
  RowMatrixXf x;
  if (variant == KmeansVariant::Spherical) {
    x.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      const float norm = dataset.rows.row(i).norm();
      if (norm == 0.0f)
        throw ValidationError("spherical k-means: row " + std::to_string(i) +
                              " has zero norm");
      x.row(i) = dataset.rows.row(i) / norm;
    }
  } else {
    x = dataset.rows;
  }

  Rng rng(options.seed);
  RowMatrixXf centroids = kmeanspp_init(x, k, rng);

  Clustering result;
  result.variant = variant;
  result.k = k;
  result.assignment.assign(static_cast<std::size_t>(n), 0);

  std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);

  auto assign_all = [&] {
    parallel_for(0, n, workers, [&](std::int64_t i) {
      result.assignment[static_cast<std::size_t>(i)] =
          assign_row(x, i, centroids, variant);
    });
    std::fill(counts.begin(), counts.end(), 0);
    double objective = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::int32_t c = result.assignment[static_cast<std::size_t>(i)];
      ++counts[static_cast<std::size_t>(c)];
      if (variant == KmeansVariant::Euclidean)
        objective += static_cast<double>((x.row(i) - centroids.row(c)).squaredNorm());
      else
        objective += 1.0 - static_cast<double>(x.row(i).dot(centroids.row(c)));
    }
    result.objective_history.push_back(objective);
  };

  // Moves the centroid of each cluster listed in `bad` onto the row farthest
  // from its own centroid (each donor row used once per pass). Deterministic:
  // rows scanned in order, strict improvement wins.
  auto reseed = [&](const std::vector<int>& bad) {
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    for (const int c : bad) {
      Eigen::Index donor = -1;
      float worst = -1.0f;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (taken[static_cast<std::size_t>(i)]) continue;
        const std::int32_t a = result.assignment[static_cast<std::size_t>(i)];
        const float dist = (x.row(i) - centroids.row(a)).squaredNorm();
        if (dist > worst) {
          worst = dist;
          donor = i;
        }
      }
      if (donor < 0)
        throw ValidationError("k-means: cannot reseed empty cluster " +
                              std::to_string(c));
      centroids.row(c) = x.row(donor);
      taken[static_cast<std::size_t>(donor)] = 1;
    }
  };

  RowMatrixXd sums(k, d);
  int iter = 0;
  for (; iter < options.max_iters; ++iter) {
    assign_all();

    // Member sums accumulated serially in row order so the result is
    // bit-identical for any worker count.
    sums.setZero();
    for (Eigen::Index i = 0; i < n; ++i)
      sums.row(result.assignment[static_cast<std::size_t>(i)]) +=
          x.row(i).cast<double>();

    const RowMatrixXf previous = centroids;
    std::vector<int> bad;
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) {
        bad.push_back(c);
        continue;
      }
      RowMatrixXd mean =
          sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      if (variant == KmeansVariant::Spherical) {
        const double norm = mean.norm();
        if (norm == 0.0) {
          bad.push_back(c);  // members cancelled; treat as empty
          continue;
        }
        mean /= norm;
      }
      centroids.row(c) = mean.cast<float>();
    }
    if (!bad.empty()) {
      reseed(bad);
      continue;  // displacement is meaningless across a reseed
    }

    double max_shift = 0.0;
    for (int c = 0; c < k; ++c)
      max_shift = std::max(
          max_shift,
          static_cast<double>((centroids.row(c) - previous.row(c)).norm()));
    if (max_shift < options.tol) {
      ++iter;
      break;
    }
  }

  // Final assignment against the returned centroids keeps the argmin/argmax
  // invariant; a bounded reseed loop guarantees no empty cluster on return.
  for (int attempt = 0;; ++attempt) {
    assign_all();
    std::vector<int> bad;
    for (int c = 0; c < k; ++c)
      if (counts[static_cast<std::size_t>(c)] == 0) bad.push_back(c);
    if (bad.empty()) break;
    if (attempt >= 100)
      throw ValidationError(
          "k-means: unable to resolve empty clusters (dataset dominated by "
          "duplicate rows?)");
    reseed(bad);
  }

  result.centroids = std::move(centroids);
  result.iterations = iter;
  return result;
}

}  // namespace vssc
