#include "vssc/metafeatures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vssc/oracle.hpp"
#include "vssc/parallel.hpp"
#include "vssc/rng.hpp"

namespace vssc {
namespace {

double clamped_arccos(double x) {
  return std::acos(std::clamp(x, -1.0, 1.0));
}

double cosine_distance(const Eigen::RowVectorXd& a,
                       const Eigen::RowVectorXd& b) {
  const double denom = a.norm() * b.norm() + 1e-12;
  return 1.0 - std::clamp(a.dot(b) / denom, -1.0, 1.0);
}

// Plain (not squared) distance between an anchor row and another row under
// the RC distance choice.
double rc_distance(const VectorDataset& data, Eigen::Index a, Eigen::Index b,
                   Metric metric) {
  if (metric == Metric::Euclidean)
    return std::sqrt(static_cast<double>(
        (data.rows.row(a) - data.rows.row(b)).squaredNorm()));
  return cosine_distance(data.rows.row(a).cast<double>(),
                         data.rows.row(b).cast<double>());
}

}  // namespace

double compute_dbi(const VectorDataset& dataset, const Clustering& clustering,
                   DbiVariant variant) {
  const Eigen::Index n = dataset.n();
  if (clustering.k < 2)
    throw ValidationError("DBI needs at least 2 clusters");
  if (static_cast<Eigen::Index>(clustering.assignment.size()) != n)
    throw ValidationError("clustering does not cover this dataset");
  const bool match =
      (variant == DbiVariant::Euclidean &&
       clustering.variant == KmeansVariant::Euclidean) ||
      (variant == DbiVariant::Cosine &&
       clustering.variant == KmeansVariant::Spherical);
  if (!match)
    throw ValidationError(
        "DBI variant does not match the clustering variant (Euclidean pairs "
        "with Euclidean, Cosine with Spherical)");

  const int k = clustering.k;
  const RowMatrixXf& c = clustering.centroids;

  // Per-cluster dispersion: mean member-to-centroid distance.
  std::vector<double> dist_sum(static_cast<std::size_t>(k), 0.0);
  std::vector<std::int64_t> member_count(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::int32_t a = clustering.assignment[static_cast<std::size_t>(i)];
    double dist;
    if (variant == DbiVariant::Euclidean)
      dist = std::sqrt(
          static_cast<double>((dataset.rows.row(i) - c.row(a)).squaredNorm()));
    else
      dist = cosine_distance(dataset.rows.row(i).cast<double>(),
                             c.row(a).cast<double>());
    dist_sum[static_cast<std::size_t>(a)] += dist;
    ++member_count[static_cast<std::size_t>(a)];
  }
  std::vector<double> sigma(static_cast<std::size_t>(k), 0.0);
  for (int i = 0; i < k; ++i) {
    if (member_count[static_cast<std::size_t>(i)] == 0)
      throw ValidationError("DBI: cluster " + std::to_string(i) + " is empty");
    sigma[static_cast<std::size_t>(i)] =
        dist_sum[static_cast<std::size_t>(i)] /
        static_cast<double>(member_count[static_cast<std::size_t>(i)]);
  }

  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    double worst = 0.0;
    for (int j = 0; j < k; ++j) {
      if (j == i) continue;
      double sep;
      if (variant == DbiVariant::Euclidean)
        sep = std::sqrt(
            static_cast<double>((c.row(i) - c.row(j)).squaredNorm()));
      else
        sep = cosine_distance(c.row(i).cast<double>(), c.row(j).cast<double>());
      if (sep == 0.0)
        throw ValidationError("DBI: clusters " + std::to_string(i) + " and " +
                              std::to_string(j) + " have coincident centroids");
      worst = std::max(worst, (sigma[static_cast<std::size_t>(i)] +
                               sigma[static_cast<std::size_t>(j)]) /
                                  sep);
    }
    total += worst;
  }
  return total / static_cast<double>(k);
}

double compute_cv(const VectorDataset& dataset) {
  const Eigen::Index n = dataset.n();
  Eigen::VectorXd norms(n);
  for (Eigen::Index i = 0; i < n; ++i)
    norms(i) = dataset.rows.row(i).cast<double>().norm();
  const double mean = norms.mean();
  if (mean == 0.0)
    throw ValidationError("CV undefined: every row is the zero vector");
  const double var = (norms.array() - mean).square().sum() /
                     static_cast<double>(n);  // population variance
  return std::sqrt(var) / mean;
}

double compute_ra(const VectorDataset& dataset) {
  const Eigen::Index n = dataset.n();
  const Eigen::RowVectorXd center =
      dataset.rows.cast<double>().colwise().mean();
  const double center_norm = center.norm();

  std::vector<double> angle(static_cast<std::size_t>(n));
  parallel_for(0, n, worker_count(), [&](std::int64_t i) {
    const Eigen::RowVectorXd v = dataset.rows.row(i).cast<double>();
    const double denom = v.norm() * center_norm + 1e-12;
    angle[static_cast<std::size_t>(i)] = clamped_arccos(v.dot(center) / denom);
  });
  const double sum = std::accumulate(angle.begin(), angle.end(), 0.0);
  return (sum / static_cast<double>(n)) * (180.0 / M_PI);
}

double compute_rc(const VectorDataset& dataset, const RcOptions& options) {
  const Eigen::Index n = dataset.n();
  if (n < 3) throw ValidationError("RC needs n >= 3");
  if (options.distance == Metric::InnerProduct)
    throw ValidationError("RC distance must be l2 or cosine");
  const int anchor_count =
      options.anchor_count > 0
          ? std::min<int>(options.anchor_count, static_cast<int>(n))
          : static_cast<int>(std::min<Eigen::Index>(n, 10000));
  const int mean_samples =
      options.mean_sample_count > 0
          ? std::min<int>(options.mean_sample_count, static_cast<int>(n) - 1)
          : static_cast<int>(std::min<Eigen::Index>(n - 1, 1000));
  const int workers = options.workers > 0 ? options.workers : worker_count();

  // Anchor draw happens once, up front, with the base seed; anchors are then
  // sorted so every downstream accumulation runs in a fixed order.
  std::vector<std::int32_t> anchors;
  if (anchor_count >= n) {
    anchors.resize(static_cast<std::size_t>(n));
    std::iota(anchors.begin(), anchors.end(), 0);
  } else {
    Rng rng(options.seed);
    std::vector<std::int32_t> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    for (int j = 0; j < anchor_count; ++j) {
      const std::size_t pick =
          static_cast<std::size_t>(j) +
          rng.uniform_index(static_cast<std::size_t>(n - j));
      std::swap(pool[static_cast<std::size_t>(j)], pool[pick]);
    }
    anchors.assign(pool.begin(), pool.begin() + anchor_count);
    std::sort(anchors.begin(), anchors.end());
  }

  // ratio slot per anchor; negative marks a skipped duplicate anchor.
  std::vector<double> ratio(anchors.size(), -1.0);
  parallel_for(0, static_cast<std::int64_t>(anchors.size()), workers,
               [&](std::int64_t ai) {
    const std::int32_t anchor = anchors[static_cast<std::size_t>(ai)];
    const NeighborList nearest = exact_topk(
        dataset, dataset.row(anchor), 1, options.distance, anchor);
    const double d_min =
        options.distance == Metric::Euclidean
            ? std::sqrt(static_cast<double>(nearest[0].score))
            : 1.0 - static_cast<double>(nearest[0].score);
    if (d_min < 1e-12) return;  // duplicate anchor, skip

    // Mean-distance samples come from a per-anchor stream so results do not
    // depend on the order anchors are processed in.
    std::vector<std::int32_t> samples;
    if (mean_samples >= n - 1) {
      samples.reserve(static_cast<std::size_t>(n - 1));
      for (Eigen::Index i = 0; i < n; ++i)
        if (static_cast<std::int32_t>(i) != anchor)
          samples.push_back(static_cast<std::int32_t>(i));
    } else {
      Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(anchor) + 1));
      std::vector<std::int32_t> pool;
      pool.reserve(static_cast<std::size_t>(n - 1));
      for (Eigen::Index i = 0; i < n; ++i)
        if (static_cast<std::int32_t>(i) != anchor)
          pool.push_back(static_cast<std::int32_t>(i));
      for (int j = 0; j < mean_samples; ++j) {
        const std::size_t pick =
            static_cast<std::size_t>(j) +
            rng.uniform_index(pool.size() - static_cast<std::size_t>(j));
        std::swap(pool[static_cast<std::size_t>(j)], pool[pick]);
      }
      samples.assign(pool.begin(), pool.begin() + mean_samples);
      std::sort(samples.begin(), samples.end());
    }

    double sum = 0.0;
    for (const std::int32_t s : samples)
      sum += rc_distance(dataset, anchor, s, options.distance);
    const double d_mean = sum / static_cast<double>(samples.size());
    ratio[static_cast<std::size_t>(ai)] = d_mean / d_min;
  });

  double total = 0.0;
  std::int64_t kept = 0;
  for (const double r : ratio) {
    if (r < 0.0) continue;
    total += r;
    ++kept;
  }
  if (kept == 0)
    throw ValidationError(
        "RC undefined: every sampled anchor is a duplicate of another row");
  return total / static_cast<double>(kept);
}

MetaFeatureProfile profile(const VectorDataset& dataset,
                           const ProfileOptions& options) {
  const Eigen::Index n = dataset.n();
  int k = options.k;
  if (k == 0)
    k = static_cast<int>(std::clamp<long>(
        std::lround(std::sqrt(static_cast<double>(n))), 2, 4096));
  if (k > n)
    throw ValidationError("profile: k=" + std::to_string(k) +
                          " exceeds dataset size " + std::to_string(n));

  KmeansOptions km = options.kmeans;
  km.workers = options.workers;

  km.seed = derive_seed(options.seed, 1);
  const Clustering euclidean = kmeans(dataset, k, KmeansVariant::Euclidean, km);
  km.seed = derive_seed(options.seed, 2);
  const Clustering spherical = kmeans(dataset, k, KmeansVariant::Spherical, km);

  RcOptions rc = options.rc;
  rc.seed = derive_seed(options.seed, 3);
  rc.workers = options.workers;

  MetaFeatureProfile p;
  p.dbi_e = compute_dbi(dataset, euclidean, DbiVariant::Euclidean);
  p.dbi_c = compute_dbi(dataset, spherical, DbiVariant::Cosine);
  p.cv = compute_cv(dataset);
  p.ra_deg = compute_ra(dataset);
  p.rc = compute_rc(dataset, rc);

  p.provenance.k = k;
  p.provenance.rc_anchor_count =
      rc.anchor_count > 0 ? std::min<int>(rc.anchor_count, static_cast<int>(n))
                          : static_cast<int>(std::min<Eigen::Index>(n, 10000));
  p.provenance.rc_mean_sample_count =
      rc.mean_sample_count > 0
          ? std::min<int>(rc.mean_sample_count, static_cast<int>(n) - 1)
          : static_cast<int>(std::min<Eigen::Index>(n - 1, 1000));
  p.provenance.rc_distance = metric_name(rc.distance);
  p.provenance.kmeans_max_iters = km.max_iters;
  p.provenance.kmeans_tol = km.tol;
  p.provenance.kmeans_iterations_euclidean = euclidean.iterations;
  p.provenance.kmeans_iterations_spherical = spherical.iterations;
  p.provenance.seed = options.seed;

  const bool sane = std::isfinite(p.dbi_e) && std::isfinite(p.dbi_c) &&
                    p.cv >= 0.0 && std::isfinite(p.cv) && p.ra_deg >= 0.0 &&
                    p.ra_deg <= 180.0 && p.rc > 0.0 && std::isfinite(p.rc);
  if (!sane)
    throw ValidationError("profile produced an out-of-range meta-feature");
  return p;
}

nlohmann::ordered_json profile_to_json(const MetaFeatureProfile& p) {
  nlohmann::ordered_json j;
  j["dbi_e"] = p.dbi_e;
  j["dbi_c"] = p.dbi_c;
  j["cv"] = p.cv;
  j["ra_deg"] = p.ra_deg;
  j["rc"] = p.rc;
  j["provenance"] = {
      {"k", p.provenance.k},
      {"rc_anchor_count", p.provenance.rc_anchor_count},
      {"rc_mean_sample_count", p.provenance.rc_mean_sample_count},
      {"rc_distance", p.provenance.rc_distance},
      {"kmeans_max_iters", p.provenance.kmeans_max_iters},
      {"kmeans_tol", p.provenance.kmeans_tol},
      {"kmeans_iterations_euclidean", p.provenance.kmeans_iterations_euclidean},
      {"kmeans_iterations_spherical", p.provenance.kmeans_iterations_spherical},
      {"seed", p.provenance.seed},
  };
  return j;
}

MetaFeatureProfile profile_from_json(const nlohmann::json& j) {
  MetaFeatureProfile p;
  try {
    p.dbi_e = j.at("dbi_e").get<double>();
    p.dbi_c = j.at("dbi_c").get<double>();
    p.cv = j.at("cv").get<double>();
    p.ra_deg = j.at("ra_deg").get<double>();
    p.rc = j.at("rc").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed profile JSON: ") + e.what());
  }
  if (j.contains("provenance")) {
    const auto& prov = j.at("provenance");
    p.provenance.k = prov.value("k", 0);
    p.provenance.rc_anchor_count = prov.value("rc_anchor_count", 0);
    p.provenance.rc_mean_sample_count = prov.value("rc_mean_sample_count", 0);
    p.provenance.rc_distance = prov.value("rc_distance", "l2");
    p.provenance.kmeans_max_iters = prov.value("kmeans_max_iters", 0);
    p.provenance.kmeans_tol = prov.value("kmeans_tol", 0.0);
    p.provenance.kmeans_iterations_euclidean =
        prov.value("kmeans_iterations_euclidean", 0);
    p.provenance.kmeans_iterations_spherical =
        prov.value("kmeans_iterations_spherical", 0);
    p.provenance.seed = prov.value("seed", std::uint64_t{0});
  }
  return p;
}

}  // namespace vssc
