#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "vssc/clustering.hpp"
#include "vssc/types.hpp"

namespace vssc {

enum class DbiVariant { Euclidean, Cosine };

// Davies-Bouldin index over an existing clustering:
//   (1/N) * sum_i max_{j != i} (sigma_i + sigma_j) / d(c_i, c_j)
// where sigma_i is the mean member-to-centroid distance and d the centroid
// separation, both under the variant's distance (Euclidean, or cosine
// distance 1 - cos with unit centroids). The variant must match the
// clustering (Euclidean <-> Euclidean, Cosine <-> Spherical). Coincident
// centroids or k < 2 are errors.
double compute_dbi(const VectorDataset& dataset, const Clustering& clustering,
                   DbiVariant variant);

// Coefficient of variation of row norms: population std / mean. Errors when
// every row is the zero vector.
double compute_cv(const VectorDataset& dataset);

// Mean angle, in degrees, between each row and the global mean vector C:
//   (1/N) * sum_i arccos( <v_i, C> / (|v_i| |C| + 1e-12) )
// with the arccos argument clamped to [-1, 1]. Zero-norm rows contribute 90.
double compute_ra(const VectorDataset& dataset);

struct RcOptions {
  int anchor_count = 0;       // 0 = min(n, 10000)
  int mean_sample_count = 0;  // 0 = min(n-1, 1000)
  // Distance used for both D_min and D_mean. Euclidean by default; Cosine
  // uses 1 - cos. InnerProduct is not a distance and is rejected.
  Metric distance = Metric::Euclidean;
  std::uint64_t seed = 0;
  int workers = 0;
};

// Relative contrast: mean over sampled anchors of D_mean / D_min, where
// D_min is the exact nearest-neighbor distance (self excluded) and D_mean
// the mean distance to mean_sample_count rows sampled without replacement.
// Anchors with D_min < 1e-12 (duplicates) are skipped; all anchors skipped is
// an error. Requires n >= 3. Deterministic under fixed seed for any worker
// count.
double compute_rc(const VectorDataset& dataset, const RcOptions& options = {});

struct ProfileProvenance {
  int k = 0;
  int rc_anchor_count = 0;
  int rc_mean_sample_count = 0;
  std::string rc_distance = "l2";
  int kmeans_max_iters = 0;
  double kmeans_tol = 0.0;
  int kmeans_iterations_euclidean = 0;
  int kmeans_iterations_spherical = 0;
  std::uint64_t seed = 0;
};

// The four dataset meta-features driving index-method selection.
// Invariants: cv >= 0, ra_deg in [0, 180], rc > 0, all finite.
struct MetaFeatureProfile {
  double dbi_e = 0.0;
  double dbi_c = 0.0;
  double cv = 0.0;
  double ra_deg = 0.0;
  double rc = 0.0;
  ProfileProvenance provenance;
};

struct ProfileOptions {
  int k = 0;  // clusters for both DBI variants; 0 = round(sqrt(n)) in [2,4096]
  RcOptions rc;            // rc.seed is ignored; sub-seeded from `seed`
  KmeansOptions kmeans;    // kmeans.seed is ignored; sub-seeded from `seed`
  std::uint64_t seed = 0;
  int workers = 0;
};

// Runs Euclidean k-means for dbi_e, spherical k-means for dbi_c, plus cv,
// ra_deg and rc, recording the resolved configuration as provenance.
// Deterministic per (dataset, options, seed).
MetaFeatureProfile profile(const VectorDataset& dataset,
                           const ProfileOptions& options = {});

nlohmann::ordered_json profile_to_json(const MetaFeatureProfile& p);
MetaFeatureProfile profile_from_json(const nlohmann::json& j);

}  // namespace vssc
