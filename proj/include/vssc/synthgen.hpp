#pragma once

#include <cstdint>

#include "vssc/types.hpp"

namespace vssc {

// Synthetic embedding workload with controllable geometry. Knobs map to the
// meta-features: spread controls intra-class angular tightness (RA, RC),
// norm_log_sigma controls norm variability (CV), label_noise decouples task
// labels from geometry.
struct SynthConfig {
  Eigen::Index n = 1000;
  Eigen::Index d = 16;
  int k_classes = 8;
  double spread = 0.1;          // Gaussian noise scale around class direction
  double norm_log_sigma = 0.0;  // log-normal sigma of per-vector norm scaling
  double label_noise = 0.0;     // probability a base label is resampled
  Eigen::Index query_count = 100;
  std::uint64_t seed = 42;
};

struct SynthData {
  VectorDataset base;
  LabelMap base_labels;
  QuerySet queries;
  LabelMap query_labels;
  RowMatrixXf class_directions;  // k_classes x d unit rows
};

// Fully deterministic per seed (pinned PRNG, single-threaded draws in a fixed
// stage order). Class directions are unit vectors re-drawn until all pairwise
// dot products are <= 0.9. Each vector is normalize(direction + spread *
// gaussian_vec) * exp(norm_log_sigma * gaussian). Base labels are the class
// id (i-th point belongs to class i mod k_classes, balanced within one),
// resampled uniformly over classes with probability label_noise. Queries
// follow the same recipe and are labeled by their true class, never noised.
// Requires n >= k_classes >= 1, d >= 2, query_count >= 1, spread >= 0,
// norm_log_sigma >= 0, label_noise in [0, 1].
SynthData generate(const SynthConfig& config);

}  // namespace vssc
