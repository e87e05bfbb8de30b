#include "vssc/synthgen.hpp"

#include <cmath>

#include "vssc/rng.hpp"

namespace vssc {
namespace {

void validate(const SynthConfig& c) {
  if (c.k_classes < 1 || c.n < c.k_classes)
    throw ValidationError("synth: need n >= k_classes >= 1");
  if (c.d < 2) throw ValidationError("synth: need d >= 2");
  if (c.query_count < 1) throw ValidationError("synth: need query_count >= 1");
  if (c.spread < 0.0) throw ValidationError("synth: spread must be >= 0");
  if (c.norm_log_sigma < 0.0)
    throw ValidationError("synth: norm_log_sigma must be >= 0");
  if (c.label_noise < 0.0 || c.label_noise > 1.0)
    throw ValidationError("synth: label_noise must be in [0, 1]");
}

Eigen::RowVectorXf draw_unit_direction(Rng& rng, Eigen::Index d) {
  Eigen::RowVectorXf v(d);
  for (;;) {
    for (Eigen::Index j = 0; j < d; ++j)
      v(j) = static_cast<float>(rng.gaussian());
    const float norm = v.norm();
    if (norm > 0.0f) return v / norm;
  }
}

// One synthetic point around a class direction: noisy direction normalized
// back to the sphere, then log-normal norm scaling. The noise vector and the
// scale gaussian are always drawn, so the same seed places points identically
// whichever knobs are zero.
Eigen::RowVectorXf draw_point(Rng& rng, const Eigen::RowVectorXf& direction,
                              const SynthConfig& c) {
  Eigen::RowVectorXf v(c.d);
  for (;;) {
    for (Eigen::Index j = 0; j < c.d; ++j)
      v(j) = direction(j) +
             static_cast<float>(c.spread * rng.gaussian());
    const float norm = v.norm();
    const double scale_gauss = rng.gaussian();
    if (norm == 0.0f) continue;  // essentially impossible, redraw
    const float scale =
        static_cast<float>(std::exp(c.norm_log_sigma * scale_gauss));
    return (v / norm) * scale;
  }
}

}  // namespace

SynthData generate(const SynthConfig& config) {
  validate(config);
  SynthData data;

  // Stage-separated streams keep each phase's draws independent of the
  // others' draw counts.
  Rng dir_rng(derive_seed(config.seed, 0));
  Rng base_rng(derive_seed(config.seed, 1));
  Rng label_rng(derive_seed(config.seed, 2));
  Rng query_rng(derive_seed(config.seed, 3));

  data.class_directions.resize(config.k_classes, config.d);
  for (int c = 0; c < config.k_classes; ++c) {
    constexpr int kMaxAttempts = 100000;
    int attempt = 0;
    for (;; ++attempt) {
      if (attempt >= kMaxAttempts)
        throw ValidationError(
            "synth: could not place " + std::to_string(config.k_classes) +
            " class directions with pairwise dot <= 0.9 at d=" +
            std::to_string(config.d));
      const Eigen::RowVectorXf dir = draw_unit_direction(dir_rng, config.d);
      bool clashes = false;
      for (int prev = 0; prev < c; ++prev) {
        if (dir.dot(data.class_directions.row(prev)) > 0.9f) {
          clashes = true;
          break;
        }
      }
      if (!clashes) {
        data.class_directions.row(c) = dir;
        break;
      }
    }
  }

  RowMatrixXf base(config.n, config.d);
  data.base_labels.labels.resize(static_cast<std::size_t>(config.n));
  for (Eigen::Index i = 0; i < config.n; ++i) {
    const int cls = static_cast<int>(i % config.k_classes);
    base.row(i) = draw_point(base_rng, data.class_directions.row(cls), config);
    std::int64_t label = cls;
    if (label_rng.uniform() < config.label_noise)
      label = static_cast<std::int64_t>(
          label_rng.uniform_index(static_cast<std::size_t>(config.k_classes)));
    data.base_labels.labels[static_cast<std::size_t>(i)] = label;
  }
  data.base = make_dataset(std::move(base));

  RowMatrixXf queries(config.query_count, config.d);
  data.query_labels.labels.resize(static_cast<std::size_t>(config.query_count));
  for (Eigen::Index i = 0; i < config.query_count; ++i) {
    const int cls = static_cast<int>(i % config.k_classes);
    queries.row(i) =
        draw_point(query_rng, data.class_directions.row(cls), config);
    data.query_labels.labels[static_cast<std::size_t>(i)] = cls;
  }
  data.queries = make_dataset(std::move(queries));

  return data;
}

}  // namespace vssc
