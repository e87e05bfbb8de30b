#include <doctest.h>

#include <cmath>

#include "vssc/metafeatures.hpp"
#include "vssc/oracle.hpp"
#include "vssc/synthgen.hpp"
#include "vssc/taskmetrics.hpp"

using namespace vssc;

TEST_CASE("degenerate knobs collapse each class to one unit point") {
  SynthConfig cfg;
  cfg.n = 60;
  cfg.d = 8;
  cfg.k_classes = 3;
  cfg.spread = 0.0;
  cfg.norm_log_sigma = 0.0;
  cfg.seed = 5;
  const SynthData data = generate(cfg);

  for (Eigen::Index i = 0; i < cfg.n; ++i) {
    CHECK(std::abs(data.base.row(i).norm() - 1.0f) < 1e-5f);
    // Same class => identical vector (noise scale is exactly zero).
    const Eigen::Index rep = i % cfg.k_classes;
    CHECK(data.base.row(i) == data.base.row(rep));
  }
  CHECK(compute_cv(data.base) < 1e-6);
}

TEST_CASE("same config and seed give byte-identical outputs") {
  SynthConfig cfg;
  cfg.n = 300;
  cfg.d = 10;
  cfg.k_classes = 7;
  cfg.spread = 0.15;
  cfg.norm_log_sigma = 0.2;
  cfg.label_noise = 0.1;
  cfg.query_count = 40;
  cfg.seed = 77;

  const SynthData a = generate(cfg);
  const SynthData b = generate(cfg);
  CHECK(a.base.rows == b.base.rows);
  CHECK(a.queries.rows == b.queries.rows);
  CHECK(a.base_labels.labels == b.base_labels.labels);
  CHECK(a.query_labels.labels == b.query_labels.labels);
  CHECK(a.class_directions == b.class_directions);

  SynthConfig other = cfg;
  other.seed = 78;
  CHECK(generate(other).base.rows != a.base.rows);
}

TEST_CASE("class directions are unit vectors with bounded pairwise dots") {
  SynthConfig cfg;
  cfg.n = 64;
  cfg.d = 4;  // low dimension forces the rejection loop to matter
  cfg.k_classes = 8;
  cfg.seed = 13;
  const SynthData data = generate(cfg);

  for (int a = 0; a < cfg.k_classes; ++a) {
    CHECK(std::abs(data.class_directions.row(a).norm() - 1.0f) < 1e-5f);
    for (int b = 0; b < a; ++b)
      CHECK(data.class_directions.row(a).dot(data.class_directions.row(b)) <=
            0.9f);
  }
}

TEST_CASE("labels balance within one before noise injection") {
  SynthConfig cfg;
  cfg.n = 1001;
  cfg.d = 6;
  cfg.k_classes = 7;
  cfg.label_noise = 0.0;
  cfg.seed = 3;
  const SynthData data = generate(cfg);

  std::vector<int> count(static_cast<std::size_t>(cfg.k_classes), 0);
  for (std::int64_t l : data.base_labels.labels) {
    REQUIRE(l >= 0);
    REQUIRE(l < cfg.k_classes);
    ++count[static_cast<std::size_t>(l)];
  }
  const auto [lo, hi] = std::minmax_element(count.begin(), count.end());
  CHECK(*hi - *lo <= 1);
}

TEST_CASE("label noise resamples roughly its share of labels") {
  SynthConfig cfg;
  cfg.n = 2000;
  cfg.d = 6;
  cfg.k_classes = 8;
  cfg.label_noise = 0.5;
  cfg.seed = 17;
  const SynthData data = generate(cfg);

  Eigen::Index changed = 0;
  for (Eigen::Index i = 0; i < cfg.n; ++i)
    if (data.base_labels.labels[static_cast<std::size_t>(i)] !=
        i % cfg.k_classes)
      ++changed;
  // Expected change fraction is noise * (k-1)/k = 0.4375.
  const double fraction = static_cast<double>(changed) / static_cast<double>(cfg.n);
  CHECK(fraction > 0.35);
  CHECK(fraction < 0.52);

  // Queries always carry the true class.
  for (Eigen::Index i = 0; i < cfg.query_count; ++i)
    CHECK(data.query_labels.labels[static_cast<std::size_t>(i)] ==
          i % cfg.k_classes);
}

TEST_CASE("tight classes give perfect exhaustive label recall at K=10") {
  SynthConfig cfg;
  cfg.n = 5000;
  cfg.d = 32;
  cfg.k_classes = 10;
  cfg.spread = 0.05;
  cfg.norm_log_sigma = 0.0;
  cfg.label_noise = 0.0;
  cfg.query_count = 100;
  cfg.seed = 21;
  const SynthData data = generate(cfg);

  for (Metric metric : {Metric::Euclidean, Metric::InnerProduct}) {
    const GroundTruth truth =
        batch_ground_truth(data.base, data.queries, 10, metric, false);
    std::vector<NeighborList> lists(static_cast<std::size_t>(truth.query_count()));
    for (Eigen::Index q = 0; q < truth.query_count(); ++q)
      for (int j = 0; j < truth.k; ++j)
        lists[static_cast<std::size_t>(q)].push_back(
            {truth.indices(q, j), truth.scores(q, j)});
    CHECK(label_recall(lists, data.base_labels, data.query_labels.labels, 10) ==
          1.0);
  }
}

TEST_CASE("norm spread knob maps onto CV monotonically with a log-normal shape") {
  double previous = -1.0;
  for (double sigma : {0.0, 0.1, 0.3, 0.6}) {
    SynthConfig cfg;
    cfg.n = 4000;
    cfg.d = 8;
    cfg.k_classes = 5;
    cfg.norm_log_sigma = sigma;
    cfg.seed = 37;
    const double cv = compute_cv(generate(cfg).base);

    CHECK(cv > previous);
    previous = cv;

    if (sigma == 0.0) {
      CHECK(cv < 0.02);
    } else {
      // Log-normal theory: CV -> sqrt(exp(sigma^2) - 1); allow a wide band.
      const double theory = std::sqrt(std::exp(sigma * sigma) - 1.0);
      CHECK(cv > 0.7 * theory);
      CHECK(cv < 1.3 * theory);
    }
  }
}

TEST_CASE("invalid configurations are rejected") {
  SynthConfig cfg;

  SUBCASE("fewer points than classes") {
    cfg.n = 3;
    cfg.k_classes = 4;
    CHECK_THROWS_AS(generate(cfg), ValidationError);
  }
  SUBCASE("no classes") {
    cfg.k_classes = 0;
    CHECK_THROWS_AS(generate(cfg), ValidationError);
  }
  SUBCASE("dimension below two") {
    cfg.d = 1;
    CHECK_THROWS_AS(generate(cfg), ValidationError);
  }
  SUBCASE("negative spread") {
    cfg.spread = -0.1;
    CHECK_THROWS_AS(generate(cfg), ValidationError);
  }
  SUBCASE("negative norm sigma") {
    cfg.norm_log_sigma = -0.5;
    CHECK_THROWS_AS(generate(cfg), ValidationError);
  }
  SUBCASE("label noise above one") {
    cfg.label_noise = 1.5;
    CHECK_THROWS_AS(generate(cfg), ValidationError);
  }
  SUBCASE("no queries") {
    cfg.query_count = 0;
    CHECK_THROWS_AS(generate(cfg), ValidationError);
  }
}
