#include <doctest.h>

#include <cstdint>
#include <limits>

#include "test_util.hpp"
#include "vssc/io.hpp"
#include "vssc/synthgen.hpp"

using namespace vssc;
using namespace testutil;

TEST_CASE("fvecs single record loads") {
  TempDir dir("fvecs_single");
  const auto path = dir.file("one.fvecs");
  write_bytes(path, fvecs_record({1.0f, 2.0f}));

  const VectorDataset data = load_fvecs(path);
  CHECK(data.n() == 1);
  CHECK(data.d() == 2);
  CHECK(data.rows(0, 0) == 1.0f);
  CHECK(data.rows(0, 1) == 2.0f);
}

TEST_CASE("fvecs round-trip is byte-identical") {
  TempDir dir("fvecs_rt");
  const auto original = dir.file("a.fvecs");
  const auto rewritten = dir.file("b.fvecs");

  // Hand-built file with several records, including negatives, zeros and
  // subnormal-ish magnitudes.
  std::string bytes;
  bytes += fvecs_record({0.0f, -1.5f, 3.25f});
  bytes += fvecs_record({1e-30f, 2e30f, -0.0f});
  bytes += fvecs_record({7.0f, 8.0f, 9.0f});
  write_bytes(original, bytes);

  write_fvecs(rewritten, load_fvecs(original).rows);
  CHECK(read_bytes(rewritten) == bytes);
}

TEST_CASE("fvecs round-trip over generator output") {
  TempDir dir("fvecs_gen");
  SynthConfig cfg;
  cfg.n = 10;
  cfg.d = 5;
  cfg.k_classes = 2;
  cfg.seed = 31;
  const RowMatrixXf m = generate(cfg).base.rows;

  const auto path = dir.file("gen.fvecs");
  write_fvecs(path, m);
  const VectorDataset back = load_fvecs(path);
  CHECK(back.rows == m);

  const auto again = dir.file("gen2.fvecs");
  write_fvecs(again, back.rows);
  CHECK(read_bytes(again) == read_bytes(path));
}

TEST_CASE("fvecs malformed files are rejected") {
  TempDir dir("fvecs_bad");

  SUBCASE("empty file") {
    const auto path = dir.file("empty.fvecs");
    write_bytes(path, "");
    CHECK_THROWS_AS(load_fvecs(path), ValidationError);
  }
  SUBCASE("zero dimension header") {
    const auto path = dir.file("zerod.fvecs");
    std::string bytes;
    append_i32(bytes, 0);
    write_bytes(path, bytes);
    CHECK_THROWS_AS(load_fvecs(path), ValidationError);
  }
  SUBCASE("negative dimension header") {
    const auto path = dir.file("negd.fvecs");
    std::string bytes;
    append_i32(bytes, -3);
    append_f32(bytes, 1.0f);
    write_bytes(path, bytes);
    CHECK_THROWS_AS(load_fvecs(path), ValidationError);
  }
  SUBCASE("inconsistent dimensions across records") {
    const auto path = dir.file("mixed.fvecs");
    write_bytes(path, fvecs_record({1.0f, 2.0f}) + fvecs_record({3.0f}));
    CHECK_THROWS_AS(load_fvecs(path), ValidationError);
  }
  SUBCASE("truncated payload") {
    const auto path = dir.file("trunc.fvecs");
    std::string bytes = fvecs_record({1.0f, 2.0f});
    bytes.resize(bytes.size() - 2);
    write_bytes(path, bytes);
    CHECK_THROWS_AS(load_fvecs(path), ValidationError);
  }
  SUBCASE("truncated header") {
    const auto path = dir.file("trunchdr.fvecs");
    std::string bytes = fvecs_record({1.0f});
    bytes += "\x01";  // one stray byte where the next header should be
    write_bytes(path, bytes);
    CHECK_THROWS_AS(load_fvecs(path), ValidationError);
  }
  SUBCASE("non-finite value") {
    const auto path = dir.file("nan.fvecs");
    std::string bytes;
    append_i32(bytes, 2);
    append_f32(bytes, 1.0f);
    append_f32(bytes, std::numeric_limits<float>::quiet_NaN());
    write_bytes(path, bytes);
    CHECK_THROWS_AS(load_fvecs(path), ValidationError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_fvecs(dir.file("nope.fvecs")), IoError);
  }
}

TEST_CASE("ivecs single record loads") {
  TempDir dir("ivecs_single");
  const auto path = dir.file("one.ivecs");
  write_bytes(path, ivecs_record({5, 1, 9}));

  const RowMatrixXi m = load_ivecs(path);
  REQUIRE(m.rows() == 1);
  REQUIRE(m.cols() == 3);
  CHECK(m(0, 0) == 5);
  CHECK(m(0, 1) == 1);
  CHECK(m(0, 2) == 9);
}

TEST_CASE("ivecs round-trip and empty file") {
  TempDir dir("ivecs_rt");

  SUBCASE("round-trip is byte-identical") {
    const auto path = dir.file("a.ivecs");
    std::string bytes = ivecs_record({-7, 0, 2147483647}) + ivecs_record({1, 2, 3});
    write_bytes(path, bytes);
    const auto copy = dir.file("b.ivecs");
    write_ivecs(copy, load_ivecs(path));
    CHECK(read_bytes(copy) == bytes);
  }
  SUBCASE("empty file is a zero-row matrix") {
    const auto path = dir.file("empty.ivecs");
    write_bytes(path, "");
    const RowMatrixXi m = load_ivecs(path);
    CHECK(m.rows() == 0);
    CHECK(m.cols() == 0);
  }
  SUBCASE("truncation still rejected") {
    const auto path = dir.file("trunc.ivecs");
    std::string bytes = ivecs_record({1, 2});
    bytes.pop_back();
    write_bytes(path, bytes);
    CHECK_THROWS_AS(load_ivecs(path), ValidationError);
  }
}

TEST_CASE("loads do not mutate: two loads compare equal") {
  TempDir dir("fvecs_pure");
  const auto path = dir.file("a.fvecs");
  write_fvecs(path, gaussian_matrix(17, 6, 99));
  const VectorDataset first = load_fvecs(path);
  const VectorDataset second = load_fvecs(path);
  CHECK(first.rows == second.rows);
}

TEST_CASE("label file parsing") {
  TempDir dir("labels");

  SUBCASE("basic parse and attach") {
    const auto path = dir.file("l.txt");
    write_bytes(path, "0\n0\n1\n");
    const LabelMap labels = load_labels(path);
    REQUIRE(labels.size() == 3);
    CHECK(labels.labels == std::vector<std::int64_t>{0, 0, 1});
    CHECK_NOTHROW(labels.check_aligned_with(3, "test"));
    CHECK_THROWS_AS(labels.check_aligned_with(2, "test"), ValidationError);
  }
  SUBCASE("attach length mismatch") {
    const auto path = dir.file("short.txt");
    write_bytes(path, "4\n2\n");
    CHECK_THROWS_AS(load_labels(path).check_aligned_with(3, "dataset"),
                    ValidationError);
  }
  SUBCASE("non-integer line") {
    const auto path = dir.file("junk.txt");
    write_bytes(path, "1\nabc\n");
    CHECK_THROWS_AS(load_labels(path), ValidationError);
  }
  SUBCASE("negative label") {
    const auto path = dir.file("neg.txt");
    write_bytes(path, "1\n-2\n");
    CHECK_THROWS_AS(load_labels(path), ValidationError);
  }
  SUBCASE("write then load round-trips") {
    LabelMap labels;
    labels.labels = {3, 1, 4, 1, 5};
    const auto path = dir.file("rt.txt");
    write_labels(path, labels);
    CHECK(load_labels(path).labels == labels.labels);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_labels(dir.file("nope.txt")), IoError);
  }
}

TEST_CASE("hit-set file parsing") {
  TempDir dir("hitsets");

  SUBCASE("pairs, empty lines, shared popularity") {
    const auto path = dir.file("h.txt");
    write_bytes(path, "7:2.5,9:1.0\n\n9:1.0,3:0.5\n");
    const HitSetFile h = load_hitsets(path);
    REQUIRE(h.hit_sets.size() == 3);
    CHECK(h.hit_sets[0] == std::unordered_set<std::int64_t>{7, 9});
    CHECK(h.hit_sets[1].empty());
    CHECK(h.hit_sets[2] == std::unordered_set<std::int64_t>{9, 3});
    CHECK(h.popularity.weight.at(7) == 2.5);
    CHECK(h.popularity.weight.at(9) == 1.0);
    CHECK(h.popularity.weight.at(3) == 0.5);
  }
  SUBCASE("conflicting popularity for one label") {
    const auto path = dir.file("conflict.txt");
    write_bytes(path, "7:2.5\n7:3.0\n");
    CHECK_THROWS_AS(load_hitsets(path), ValidationError);
  }
  SUBCASE("malformed pair") {
    const auto path = dir.file("malformed.txt");
    write_bytes(path, "7=2.5\n");
    CHECK_THROWS_AS(load_hitsets(path), ValidationError);
  }
  SUBCASE("negative popularity") {
    const auto path = dir.file("negpop.txt");
    write_bytes(path, "7:-0.5\n");
    CHECK_THROWS_AS(load_hitsets(path), ValidationError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_hitsets(dir.file("nope.txt")), IoError);
  }
}
