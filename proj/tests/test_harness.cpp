#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <string>

#include <json.hpp>

#include "test_util.hpp"
#include "vssc/harness.hpp"
#include "vssc/io.hpp"
#include "vssc/oracle.hpp"
#include "vssc/synthgen.hpp"

using namespace vssc;
using namespace testutil;
using nlohmann::json;

namespace {

SynthData small_workload(std::uint64_t seed = 101) {
  SynthConfig cfg;
  cfg.n = 300;
  cfg.d = 8;
  cfg.k_classes = 4;
  cfg.spread = 0.25;
  cfg.query_count = 25;
  cfg.seed = seed;
  return generate(cfg);
}

json strip_timing(json j) {
  if (j.is_object()) {
    j.erase("timing");
    for (auto& [key, value] : j.items()) value = strip_timing(value);
  } else if (j.is_array()) {
    for (auto& value : j) value = strip_timing(value);
  }
  return j;
}

// Runs the CLI binary through the shell; env_prefix may set variables for
// the child (e.g. "VSSC_THREADS=8").
int run_tool(const std::string& args, const std::string& env_prefix = "") {
  std::string cmd = env_prefix.empty() ? "" : env_prefix + " ";
  cmd += "\"";
  cmd += VSSC_TOOL_PATH;
  cmd += "\" ";
  cmd += args;
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "expected JSON file at " << path);
  return json::parse(in);
}

}  // namespace

TEST_CASE("sweep validation catches malformed specs") {
  const SynthData w = small_workload();
  const GroundTruth truth =
      batch_ground_truth(w.base, w.queries, 10, Metric::Euclidean, false);
  TaskInputs task;

  SweepSpec sweep;
  sweep.kind = IndexKind::Ivf;
  sweep.metric = Metric::Euclidean;
  sweep.k = 10;

  SUBCASE("empty search-parameter list") {
    CHECK_THROWS_AS(run_evaluate(w.base, w.queries, truth, task, sweep),
                    ValidationError);
  }
  SUBCASE("non-increasing search parameters") {
    sweep.search_params = {4, 4};
    CHECK_THROWS_AS(run_evaluate(w.base, w.queries, truth, task, sweep),
                    ValidationError);
    sweep.search_params = {8, 2};
    CHECK_THROWS_AS(run_evaluate(w.base, w.queries, truth, task, sweep),
                    ValidationError);
  }
  SUBCASE("unknown build parameter for the index kind") {
    sweep.search_params = {1, 2};
    sweep.build_params["efc"] = 64;  // an nsw parameter on an ivf sweep
    CHECK_THROWS_AS(run_evaluate(w.base, w.queries, truth, task, sweep),
                    ValidationError);
  }
  SUBCASE("negative build parameter") {
    sweep.search_params = {1, 2};
    sweep.build_params["nlist"] = -4;
    CHECK_THROWS_AS(run_evaluate(w.base, w.queries, truth, task, sweep),
                    ValidationError);
  }
  SUBCASE("flat accepts no build parameters") {
    sweep.kind = IndexKind::Flat;
    sweep.search_params = {1};
    sweep.build_params["nlist"] = 8;
    CHECK_THROWS_AS(run_evaluate(w.base, w.queries, truth, task, sweep),
                    ValidationError);
  }
}

TEST_CASE("evaluate report structure and oracle end points") {
  const SynthData w = small_workload();
  const GroundTruth truth =
      batch_ground_truth(w.base, w.queries, 10, Metric::Euclidean, false);
  TaskInputs task;
  task.labels = &w.base_labels;
  task.query_labels = &w.query_labels;

  SUBCASE("flat index scores exactly 1 and carries task metrics") {
    SweepSpec sweep;
    sweep.kind = IndexKind::Flat;
    sweep.metric = Metric::Euclidean;
    sweep.k = 10;
    sweep.search_params = {1};
    const json report = run_evaluate(w.base, w.queries, truth, task, sweep);

    CHECK(report.at("tool_version") == kToolVersion);
    CHECK(report.at("kind") == "evaluate");
    CHECK(report.at("index").at("kind") == "flat");
    CHECK(report.at("index").at("metric") == "l2");
    CHECK(report.at("inputs").at("data_hash") == content_hash(w.base));
    CHECK(report.at("inputs").at("truth_hash") == content_hash(truth));
    CHECK(report.at("inputs").at("labels_hash") == content_hash(w.base_labels));

    REQUIRE(report.at("points").size() == 1);
    const json& point = report.at("points")[0];
    CHECK(point.at("synthetic_recall") == 1.0);
    CHECK(point.at("short_result_queries") == 0);
    CHECK(point.contains("label_recall"));
    CHECK(point.contains("hit_at_k"));
    CHECK(!point.contains("matching_score_total"));
    CHECK(point.at("timing").contains("qps"));
    CHECK(report.at("timing").contains("build_seconds"));
  }
  SUBCASE("ivf sweep ends at the oracle and never decreases") {
    SweepSpec sweep;
    sweep.kind = IndexKind::Ivf;
    sweep.metric = Metric::Euclidean;
    sweep.k = 10;
    sweep.build_params["nlist"] = 16;
    sweep.build_params["seed"] = 4;
    sweep.search_params = {1, 2, 4, 8, 16};
    const json report = run_evaluate(w.base, w.queries, truth, task, sweep);

    double previous = -1.0;
    for (const json& point : report.at("points")) {
      const double recall = point.at("synthetic_recall").get<double>();
      CHECK(recall >= previous);
      previous = recall;
    }
    CHECK(previous == 1.0);
  }
  SUBCASE("nsw sweep reaches the oracle at full beam width") {
    SweepSpec sweep;
    sweep.kind = IndexKind::Nsw;
    sweep.metric = Metric::Euclidean;
    sweep.k = 10;
    sweep.build_params["m"] = 16;
    sweep.build_params["efc"] = 64;
    sweep.search_params = {10, 40, static_cast<int>(w.base.n())};
    const json report = run_evaluate(w.base, w.queries, truth, task, sweep);
    const auto& points = report.at("points");
    CHECK(points.back().at("synthetic_recall") == 1.0);
  }
}

TEST_CASE("matching score appears when hit sets are supplied") {
  const SynthData w = small_workload();
  const GroundTruth truth =
      batch_ground_truth(w.base, w.queries, 5, Metric::InnerProduct, false);

  HitSetFile hitsets;
  hitsets.hit_sets.resize(static_cast<std::size_t>(w.queries.n()));
  for (Eigen::Index q = 0; q < w.queries.n(); ++q)
    hitsets.hit_sets[static_cast<std::size_t>(q)].insert(
        w.query_labels.labels[static_cast<std::size_t>(q)]);
  for (int c = 0; c < 4; ++c) hitsets.popularity.weight[c] = 1.0 + c;

  TaskInputs task;
  task.labels = &w.base_labels;
  task.hitsets = &hitsets;

  SweepSpec sweep;
  sweep.kind = IndexKind::Flat;
  sweep.metric = Metric::InnerProduct;
  sweep.k = 5;
  sweep.search_params = {1};
  const json report = run_evaluate(w.base, w.queries, truth, task, sweep);
  const json& point = report.at("points")[0];
  CHECK(point.at("matching_score_total").get<double>() > 0.0);
  CHECK(point.at("matching_score_per_query_mean").get<double>() ==
        doctest::Approx(point.at("matching_score_total").get<double>() /
                        static_cast<double>(w.queries.n()))
            .epsilon(1e-12));
  CHECK(!point.contains("label_recall"));
}

TEST_CASE("evaluate validates truth compatibility") {
  const SynthData w = small_workload();
  TaskInputs task;

  SweepSpec sweep;
  sweep.kind = IndexKind::Flat;
  sweep.metric = Metric::Euclidean;
  sweep.k = 10;
  sweep.search_params = {1};

  SUBCASE("metric mismatch") {
    const GroundTruth truth =
        batch_ground_truth(w.base, w.queries, 10, Metric::InnerProduct, false);
    CHECK_THROWS_AS(run_evaluate(w.base, w.queries, truth, task, sweep),
                    ValidationError);
  }
  SUBCASE("narrower truth") {
    const GroundTruth truth =
        batch_ground_truth(w.base, w.queries, 5, Metric::Euclidean, false);
    CHECK_THROWS_AS(run_evaluate(w.base, w.queries, truth, task, sweep),
                    ValidationError);
  }
  SUBCASE("wider truth is sliced by prefix") {
    const GroundTruth truth =
        batch_ground_truth(w.base, w.queries, 25, Metric::Euclidean, false);
    const json report = run_evaluate(w.base, w.queries, truth, task, sweep);
    CHECK(report.at("points")[0].at("synthetic_recall") == 1.0);
    CHECK(report.at("index").at("k") == 10);
  }
}

TEST_CASE("reports are identical across reruns and worker counts") {
  const SynthData w = small_workload();
  const GroundTruth truth =
      batch_ground_truth(w.base, w.queries, 10, Metric::Euclidean, false);
  TaskInputs task;
  task.labels = &w.base_labels;
  task.query_labels = &w.query_labels;

  SweepSpec sweep;
  sweep.kind = IndexKind::Ivf;
  sweep.metric = Metric::Euclidean;
  sweep.k = 10;
  sweep.build_params["nlist"] = 12;
  sweep.search_params = {1, 4, 12};

  EvalOptions one;
  one.workers = 1;
  EvalOptions eight;
  eight.workers = 8;
  eight.timing_workers = 4;

  const std::string a =
      strip_timing(run_evaluate(w.base, w.queries, truth, task, sweep, one)).dump();
  const std::string b =
      strip_timing(run_evaluate(w.base, w.queries, truth, task, sweep, one)).dump();
  const std::string c =
      strip_timing(run_evaluate(w.base, w.queries, truth, task, sweep, eight)).dump();
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("CSV projection mirrors the point curve") {
  TempDir dir("csv");
  const SynthData w = small_workload();
  const GroundTruth truth =
      batch_ground_truth(w.base, w.queries, 10, Metric::Euclidean, false);
  TaskInputs task;
  task.labels = &w.base_labels;
  task.query_labels = &w.query_labels;

  SweepSpec sweep;
  sweep.kind = IndexKind::Ivf;
  sweep.metric = Metric::Euclidean;
  sweep.k = 10;
  sweep.build_params["nlist"] = 8;
  sweep.search_params = {1, 2, 8};
  const json report = run_evaluate(w.base, w.queries, truth, task, sweep);

  const auto path = dir.file("points.csv");
  write_points_csv(path, report.at("points"));
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line ==
        "search_param,synthetic_recall,label_recall,hit_at_k,"
        "matching_score_total,matching_score_per_query_mean,"
        "short_result_queries,mean_query_latency_s,qps");
  int rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("funnel on unit-norm data: zero ceiling delta, dominance holds") {
  SynthConfig cfg;
  cfg.n = 400;
  cfg.d = 12;
  cfg.k_classes = 4;
  // Tight classes put the exhaustive label-recall ceiling at 1.0, which is
  // the regime where the layer-1 dominance check is guaranteed rather than
  // merely typical.
  cfg.spread = 0.1;
  cfg.norm_log_sigma = 0.0;
  cfg.query_count = 30;
  cfg.seed = 19;
  const SynthData w = generate(cfg);

  FunnelOptions options;
  options.k = 10;
  options.seed = 5;
  const json report =
      run_funnel(w.base, w.queries, w.base_labels, w.query_labels, options);

  CHECK(report.at("kind") == "funnel");
  CHECK(report.at("layer2").at("ceiling_delta_l2_minus_ip") == 0.0);
  CHECK(report.at("layer1_dominance_holds") == true);
  CHECK(report.at("selection").at("trace").size() == 2);
  CHECK(report.at("profile").at("cv").get<double>() < 0.02);
  CHECK(report.at("layer2").at("curves").at("l2").size() >= 2);
  CHECK(report.at("layer2").at("curves").at("ip").size() >= 2);
  CHECK(report.at("layer3").contains("ivf"));
  CHECK(report.at("layer3").contains("nsw"));

  // Layer-2 curves end at nprobe = nlist, where recall is exact.
  CHECK(report.at("layer2").at("curves").at("l2").back().at("synthetic_recall") ==
        1.0);

  // Rerun gives the identical report outside timing blocks.
  const json again =
      run_funnel(w.base, w.queries, w.base_labels, w.query_labels, options);
  CHECK(strip_timing(report).dump() == strip_timing(again).dump());
}

TEST_CASE("cli: full pipeline runs end to end") {
  TempDir dir("cli_pipeline");
  const std::string out = dir.path.string();

  REQUIRE(run_tool("synth --n 200 --d 6 --classes 4 --spread 0.25 --queries 20 "
                   "--seed 9 --out-dir " + out + " > /dev/null") == 0);
  CHECK(std::filesystem::exists(dir.file("base.fvecs")));
  CHECK(std::filesystem::exists(dir.file("base_labels.txt")));
  CHECK(std::filesystem::exists(dir.file("queries.fvecs")));
  CHECK(std::filesystem::exists(dir.file("query_labels.txt")));

  REQUIRE(run_tool("profile --data " + dir.file("base.fvecs") +
                   " --seed 3 --out " + dir.file("profile.json")) == 0);
  const json prof = read_json_file(dir.file("profile.json"));
  CHECK(prof.contains("dbi_e"));
  CHECK(prof.contains("provenance"));
  CHECK(prof.at("tool_version") == kToolVersion);
  CHECK(prof.at("data_hash").get<std::string>().rfind("fnv1a:", 0) == 0);

  REQUIRE(run_tool("select --profile " + dir.file("profile.json") + " > " +
                   dir.file("selection.json") + " 2> " + dir.file("trace.txt")) ==
          0);
  const json sel = read_json_file(dir.file("selection.json"));
  CHECK((sel.at("metric") == "l2" || sel.at("metric") == "ip"));
  CHECK(sel.at("trace").size() == 2);
  CHECK(!read_bytes(dir.file("trace.txt")).empty());

  REQUIRE(run_tool("groundtruth --data " + dir.file("base.fvecs") +
                   " --queries " + dir.file("queries.fvecs") +
                   " --k 10 --metric l2 --out-prefix " + dir.file("truth")) == 0);
  const RowMatrixXi indices = load_ivecs(dir.file("truth.ivecs"));
  CHECK(indices.rows() == 20);
  CHECK(indices.cols() == 10);
  const VectorDataset scores = load_fvecs(dir.file("truth.fvecs"));
  CHECK(scores.n() == 20);
  const json meta = read_json_file(dir.file("truth.meta.json"));
  CHECK(meta.at("metric") == "l2");
  CHECK(meta.at("k") == 10);

  REQUIRE(run_tool("evaluate --data " + dir.file("base.fvecs") + " --queries " +
                   dir.file("queries.fvecs") + " --truth-prefix " +
                   dir.file("truth") + " --labels " + dir.file("base_labels.txt") +
                   " --query-labels " + dir.file("query_labels.txt") +
                   " --index ivf --metric l2 --k 10 --build-params nlist=8,seed=2 "
                   "--search-params 1,2,4,8 --out " +
                   dir.file("eval.json")) == 0);
  const json eval = read_json_file(dir.file("eval.json"));
  CHECK(eval.at("points").size() == 4);
  CHECK(eval.at("points").back().at("synthetic_recall") == 1.0);

  REQUIRE(run_tool("funnel --data " + dir.file("base.fvecs") + " --queries " +
                   dir.file("queries.fvecs") + " --labels " +
                   dir.file("base_labels.txt") + " --query-labels " +
                   dir.file("query_labels.txt") + " --k 10 --seed 5 --out " +
                   dir.file("funnel.json")) == 0);
  const json funnel = read_json_file(dir.file("funnel.json"));
  CHECK(funnel.at("layer1").contains("l2"));
  CHECK(funnel.at("layer3").contains("nsw"));
}

TEST_CASE("cli: exit codes distinguish validation from IO failures") {
  TempDir dir("cli_codes");

  SUBCASE("unknown flag") {
    CHECK(run_tool("synth --definitely-not-a-flag 2>/dev/null") == 2);
  }
  SUBCASE("missing input file") {
    CHECK(run_tool("profile --data " + dir.file("absent.fvecs") +
                   " --seed 1 --out " + dir.file("p.json") + " 2>/dev/null") == 3);
  }
  SUBCASE("invalid parameter value") {
    REQUIRE(run_tool("synth --n 50 --d 4 --classes 2 --queries 5 --seed 1 "
                     "--out-dir " + dir.path.string() + " > /dev/null") == 0);
    CHECK(run_tool("groundtruth --data " + dir.file("base.fvecs") +
                   " --queries " + dir.file("queries.fvecs") +
                   " --k 0 --metric l2 --out-prefix " + dir.file("t") +
                   " 2>/dev/null") == 2);
    CHECK(run_tool("groundtruth --data " + dir.file("base.fvecs") +
                   " --queries " + dir.file("queries.fvecs") +
                   " --k 5 --metric cosine --out-prefix " + dir.file("t") +
                   " 2>/dev/null") == 2);
  }
  SUBCASE("hitsets require labels") {
    REQUIRE(run_tool("synth --n 50 --d 4 --classes 2 --queries 5 --seed 1 "
                     "--out-dir " + dir.path.string() + " > /dev/null") == 0);
    REQUIRE(run_tool("groundtruth --data " + dir.file("base.fvecs") +
                     " --queries " + dir.file("queries.fvecs") +
                     " --k 5 --metric l2 --out-prefix " + dir.file("truth")) == 0);
    write_bytes(dir.file("hits.txt"), "0:1.0\n1:1.0\n0:1.0\n1:1.0\n0:1.0\n");
    CHECK(run_tool("evaluate --data " + dir.file("base.fvecs") + " --queries " +
                   dir.file("queries.fvecs") + " --truth-prefix " +
                   dir.file("truth") + " --hitsets " + dir.file("hits.txt") +
                   " --index flat --metric l2 --k 5 --search-params 1 --out " +
                   dir.file("e.json") + " 2>/dev/null") == 2);
  }
  SUBCASE("help exits zero") {
    CHECK(run_tool("--help > /dev/null") == 0);
    CHECK(run_tool("synth --help > /dev/null") == 0);
  }
}

TEST_CASE("cli: outputs are byte-identical across worker counts") {
  TempDir dir("cli_threads");
  const std::string out1 = (dir.path / "one").string();
  const std::string out8 = (dir.path / "eight").string();
  std::filesystem::create_directories(out1);
  std::filesystem::create_directories(out8);

  for (const auto& [env, out] :
       {std::pair<std::string, std::string>{"VSSC_THREADS=1", out1},
        {"VSSC_THREADS=8", out8}}) {
    REQUIRE(run_tool("synth --n 240 --d 8 --classes 4 --spread 0.3 --queries 24 "
                     "--seed 77 --out-dir " + out + " > /dev/null", env) == 0);
    REQUIRE(run_tool("groundtruth --data " + out + "/base.fvecs --queries " +
                     out + "/queries.fvecs --k 10 --metric ip --out-prefix " +
                     out + "/truth", env) == 0);
    REQUIRE(run_tool("profile --data " + out + "/base.fvecs --seed 11 --out " +
                     out + "/profile.json", env) == 0);
    REQUIRE(run_tool("evaluate --data " + out + "/base.fvecs --queries " + out +
                     "/queries.fvecs --truth-prefix " + out +
                     "/truth --labels " + out + "/base_labels.txt "
                     "--query-labels " + out + "/query_labels.txt "
                     "--index nsw --metric ip --k 10 "
                     "--build-params m=8,efc=32 --search-params 10,60,240 "
                     "--out " + out + "/eval.json", env) == 0);
  }

  for (const char* name :
       {"base.fvecs", "base_labels.txt", "queries.fvecs", "query_labels.txt",
        "truth.ivecs", "truth.fvecs", "profile.json"}) {
    INFO("file ", name);
    CHECK(read_bytes(out1 + "/" + name) == read_bytes(out8 + "/" + name));
  }
  const std::string eval1 =
      strip_timing(read_json_file(out1 + "/eval.json")).dump();
  const std::string eval8 =
      strip_timing(read_json_file(out8 + "/eval.json")).dump();
  CHECK(eval1 == eval8);
}
