#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "vssc/harness.hpp"
#include "vssc/io.hpp"
#include "vssc/metafeatures.hpp"
#include "vssc/oracle.hpp"
#include "vssc/selector.hpp"
#include "vssc/synthgen.hpp"

namespace vssc {
namespace {

namespace fs = std::filesystem;

void write_json_file(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out.flush()) throw IoError("failed writing " + path);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path + " for reading");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": not valid JSON: " + e.what());
  }
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string token =
        text.substr(pos, comma == std::string::npos ? std::string::npos
                                                    : comma - pos);
    int value = 0;
    const auto [ptr, ec] =
        std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
      throw ValidationError(std::string(what) + ": '" + token +
                            "' is not an integer");
    out.push_back(value);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::map<std::string, std::int64_t> parse_kv_list(const std::string& text) {
  std::map<std::string, std::int64_t> out;
  if (text.empty()) return out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string token =
        text.substr(pos, comma == std::string::npos ? std::string::npos
                                                    : comma - pos);
    const std::size_t eq = token.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ValidationError("build parameter '" + token +
                            "' is not of the form key=value");
    const std::string key = token.substr(0, eq);
    const std::string value_text = token.substr(eq + 1);
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(
        value_text.data(), value_text.data() + value_text.size(), value);
    if (ec != std::errc() || ptr != value_text.data() + value_text.size())
      throw ValidationError("build parameter value '" + value_text +
                            "' is not an integer");
    if (out.count(key))
      throw ValidationError("build parameter '" + key + "' given twice");
    out[key] = value;
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

GroundTruth load_truth(const std::string& prefix, Metric metric, int min_k) {
  GroundTruth truth;
  truth.metric = metric;
  truth.indices = load_ivecs(prefix + ".ivecs");
  const VectorDataset scores = load_fvecs(prefix + ".fvecs");
  truth.scores = scores.rows;
  if (truth.indices.rows() != truth.scores.rows() ||
      truth.indices.cols() != truth.scores.cols())
    throw ValidationError(prefix + ": index and score files disagree in shape");
  if (truth.indices.rows() < 1 || truth.indices.cols() < 1)
    throw ValidationError(prefix + ": ground truth is empty");
  truth.k = static_cast<int>(truth.indices.cols());
  if (truth.k < min_k)
    throw ValidationError(prefix + ": ground truth width " +
                          std::to_string(truth.k) + " is narrower than K=" +
                          std::to_string(min_k));

  // The sidecar written by `groundtruth` pins the metric the files were
  // computed under; when present it must agree with the requested metric.
  const std::string meta_path = prefix + ".meta.json";
  if (fs::exists(meta_path)) {
    const nlohmann::json meta = read_json_file(meta_path);
    if (meta.contains("metric") &&
        meta.at("metric").get<std::string>() != metric_name(metric))
      throw ValidationError(prefix + ": ground truth was generated under " +
                            meta.at("metric").get<std::string>() +
                            ", not " + metric_name(metric));
  }
  return truth;
}

struct SynthArgs {
  SynthConfig config;
  std::string out_dir;
};

int do_synth(const SynthArgs& args) {
  const SynthData data = generate(args.config);
  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);
  write_fvecs((dir / "base.fvecs").string(), data.base.rows);
  write_labels((dir / "base_labels.txt").string(), data.base_labels);
  write_fvecs((dir / "queries.fvecs").string(), data.queries.rows);
  write_labels((dir / "query_labels.txt").string(), data.query_labels);
  std::cout << "wrote " << data.base.n() << " base vectors and "
            << data.queries.n() << " queries (d=" << data.base.d() << ", "
            << args.config.k_classes << " classes) to " << args.out_dir
            << "\n";
  return 0;
}

struct ProfileArgs {
  std::string data_path;
  std::string out_path;
  ProfileOptions options;
};

int do_profile(const ProfileArgs& args) {
  const VectorDataset data = load_fvecs(args.data_path);
  const MetaFeatureProfile p = profile(data, args.options);
  nlohmann::ordered_json j = profile_to_json(p);
  j["tool_version"] = kToolVersion;
  j["data_hash"] = content_hash(data);
  write_json_file(args.out_path, j);
  return 0;
}

struct SelectArgs {
  std::string profile_path;
  SelectionThresholds thresholds;
};

int do_select(const SelectArgs& args) {
  const MetaFeatureProfile p = profile_from_json(read_json_file(args.profile_path));
  const SelectionResult result = select(p, args.thresholds);
  std::cerr << selection_trace_text(result);
  std::cout << selection_to_json(result).dump(2) << '\n';
  return 0;
}

struct GroundtruthArgs {
  std::string data_path;
  std::string queries_path;
  int k = 0;
  std::string metric = "l2";
  bool self_exclude = false;
  std::string out_prefix;
};

int do_groundtruth(const GroundtruthArgs& args) {
  const VectorDataset data = load_fvecs(args.data_path);
  const QuerySet queries = load_fvecs(args.queries_path);
  const Metric metric = metric_from_name(args.metric);
  const GroundTruth truth =
      batch_ground_truth(data, queries, args.k, metric, args.self_exclude);
  write_ivecs(args.out_prefix + ".ivecs", truth.indices);
  write_fvecs(args.out_prefix + ".fvecs", truth.scores);
  nlohmann::ordered_json meta;
  meta["tool_version"] = kToolVersion;
  meta["kind"] = "groundtruth";
  meta["metric"] = metric_name(metric);
  meta["k"] = args.k;
  meta["self_exclude"] = args.self_exclude;
  meta["data_hash"] = content_hash(data);
  meta["query_hash"] = content_hash(queries);
  meta["truth_hash"] = content_hash(truth);
  write_json_file(args.out_prefix + ".meta.json", meta);
  return 0;
}

struct EvaluateArgs {
  std::string data_path;
  std::string queries_path;
  std::string truth_prefix;
  std::string labels_path;
  std::string query_labels_path;
  std::string hitsets_path;
  std::string index_kind = "ivf";
  std::string metric = "l2";
  int k = 10;
  std::string build_params;
  std::string search_params;
  std::string out_path;
  std::string csv_path;
  int timing_workers = 1;
};

int do_evaluate(const EvaluateArgs& args) {
  const VectorDataset data = load_fvecs(args.data_path);
  const QuerySet queries = load_fvecs(args.queries_path);

  SweepSpec sweep;
  sweep.kind = index_kind_from_name(args.index_kind);
  sweep.metric = metric_from_name(args.metric);
  sweep.k = args.k;
  sweep.build_params = parse_kv_list(args.build_params);
  sweep.search_params = parse_int_list(args.search_params, "search params");

  const GroundTruth truth = load_truth(args.truth_prefix, sweep.metric, sweep.k);

  LabelMap labels, query_labels;
  HitSetFile hitsets;
  TaskInputs task;
  if (!args.labels_path.empty()) {
    labels = load_labels(args.labels_path);
    task.labels = &labels;
  }
  if (!args.query_labels_path.empty()) {
    query_labels = load_labels(args.query_labels_path);
    task.query_labels = &query_labels;
  }
  if (!args.hitsets_path.empty()) {
    if (!task.labels)
      throw ValidationError(
          "--hitsets needs --labels too (matching score looks up retrieved "
          "items' labels)");
    hitsets = load_hitsets(args.hitsets_path);
    task.hitsets = &hitsets;
  }
  if (task.labels && !task.query_labels && !task.hitsets)
    throw ValidationError(
        "--labels without --query-labels computes no task metric; pass "
        "--query-labels (label recall, hit@K) or --hitsets (matching score)");

  EvalOptions options;
  options.timing_workers = args.timing_workers;
  const nlohmann::ordered_json report =
      run_evaluate(data, queries, truth, task, sweep, options);
  write_json_file(args.out_path, report);
  if (!args.csv_path.empty()) write_points_csv(args.csv_path, report.at("points"));
  return 0;
}

struct FunnelArgs {
  std::string data_path;
  std::string queries_path;
  std::string labels_path;
  std::string query_labels_path;
  FunnelOptions options;
  std::string out_path;
};

int do_funnel(const FunnelArgs& args) {
  const VectorDataset data = load_fvecs(args.data_path);
  const QuerySet queries = load_fvecs(args.queries_path);
  const LabelMap labels = load_labels(args.labels_path);
  const LabelMap query_labels = load_labels(args.query_labels_path);
  const nlohmann::ordered_json report =
      run_funnel(data, queries, labels, query_labels, args.options);
  write_json_file(args.out_path, report);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{
      "vector-dataset profiler, index-method selector and evaluation harness"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand(
      "synth", "generate a deterministic synthetic labeled workload");
  synth->add_option("--n", synth_args.config.n, "base vector count");
  synth->add_option("--d", synth_args.config.d, "dimension");
  synth->add_option("--classes", synth_args.config.k_classes, "class count");
  synth->add_option("--spread", synth_args.config.spread,
                    "intra-class noise scale");
  synth->add_option("--norm-log-sigma", synth_args.config.norm_log_sigma,
                    "log-normal sigma of per-vector norms");
  synth->add_option("--label-noise", synth_args.config.label_noise,
                    "probability a base label is resampled");
  synth->add_option("--queries", synth_args.config.query_count, "query count");
  synth->add_option("--seed", synth_args.config.seed, "PRNG seed");
  synth->add_option("--out-dir", synth_args.out_dir, "output directory")
      ->required();

  ProfileArgs profile_args;
  CLI::App* profile_cmd = app.add_subcommand(
      "profile", "compute the four dataset meta-features");
  profile_cmd->add_option("--data", profile_args.data_path, "dataset fvecs")
      ->required();
  profile_cmd->add_option("--k", profile_args.options.k,
                          "clusters for DBI (default round(sqrt(n)))");
  profile_cmd->add_option("--rc-anchors", profile_args.options.rc.anchor_count,
                          "RC anchor sample size");
  profile_cmd->add_option("--rc-mean-samples",
                          profile_args.options.rc.mean_sample_count,
                          "RC mean-distance sample size");
  std::string rc_distance = "l2";
  profile_cmd
      ->add_option("--rc-distance", rc_distance, "RC distance (l2 or cosine)")
      ->check(CLI::IsMember({"l2", "cosine"}));
  profile_cmd->add_option("--kmeans-iters",
                          profile_args.options.kmeans.max_iters,
                          "k-means iteration cap");
  profile_cmd->add_option("--kmeans-tol", profile_args.options.kmeans.tol,
                          "k-means convergence tolerance");
  profile_cmd->add_option("--seed", profile_args.options.seed, "PRNG seed");
  profile_cmd->add_option("--out", profile_args.out_path, "output JSON path")
      ->required();

  SelectArgs select_args;
  CLI::App* select_cmd = app.add_subcommand(
      "select", "run the two-layer decision tree over a profile");
  select_cmd->add_option("--profile", select_args.profile_path, "profile JSON")
      ->required();
  select_cmd->add_option("--cv-max", select_args.thresholds.cv_max,
                         "norm-variability gate");
  select_cmd->add_option("--ra-min", select_args.thresholds.ra_min_deg,
                         "angle gate in degrees");
  select_cmd->add_option("--rc-max", select_args.thresholds.rc_max,
                         "relative-contrast gate");

  GroundtruthArgs gt_args;
  CLI::App* gt = app.add_subcommand(
      "groundtruth", "write exact top-K indices and scores");
  gt->add_option("--data", gt_args.data_path, "dataset fvecs")->required();
  gt->add_option("--queries", gt_args.queries_path, "query fvecs")->required();
  gt->add_option("--k", gt_args.k, "neighbors per query")->required();
  gt->add_option("--metric", gt_args.metric, "similarity metric")
      ->check(CLI::IsMember({"l2", "ip"}))
      ->required();
  gt->add_flag("--self-exclude", gt_args.self_exclude,
               "query i excludes dataset row i");
  gt->add_option("--out-prefix", gt_args.out_prefix,
                 "output prefix (.ivecs/.fvecs/.meta.json)")
      ->required();

  EvaluateArgs eval_args;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "sweep an index against ground truth and task metrics");
  evaluate->add_option("--data", eval_args.data_path, "dataset fvecs")
      ->required();
  evaluate->add_option("--queries", eval_args.queries_path, "query fvecs")
      ->required();
  evaluate->add_option("--truth-prefix", eval_args.truth_prefix,
                       "ground truth prefix")
      ->required();
  evaluate->add_option("--labels", eval_args.labels_path, "dataset label file");
  evaluate->add_option("--query-labels", eval_args.query_labels_path,
                       "query label file");
  evaluate->add_option("--hitsets", eval_args.hitsets_path,
                       "per-query hit-set file");
  evaluate->add_option("--index", eval_args.index_kind, "index kind")
      ->check(CLI::IsMember({"ivf", "nsw", "flat"}))
      ->required();
  evaluate->add_option("--metric", eval_args.metric, "similarity metric")
      ->check(CLI::IsMember({"l2", "ip"}))
      ->required();
  evaluate->add_option("--k", eval_args.k, "neighbors per query")->required();
  evaluate->add_option("--build-params", eval_args.build_params,
                       "comma-separated key=value build parameters");
  evaluate
      ->add_option("--search-params", eval_args.search_params,
                   "comma-separated search parameter sweep")
      ->required();
  evaluate->add_option("--out", eval_args.out_path, "report JSON path")
      ->required();
  evaluate->add_option("--csv", eval_args.csv_path,
                       "also write the points as CSV");
  evaluate->add_option("--timing-workers", eval_args.timing_workers,
                       "timed query loop concurrency (default 1)");

  FunnelArgs funnel_args;
  int funnel_k = 10;
  CLI::App* funnel = app.add_subcommand(
      "funnel", "full three-layer information-loss report");
  funnel->add_option("--data", funnel_args.data_path, "dataset fvecs")
      ->required();
  funnel->add_option("--queries", funnel_args.queries_path, "query fvecs")
      ->required();
  funnel->add_option("--labels", funnel_args.labels_path, "dataset label file")
      ->required();
  funnel
      ->add_option("--query-labels", funnel_args.query_labels_path,
                   "query label file")
      ->required();
  funnel->add_option("--k", funnel_k, "neighbors per query")->required();
  funnel->add_option("--seed", funnel_args.options.seed,
                     "seed for the profiling stage");
  funnel->add_option("--out", funnel_args.out_path, "report JSON path")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) return do_synth(synth_args);
    if (*profile_cmd) {
      profile_args.options.rc.distance = metric_from_name(rc_distance);
      return do_profile(profile_args);
    }
    if (*select_cmd) return do_select(select_args);
    if (*gt) return do_groundtruth(gt_args);
    if (*evaluate) return do_evaluate(eval_args);
    if (*funnel) {
      funnel_args.options.k = funnel_k;
      return do_funnel(funnel_args);
    }
    std::cerr << "error: no subcommand selected\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace vssc
