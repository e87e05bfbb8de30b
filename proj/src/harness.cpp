#include "vssc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "vssc/bytes.hpp"
#include "vssc/metafeatures.hpp"
#include "vssc/oracle.hpp"
#include "vssc/parallel.hpp"
#include "vssc/refindex.hpp"
#include "vssc/rng.hpp"
#include "vssc/taskmetrics.hpp"

namespace vssc {
namespace {

class Fnv1a {
 public:
  void feed(const unsigned char* data, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) {
      hash_ ^= data[i];
      hash_ *= 1099511628211ULL;
    }
  }
  void feed_i64(std::int64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i)
      buf[i] = static_cast<unsigned char>(static_cast<std::uint64_t>(v) >> (8 * i));
    feed(buf, 8);
  }
  void feed_f32(float v) {
    unsigned char buf[4];
    encode_f32(buf, v);
    feed(buf, 4);
  }
  void feed_f64(double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, sizeof u);
    feed_i64(static_cast<std::int64_t>(u));
  }
  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out = "fnv1a:";
    for (int i = 60; i >= 0; i -= 4) out += digits[(hash_ >> i) & 0xF];
    return out;
  }

 private:
  std::uint64_t hash_ = 1469598103934665603ULL;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<NeighborList> truth_to_lists(const GroundTruth& truth) {
  std::vector<NeighborList> lists(static_cast<std::size_t>(truth.query_count()));
  for (Eigen::Index q = 0; q < truth.query_count(); ++q) {
    NeighborList& list = lists[static_cast<std::size_t>(q)];
    list.resize(static_cast<std::size_t>(truth.k));
    for (int j = 0; j < truth.k; ++j)
      list[static_cast<std::size_t>(j)] =
          Neighbor{truth.indices(q, j), truth.scores(q, j)};
  }
  return lists;
}

GroundTruth slice_truth(const GroundTruth& truth, int k) {
  if (truth.k < k)
    throw ValidationError("ground truth width " + std::to_string(truth.k) +
                          " is narrower than K=" + std::to_string(k));
  if (truth.k == k) return truth;
  GroundTruth sliced;
  sliced.metric = truth.metric;
  sliced.k = k;
  sliced.indices = truth.indices.leftCols(k);
  sliced.scores = truth.scores.leftCols(k);
  return sliced;
}

std::int64_t build_param(const SweepSpec& sweep, const std::string& key,
                         std::int64_t fallback) {
  const auto it = sweep.build_params.find(key);
  return it == sweep.build_params.end() ? fallback : it->second;
}

void validate_sweep(const SweepSpec& sweep) {
  if (sweep.k < 1) throw ValidationError("sweep K must be >= 1");
  if (sweep.search_params.empty())
    throw ValidationError("search-parameter list must be non-empty");
  for (std::size_t i = 1; i < sweep.search_params.size(); ++i)
    if (sweep.search_params[i] <= sweep.search_params[i - 1])
      throw ValidationError("search-parameter list must be strictly increasing");
  static const std::map<IndexKind, std::vector<std::string>> allowed = {
      {IndexKind::Flat, {}},
      {IndexKind::Ivf, {"nlist", "seed"}},
      {IndexKind::Nsw, {"m", "efc", "seed"}},
  };
  for (const auto& [key, value] : sweep.build_params) {
    const auto& keys = allowed.at(sweep.kind);
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ValidationError("unknown build parameter '" + key + "' for " +
                            index_kind_name(sweep.kind));
    if (value < 0)
      throw ValidationError("build parameter '" + key + "' must be >= 0");
  }
}

// The three index kinds behind one search closure so the sweep loop is
// uniform. Build happens in the constructor.
struct AnyIndex {
  IndexKind kind;
  IvfIndex ivf;
  NswIndex nsw;
  nlohmann::ordered_json build_params_json = nlohmann::ordered_json::object();

  AnyIndex(const VectorDataset& data, const SweepSpec& sweep) : kind(sweep.kind) {
    switch (kind) {
      case IndexKind::Flat:
        break;
      case IndexKind::Ivf: {
        const auto nlist = build_param(sweep, "nlist", default_nlist(data.n()));
        const auto seed = build_param(sweep, "seed", 0);
        ivf = build_ivf(data, sweep.metric, static_cast<int>(nlist),
                        static_cast<std::uint64_t>(seed));
        build_params_json["nlist"] = nlist;
        build_params_json["seed"] = seed;
        break;
      }
      case IndexKind::Nsw: {
        const auto m = build_param(sweep, "m", kDefaultNswMaxDegree);
        const auto efc = build_param(sweep, "efc", kDefaultNswEfConstruction);
        const auto seed = build_param(sweep, "seed", 0);
        nsw = build_nsw(data, sweep.metric, static_cast<int>(m),
                        static_cast<int>(efc), static_cast<std::uint64_t>(seed));
        build_params_json["m"] = m;
        build_params_json["efc"] = efc;
        build_params_json["seed"] = seed;
        break;
      }
    }
  }

  NeighborList search(const VectorDataset& data,
                      const Eigen::Ref<const Eigen::RowVectorXf>& query, int k,
                      Metric metric, int param) const {
    switch (kind) {
      case IndexKind::Flat:
        return exact_topk(data, query, k, metric);
      case IndexKind::Ivf:
        return search_ivf(data, ivf, query, k, param);
      case IndexKind::Nsw:
        return search_nsw(data, nsw, query, k, param);
    }
    throw ValidationError("unknown index kind");
  }
};

}  // namespace

std::string content_hash(const VectorDataset& data) {
  Fnv1a h;
  h.feed_i64(data.n());
  h.feed_i64(data.d());
  for (Eigen::Index i = 0; i < data.n(); ++i)
    for (Eigen::Index j = 0; j < data.d(); ++j) h.feed_f32(data.rows(i, j));
  return h.hex();
}

std::string content_hash(const LabelMap& labels) {
  Fnv1a h;
  h.feed_i64(static_cast<std::int64_t>(labels.size()));
  for (const std::int64_t l : labels.labels) h.feed_i64(l);
  return h.hex();
}

std::string content_hash(const GroundTruth& truth) {
  Fnv1a h;
  h.feed_i64(static_cast<std::int64_t>(truth.metric));
  h.feed_i64(truth.k);
  h.feed_i64(truth.query_count());
  for (Eigen::Index q = 0; q < truth.query_count(); ++q)
    for (int j = 0; j < truth.k; ++j) {
      h.feed_i64(truth.indices(q, j));
      h.feed_f32(truth.scores(q, j));
    }
  return h.hex();
}

std::string content_hash(const HitSetFile& hitsets) {
  Fnv1a h;
  h.feed_i64(static_cast<std::int64_t>(hitsets.hit_sets.size()));
  for (const auto& set : hitsets.hit_sets) {
    std::vector<std::int64_t> sorted(set.begin(), set.end());
    std::sort(sorted.begin(), sorted.end());
    h.feed_i64(static_cast<std::int64_t>(sorted.size()));
    for (const std::int64_t label : sorted) {
      h.feed_i64(label);
      h.feed_f64(hitsets.popularity.weight.at(label));
    }
  }
  return h.hex();
}

const char* index_kind_name(IndexKind kind) {
  switch (kind) {
    case IndexKind::Flat: return "flat";
    case IndexKind::Ivf: return "ivf";
    case IndexKind::Nsw: return "nsw";
  }
  throw ValidationError("unknown index kind");
}

IndexKind index_kind_from_name(std::string_view name) {
  if (name == "flat") return IndexKind::Flat;
  if (name == "ivf") return IndexKind::Ivf;
  if (name == "nsw") return IndexKind::Nsw;
  throw ValidationError("unknown index kind: " + std::string(name) +
                        " (expected ivf, nsw, or flat)");
}

namespace {

// Core sweep: one point per search parameter, with metrics computed from the
// timed pass's results (results are deterministic, so reuse is safe).
nlohmann::ordered_json sweep_points(const VectorDataset& data,
                                    const QuerySet& queries,
                                    const GroundTruth& truth,
                                    const TaskInputs& task,
                                    const SweepSpec& sweep,
                                    const AnyIndex& index,
                                    const EvalOptions& options) {
  const Eigen::Index m = queries.n();
  const int k = sweep.k;
  const int timing_workers = std::max(1, options.timing_workers);

  nlohmann::ordered_json points = nlohmann::ordered_json::array();
  std::vector<NeighborList> results(static_cast<std::size_t>(m));
  for (const int param : sweep.search_params) {
    const auto start = Clock::now();
    parallel_for(0, m, timing_workers, [&](std::int64_t q) {
      results[static_cast<std::size_t>(q)] =
          index.search(data, queries.row(q), k, sweep.metric, param);
    });
    const double elapsed = seconds_since(start);

    std::int64_t short_queries = 0;
    for (const NeighborList& list : results)
      if (static_cast<int>(list.size()) < k) ++short_queries;

    nlohmann::ordered_json point;
    point["search_param"] = param;
    point["synthetic_recall"] = synthetic_recall(results, truth, k);
    if (task.labels && task.query_labels) {
      point["label_recall"] =
          label_recall(results, *task.labels, task.query_labels->labels, k);
      point["hit_at_k"] =
          hit_at_k(results, *task.labels, task.query_labels->labels, k);
    }
    if (task.hitsets) {
      if (!task.labels)
        throw ValidationError(
            "matching score needs dataset labels alongside hit sets");
      const MatchingScore ms = matching_score(
          results, *task.labels, task.hitsets->hit_sets, task.hitsets->popularity, k);
      point["matching_score_total"] = ms.total;
      point["matching_score_per_query_mean"] = ms.per_query_mean;
    }
    point["short_result_queries"] = short_queries;
    point["timing"] = {{"mean_query_latency_s", elapsed / static_cast<double>(m)},
                       {"qps", static_cast<double>(m) / elapsed}};
    points.push_back(std::move(point));
  }
  return points;
}

void validate_task(const VectorDataset& data, const QuerySet& queries,
                   const TaskInputs& task) {
  if (task.labels) task.labels->check_aligned_with(data.n(), "dataset labels");
  if (task.query_labels)
    task.query_labels->check_aligned_with(queries.n(), "query labels");
  if (task.hitsets &&
      static_cast<Eigen::Index>(task.hitsets->hit_sets.size()) != queries.n())
    throw ValidationError("hit-set line count " +
                          std::to_string(task.hitsets->hit_sets.size()) +
                          " does not match query count " +
                          std::to_string(queries.n()));
}

}  // namespace

nlohmann::ordered_json run_evaluate(const VectorDataset& data,
                                    const QuerySet& queries,
                                    const GroundTruth& truth,
                                    const TaskInputs& task,
                                    const SweepSpec& sweep,
                                    const EvalOptions& options) {
  check_same_dim(data, queries);
  validate_sweep(sweep);
  validate_task(data, queries, task);
  if (truth.metric != sweep.metric)
    throw ValidationError(std::string("ground truth metric ") +
                          metric_name(truth.metric) +
                          " does not match sweep metric " +
                          metric_name(sweep.metric));
  if (truth.query_count() != queries.n())
    throw ValidationError("ground truth covers " +
                          std::to_string(truth.query_count()) +
                          " queries, expected " + std::to_string(queries.n()));
  const GroundTruth sliced = slice_truth(truth, sweep.k);

  const auto build_start = Clock::now();
  const AnyIndex index(data, sweep);
  const double build_seconds = seconds_since(build_start);

  nlohmann::ordered_json report;
  report["tool_version"] = kToolVersion;
  report["kind"] = "evaluate";
  report["inputs"] = {{"data_hash", content_hash(data)},
                      {"query_hash", content_hash(queries)},
                      {"truth_hash", content_hash(sliced)}};
  if (task.labels) report["inputs"]["labels_hash"] = content_hash(*task.labels);
  if (task.query_labels)
    report["inputs"]["query_labels_hash"] = content_hash(*task.query_labels);
  if (task.hitsets)
    report["inputs"]["hitsets_hash"] = content_hash(*task.hitsets);
  report["index"] = {{"kind", index_kind_name(sweep.kind)},
                     {"metric", metric_name(sweep.metric)},
                     {"k", sweep.k},
                     {"build_params", index.build_params_json}};
  report["points"] = sweep_points(data, queries, sliced, task, sweep, index, options);
  report["timing"] = {{"timing_workers", std::max(1, options.timing_workers)},
                      {"build_seconds", build_seconds}};
  return report;
}

void write_points_csv(const std::string& path, const nlohmann::json& points) {
  static const std::vector<std::string> columns = {
      "search_param",      "synthetic_recall",
      "label_recall",      "hit_at_k",
      "matching_score_total", "matching_score_per_query_mean",
      "short_result_queries"};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "search_param,synthetic_recall,label_recall,hit_at_k,"
         "matching_score_total,matching_score_per_query_mean,"
         "short_result_queries,mean_query_latency_s,qps\n";
  for (const auto& point : points) {
    bool first = true;
    for (const std::string& col : columns) {
      if (!first) out << ',';
      first = false;
      if (point.contains(col)) out << point.at(col).dump();
    }
    out << ',' << point.at("timing").at("mean_query_latency_s").dump() << ','
        << point.at("timing").at("qps").dump() << '\n';
  }
  if (!out.flush()) throw IoError("failed writing " + path);
}

nlohmann::ordered_json run_funnel(const VectorDataset& data,
                                  const QuerySet& queries,
                                  const LabelMap& labels,
                                  const LabelMap& query_labels,
                                  const FunnelOptions& options) {
  check_same_dim(data, queries);
  const int k = options.k;
  if (k < 1 || k > data.n())
    throw ValidationError("funnel K out of range");
  labels.check_aligned_with(data.n(), "dataset labels");
  query_labels.check_aligned_with(queries.n(), "query labels");
  const int workers =
      options.eval.workers > 0 ? options.eval.workers : worker_count();

  TaskInputs task;
  task.labels = &labels;
  task.query_labels = &query_labels;

  ProfileOptions profile_options;
  profile_options.seed = options.seed;
  profile_options.workers = workers;
  const MetaFeatureProfile prof = profile(data, profile_options);
  const SelectionResult selection = select(prof, options.thresholds);

  const GroundTruth truth_l2 =
      batch_ground_truth(data, queries, k, Metric::Euclidean, false, workers);
  const GroundTruth truth_ip =
      batch_ground_truth(data, queries, k, Metric::InnerProduct, false, workers);

  // Layer 1: the exhaustive ceiling per metric is the task metric of the
  // ground truth lists themselves.
  const auto lists_l2 = truth_to_lists(truth_l2);
  const auto lists_ip = truth_to_lists(truth_ip);
  const double ceiling_l2 = label_recall(lists_l2, labels, query_labels.labels, k);
  const double ceiling_ip = label_recall(lists_ip, labels, query_labels.labels, k);
  const double hit_l2 = hit_at_k(lists_l2, labels, query_labels.labels, k);
  const double hit_ip = hit_at_k(lists_ip, labels, query_labels.labels, k);

  // Layer 2 curves: IVF under each metric, nprobe doubling up to nlist.
  const int nlist = default_nlist(data.n());
  std::vector<int> nprobe_sweep;
  for (int p = 1; p < nlist; p *= 2) nprobe_sweep.push_back(p);
  nprobe_sweep.push_back(nlist);

  auto ivf_sweep = [&](Metric metric) {
    SweepSpec sweep;
    sweep.kind = IndexKind::Ivf;
    sweep.metric = metric;
    sweep.k = k;
    sweep.build_params["seed"] =
        static_cast<std::int64_t>(derive_seed(options.seed, 10));
    sweep.search_params = nprobe_sweep;
    return sweep;
  };

  const GroundTruth& selected_truth =
      selection.metric == Metric::Euclidean ? truth_l2 : truth_ip;

  nlohmann::ordered_json report;
  report["tool_version"] = kToolVersion;
  report["kind"] = "funnel";
  report["inputs"] = {{"data_hash", content_hash(data)},
                      {"query_hash", content_hash(queries)},
                      {"labels_hash", content_hash(labels)},
                      {"query_labels_hash", content_hash(query_labels)},
                      {"k", k},
                      {"seed", options.seed}};
  report["profile"] = profile_to_json(prof);
  report["selection"] = selection_to_json(selection);
  report["layer1"] = {
      {"l2", {{"label_recall", ceiling_l2}, {"hit_at_k", hit_l2}}},
      {"ip", {{"label_recall", ceiling_ip}, {"hit_at_k", hit_ip}}}};
  report["layer2"]["ceiling_delta_l2_minus_ip"] = ceiling_l2 - ceiling_ip;

  double max_layer3_label_recall = 0.0;
  {
    const AnyIndex ivf_l2_index(data, ivf_sweep(Metric::Euclidean));
    const AnyIndex ivf_ip_index(data, ivf_sweep(Metric::InnerProduct));
    report["layer2"]["curves"] = {
        {"l2", sweep_points(data, queries, truth_l2, task,
                            ivf_sweep(Metric::Euclidean), ivf_l2_index,
                            options.eval)},
        {"ip", sweep_points(data, queries, truth_ip, task,
                            ivf_sweep(Metric::InnerProduct), ivf_ip_index,
                            options.eval)}};
  }

  // Layer 3: both families under the selected metric.
  report["layer3"]["selected_metric"] = metric_name(selection.metric);
  report["layer3"]["selected_family"] = family_name(selection.family);
  {
    SweepSpec ivf = ivf_sweep(selection.metric);
    const AnyIndex ivf_index(data, ivf);
    report["layer3"]["ivf"] = {
        {"build_params", ivf_index.build_params_json},
        {"points", sweep_points(data, queries, selected_truth, task, ivf,
                                ivf_index, options.eval)}};

    SweepSpec nsw;
    nsw.kind = IndexKind::Nsw;
    nsw.metric = selection.metric;
    nsw.k = k;
    nsw.build_params["seed"] =
        static_cast<std::int64_t>(derive_seed(options.seed, 11));
    for (int ef = k; ef < 8 * k && ef < data.n(); ef *= 2)
      nsw.search_params.push_back(ef);
    if (nsw.search_params.empty() ||
        nsw.search_params.back() < static_cast<int>(data.n()))
      nsw.search_params.push_back(static_cast<int>(data.n()));
    const AnyIndex nsw_index(data, nsw);
    report["layer3"]["nsw"] = {
        {"build_params", nsw_index.build_params_json},
        {"points", sweep_points(data, queries, selected_truth, task, nsw,
                                nsw_index, options.eval)}};

    for (const char* family : {"ivf", "nsw"})
      for (const auto& point : report["layer3"][family]["points"])
        max_layer3_label_recall = std::max(
            max_layer3_label_recall, point.at("label_recall").get<double>());
  }

  const double selected_ceiling =
      selection.metric == Metric::Euclidean ? ceiling_l2 : ceiling_ip;
  report["layer1_dominance_holds"] =
      selected_ceiling >= max_layer3_label_recall;
  return report;
}

}  // namespace vssc
