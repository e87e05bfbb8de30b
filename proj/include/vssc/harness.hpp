#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vssc/selector.hpp"
#include "vssc/types.hpp"

namespace vssc {

inline constexpr const char* kToolVersion = "1.0.0";

// FNV-1a content hashes embedded in reports so a report pins its exact
// inputs. Hashes cover the logical content (dims + little-endian element
// bytes), not file framing, so library and CLI callers agree.
std::string content_hash(const VectorDataset& data);
std::string content_hash(const LabelMap& labels);
std::string content_hash(const GroundTruth& truth);
std::string content_hash(const HitSetFile& hitsets);

enum class IndexKind { Flat, Ivf, Nsw };

const char* index_kind_name(IndexKind kind);
IndexKind index_kind_from_name(std::string_view name);

// One evaluation sweep: an index configuration plus the search-parameter
// values (nprobe for ivf, ef for nsw; flat ignores the value but still
// reports one point per entry). The list must be non-empty and strictly
// increasing.
struct SweepSpec {
  IndexKind kind = IndexKind::Ivf;
  Metric metric = Metric::Euclidean;
  int k = 10;
  // ivf accepts nlist, seed; nsw accepts m, efc, seed; flat accepts nothing.
  // Missing entries fall back to defaults (nlist = 4*sqrt(n), m = 32,
  // efc = 256, seed = 0).
  std::map<std::string, std::int64_t> build_params;
  std::vector<int> search_params;
};

// Optional task-metric inputs. labels + query_labels enable label_recall and
// hit_at_k; hitsets (which also needs labels) enables matching_score.
struct TaskInputs {
  const LabelMap* labels = nullptr;
  const LabelMap* query_labels = nullptr;
  const HitSetFile* hitsets = nullptr;
};

struct EvalOptions {
  // Concurrency of the timed query loop; single-threaded by default so QPS
  // is comparable across runs. Recorded in the report's timing block.
  int timing_workers = 1;
  // Workers for untimed passes (builds, ground truth); 0 = worker_count().
  int workers = 0;
};

// Builds the index once, runs every search parameter over all queries, and
// returns the EvalReport JSON. Everything outside "timing" blocks is a pure
// function of the inputs; timing fields are excluded from determinism
// guarantees. Ground truth must share the sweep's metric and be at least K
// wide (wider truth is sliced to its first K columns, which prefix
// consistency makes exact).
nlohmann::ordered_json run_evaluate(const VectorDataset& data,
                                    const QuerySet& queries,
                                    const GroundTruth& truth,
                                    const TaskInputs& task,
                                    const SweepSpec& sweep,
                                    const EvalOptions& options = {});

// Writes the per-point curve of an EvalReport (or one funnel curve block) as
// CSV for external plotting.
void write_points_csv(const std::string& path, const nlohmann::json& points);

struct FunnelOptions {
  int k = 10;
  std::uint64_t seed = 42;
  SelectionThresholds thresholds;
  EvalOptions eval;
};

// Full information-loss funnel: profiles the dataset, runs the selector,
// then reports layer 1 (exhaustive task-metric ceiling under each metric),
// layer 2 (ceiling delta plus per-metric IVF synthetic-vs-task curves) and
// layer 3 (both index families under the selected metric). The report embeds
// the selection trace and a layer1-dominance check result.
nlohmann::ordered_json run_funnel(const VectorDataset& data,
                                  const QuerySet& queries,
                                  const LabelMap& labels,
                                  const LabelMap& query_labels,
                                  const FunnelOptions& options = {});

// Entire command-line surface; returns the process exit code (0 success,
// 2 validation error, 3 I/O error).
int run_cli(int argc, const char* const* argv);

}  // namespace vssc
