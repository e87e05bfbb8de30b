#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vssc/metafeatures.hpp"
#include "vssc/types.hpp"

namespace vssc {

// Two-layer explainable decision tree: layer one picks the similarity metric,
// layer two the index family. Comparisons are inclusive exactly as the rules
// read; all functions are pure.

struct SelectionThresholds {
  double cv_max = 0.1;
  double ra_min_deg = 60.0;
  double rc_max = 1.5;
};

enum class IndexFamily { Partition, Graph };

inline const char* family_name(IndexFamily f) {
  return f == IndexFamily::Partition ? "partition" : "graph";
}

// One evaluated rule: its text, the operand values it saw (bit-for-bit equal
// to the profile fields), and the outcome it produced.
struct RuleRecord {
  std::string rule;
  std::vector<std::pair<std::string, double>> operands;
  std::string outcome;
};

struct SelectionResult {
  Metric metric = Metric::Euclidean;
  IndexFamily family = IndexFamily::Graph;
  std::array<RuleRecord, 2> trace;
};

// InnerProduct iff dbi_e >= dbi_c and cv <= cv_max; Euclidean otherwise.
Metric select_metric(const MetaFeatureProfile& profile,
                     const SelectionThresholds& thresholds,
                     RuleRecord* record = nullptr);

// Partition iff ra_deg >= ra_min_deg or rc <= rc_max; Graph otherwise.
IndexFamily select_family(const MetaFeatureProfile& profile,
                          const SelectionThresholds& thresholds,
                          RuleRecord* record = nullptr);

SelectionResult select(const MetaFeatureProfile& profile,
                       const SelectionThresholds& thresholds = {});

nlohmann::ordered_json selection_to_json(const SelectionResult& result);

// Human-readable trace, one line per rule.
std::string selection_trace_text(const SelectionResult& result);

struct ThresholdBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Normal-quantile spread interval (mean - 1.96 s, mean + 1.96 s) with s the
// sample standard deviation (n-1 denominator). This is a spread interval over
// the group values, not a standard-error interval of the mean. Requires at
// least two values.
ThresholdBounds fit_threshold_bounds(const std::vector<double>& values);

}  // namespace vssc
