#include "vssc/selector.hpp"

#include <cmath>
#include <sstream>

namespace vssc {

Metric select_metric(const MetaFeatureProfile& profile,
                     const SelectionThresholds& thresholds,
                     RuleRecord* record) {
  const bool clusters_hold_under_cosine = profile.dbi_e >= profile.dbi_c;
  const bool norms_stable = profile.cv <= thresholds.cv_max;
  const Metric choice = clusters_hold_under_cosine && norms_stable
                            ? Metric::InnerProduct
                            : Metric::Euclidean;
  if (record) {
    record->rule = "metric = InnerProduct if dbi_e >= dbi_c and cv <= cv_max";
    record->operands = {{"dbi_e", profile.dbi_e},
                        {"dbi_c", profile.dbi_c},
                        {"cv", profile.cv},
                        {"cv_max", thresholds.cv_max}};
    record->outcome = metric_name(choice);
  }
  return choice;
}

IndexFamily select_family(const MetaFeatureProfile& profile,
                          const SelectionThresholds& thresholds,
                          RuleRecord* record) {
  const bool wide_angles = profile.ra_deg >= thresholds.ra_min_deg;
  const bool low_contrast = profile.rc <= thresholds.rc_max;
  const IndexFamily choice = wide_angles || low_contrast
                                 ? IndexFamily::Partition
                                 : IndexFamily::Graph;
  if (record) {
    record->rule = "family = Partition if ra_deg >= ra_min_deg or rc <= rc_max";
    record->operands = {{"ra_deg", profile.ra_deg},
                        {"ra_min_deg", thresholds.ra_min_deg},
                        {"rc", profile.rc},
                        {"rc_max", thresholds.rc_max}};
    record->outcome = family_name(choice);
  }
  return choice;
}

SelectionResult select(const MetaFeatureProfile& profile,
                       const SelectionThresholds& thresholds) {
  SelectionResult result;
  result.metric = select_metric(profile, thresholds, &result.trace[0]);
  result.family = select_family(profile, thresholds, &result.trace[1]);
  return result;
}

nlohmann::ordered_json selection_to_json(const SelectionResult& result) {
  nlohmann::ordered_json j;
  j["metric"] = metric_name(result.metric);
  j["family"] = family_name(result.family);
  j["trace"] = nlohmann::ordered_json::array();
  for (const RuleRecord& record : result.trace) {
    nlohmann::ordered_json operands;
    for (const auto& [name, value] : record.operands) operands[name] = value;
    j["trace"].push_back({{"rule", record.rule},
                          {"operands", operands},
                          {"outcome", record.outcome}});
  }
  return j;
}

std::string selection_trace_text(const SelectionResult& result) {
  std::ostringstream out;
  for (const RuleRecord& record : result.trace) {
    out << record.rule << "  [";
    bool first = true;
    for (const auto& [name, value] : record.operands) {
      if (!first) out << ", ";
      first = false;
      out << name << "=" << value;
    }
    out << "] -> " << record.outcome << "\n";
  }
  return out.str();
}

ThresholdBounds fit_threshold_bounds(const std::vector<double>& values) {
  if (values.size() < 2)
    throw ValidationError("threshold bound fitting needs at least 2 values");
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  const double s = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return ThresholdBounds{mean - 1.96 * s, mean + 1.96 * s};
}

}  // namespace vssc
