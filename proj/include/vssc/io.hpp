#pragma once

#include <string>

#include "vssc/types.hpp"

namespace vssc {

// Binary vector interchange (fvecs/ivecs). Record format, per vector: one
// little-endian signed 32-bit integer d, then d little-endian 32-bit payload
// scalars (float for fvecs, int for ivecs). All records must share d.
// Round-trips are byte-identical.
//
// Content errors (inconsistent d, d <= 0, truncated record, non-finite float)
// raise ValidationError; unreadable or unwritable paths raise IoError.

VectorDataset load_fvecs(const std::string& path);
void write_fvecs(const std::string& path, const Eigen::Ref<const RowMatrixXf>& m);

// Empty ivecs files load as a 0x0 matrix; every other malformation is an
// error exactly as for fvecs.
RowMatrixXi load_ivecs(const std::string& path);
void write_ivecs(const std::string& path, const Eigen::Ref<const RowMatrixXi>& m);

// Label text format: one non-negative base-10 integer per line, line i being
// the label of row i. Alignment with a dataset is checked where the map is
// attached, not at load time.
LabelMap load_labels(const std::string& path);
void write_labels(const std::string& path, const LabelMap& labels);

// Hit-set text format: line q is a comma-separated list of label:popularity
// pairs (possibly empty). Popularity values must be non-negative and
// consistent wherever a label repeats, across all lines.
HitSetFile load_hitsets(const std::string& path);

}  // namespace vssc
