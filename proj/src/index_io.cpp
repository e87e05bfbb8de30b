#include <fstream>

#include "vssc/bytes.hpp"
#include "vssc/refindex.hpp"

namespace vssc {
namespace {

constexpr char kMagic[8] = {'V', 'S', 'S', 'C', 'I', 'D', 'X', '1'};
constexpr std::int32_t kKindIvf = 1;
constexpr std::int32_t kKindNsw = 2;

std::ofstream open_save(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(kMagic, sizeof kMagic);
  return out;
}

std::ifstream open_load(const std::string& path, std::int32_t want_kind,
                        const char* want_name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw ValidationError(path + ": not an index container (bad magic)");
  const std::int32_t kind = get_i32(in, "index kind tag");
  if (kind != want_kind)
    throw ValidationError(path + ": container holds index kind " +
                          std::to_string(kind) + ", expected " + want_name);
  return in;
}

Metric metric_from_tag(std::int32_t tag, const std::string& path) {
  if (tag < 0 || tag > 2)
    throw ValidationError(path + ": unknown metric tag " + std::to_string(tag));
  return static_cast<Metric>(tag);
}

std::int32_t checked_positive(std::int32_t v, const char* what,
                              const std::string& path) {
  if (v <= 0)
    throw ValidationError(path + ": " + what + " must be positive, got " +
                          std::to_string(v));
  return v;
}

}  // namespace

void save_index(const std::string& path, const IvfIndex& index) {
  std::ofstream out = open_save(path);
  put_i32(out, kKindIvf);
  put_i32(out, static_cast<std::int32_t>(index.metric));
  put_u64(out, index.seed);
  put_i32(out, static_cast<std::int32_t>(index.n));
  put_i32(out, static_cast<std::int32_t>(index.centroids.cols()));
  put_i32(out, index.nlist());
  for (Eigen::Index c = 0; c < index.centroids.rows(); ++c)
    for (Eigen::Index j = 0; j < index.centroids.cols(); ++j)
      put_f32(out, index.centroids(c, j));
  for (const auto& cell : index.cells) {
    put_i32(out, static_cast<std::int32_t>(cell.size()));
    for (const std::int32_t row : cell) put_i32(out, row);
  }
  if (!out.flush()) throw IoError("failed writing " + path);
}

IvfIndex load_ivf_index(const std::string& path) {
  std::ifstream in = open_load(path, kKindIvf, "ivf");
  IvfIndex index;
  index.metric = metric_from_tag(get_i32(in, "metric"), path);
  index.seed = get_u64(in, "seed");
  index.n = checked_positive(get_i32(in, "row count"), "row count", path);
  const std::int32_t d = checked_positive(get_i32(in, "dimension"), "dimension", path);
  const std::int32_t nlist = checked_positive(get_i32(in, "nlist"), "nlist", path);
  index.centroids.resize(nlist, d);
  for (Eigen::Index c = 0; c < nlist; ++c)
    for (Eigen::Index j = 0; j < d; ++j)
      index.centroids(c, j) = get_f32(in, "centroid");
  index.cells.resize(static_cast<std::size_t>(nlist));
  std::vector<char> seen(static_cast<std::size_t>(index.n), 0);
  for (auto& cell : index.cells) {
    const std::int32_t len = get_i32(in, "cell length");
    if (len < 0) throw ValidationError(path + ": negative cell length");
    cell.resize(static_cast<std::size_t>(len));
    for (std::int32_t& row : cell) {
      row = get_i32(in, "posting entry");
      if (row < 0 || row >= index.n)
        throw ValidationError(path + ": posting entry " + std::to_string(row) +
                              " out of range");
      if (seen[static_cast<std::size_t>(row)])
        throw ValidationError(path + ": row " + std::to_string(row) +
                              " appears in two cells");
      seen[static_cast<std::size_t>(row)] = 1;
    }
  }
  for (Eigen::Index i = 0; i < index.n; ++i)
    if (!seen[static_cast<std::size_t>(i)])
      throw ValidationError(path + ": row " + std::to_string(i) +
                            " missing from all cells");
  return index;
}

void save_index(const std::string& path, const NswIndex& index) {
  std::ofstream out = open_save(path);
  put_i32(out, kKindNsw);
  put_i32(out, static_cast<std::int32_t>(index.metric));
  put_u64(out, index.seed);
  put_i32(out, static_cast<std::int32_t>(index.node_count()));
  put_i32(out, index.max_degree);
  put_i32(out, index.ef_construction);
  put_i32(out, index.entry);
  for (const auto& edges : index.adjacency) {
    put_i32(out, static_cast<std::int32_t>(edges.size()));
    for (const std::int32_t e : edges) put_i32(out, e);
  }
  if (!out.flush()) throw IoError("failed writing " + path);
}

NswIndex load_nsw_index(const std::string& path) {
  std::ifstream in = open_load(path, kKindNsw, "nsw");
  NswIndex index;
  index.metric = metric_from_tag(get_i32(in, "metric"), path);
  index.seed = get_u64(in, "seed");
  const std::int32_t n = checked_positive(get_i32(in, "node count"), "node count", path);
  index.max_degree = checked_positive(get_i32(in, "max degree"), "max degree", path);
  index.ef_construction =
      checked_positive(get_i32(in, "ef_construction"), "ef_construction", path);
  index.entry = get_i32(in, "entry node");
  if (index.entry < 0 || index.entry >= n)
    throw ValidationError(path + ": entry node out of range");
  index.adjacency.resize(static_cast<std::size_t>(n));
  for (auto& edges : index.adjacency) {
    const std::int32_t deg = get_i32(in, "degree");
    if (deg < 0 || deg > index.max_degree)
      throw ValidationError(path + ": node degree " + std::to_string(deg) +
                            " violates the max-degree cap");
    edges.resize(static_cast<std::size_t>(deg));
    for (std::int32_t& e : edges) {
      e = get_i32(in, "edge");
      if (e < 0 || e >= n)
        throw ValidationError(path + ": edge target " + std::to_string(e) +
                              " out of range");
    }
  }
  return index;
}

}  // namespace vssc
