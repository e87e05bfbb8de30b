#include "vssc/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "vssc/bytes.hpp"

namespace vssc {
namespace {

std::vector<unsigned char> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<unsigned char> bytes(static_cast<std::size_t>(size));
  if (size > 0) {
    in.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!in) throw IoError("failed reading " + path);
  }
  return bytes;
}

// Shared record-stream parser for fvecs/ivecs. Calls emit(record_payload)
// once per record after validating the dimension header.
template <typename Emit>
Eigen::Index parse_vecs(const std::vector<unsigned char>& bytes,
                        const std::string& path, Eigen::Index& d_out,
                        const Emit& emit) {
  std::size_t pos = 0;
  Eigen::Index d = -1;
  Eigen::Index n = 0;
  while (pos < bytes.size()) {
    if (bytes.size() - pos < 4)
      throw ValidationError(path + ": truncated record header");
    const std::int32_t rec_d = decode_i32(bytes.data() + pos);
    pos += 4;
    if (rec_d <= 0)
      throw ValidationError(path + ": record dimension " +
                            std::to_string(rec_d) + " is not positive");
    if (d < 0) d = rec_d;
    if (rec_d != d)
      throw ValidationError(path + ": inconsistent dimension (" +
                            std::to_string(rec_d) + " after " +
                            std::to_string(d) + ")");
    const std::size_t payload = static_cast<std::size_t>(d) * 4;
    if (bytes.size() - pos < payload)
      throw ValidationError(path + ": truncated record payload");
    emit(bytes.data() + pos, n);
    pos += payload;
    ++n;
  }
  d_out = d;
  return n;
}

void open_out(std::ofstream& out, const std::string& path) {
  out.open(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::int64_t parse_label(std::string_view token, const std::string& path,
                         std::size_t line_no) {
  const std::string_view t = trim(token);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw ValidationError(path + ":" + std::to_string(line_no + 1) +
                          ": not an integer label: '" + std::string(t) + "'");
  if (value < 0)
    throw ValidationError(path + ":" + std::to_string(line_no + 1) +
                          ": labels must be non-negative");
  return value;
}

}  // namespace

VectorDataset load_fvecs(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.empty())
    throw ValidationError(path + ": fvecs file contains no records");

  // First pass just counts and validates shape so the matrix can be sized
  // once; second emit fills rows in place.
  Eigen::Index d = -1;
  std::vector<const unsigned char*> records;
  parse_vecs(bytes, path, d, [&](const unsigned char* p, Eigen::Index) {
    records.push_back(p);
  });
  RowMatrixXf m(static_cast<Eigen::Index>(records.size()), d);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const unsigned char* p = records[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < d; ++j) {
      const float v = decode_f32(p + 4 * j);
      if (!std::isfinite(v))
        throw ValidationError(path + ": non-finite value in record " +
                              std::to_string(i));
      m(i, j) = v;
    }
  }
  return make_dataset(std::move(m));
}

void write_fvecs(const std::string& path, const Eigen::Ref<const RowMatrixXf>& m) {
  std::ofstream out;
  open_out(out, path);
  const Eigen::Index d = m.cols();
  std::vector<unsigned char> rec(4 + static_cast<std::size_t>(d) * 4);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    encode_i32(rec.data(), static_cast<std::int32_t>(d));
    for (Eigen::Index j = 0; j < d; ++j)
      encode_f32(rec.data() + 4 + 4 * j, m(i, j));
    out.write(reinterpret_cast<const char*>(rec.data()),
              static_cast<std::streamsize>(rec.size()));
  }
  if (!out.flush()) throw IoError("failed writing " + path);
}

RowMatrixXi load_ivecs(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.empty()) return RowMatrixXi(0, 0);

  Eigen::Index d = -1;
  std::vector<const unsigned char*> records;
  parse_vecs(bytes, path, d, [&](const unsigned char* p, Eigen::Index) {
    records.push_back(p);
  });
  RowMatrixXi m(static_cast<Eigen::Index>(records.size()), d);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const unsigned char* p = records[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = decode_i32(p + 4 * j);
  }
  return m;
}

void write_ivecs(const std::string& path, const Eigen::Ref<const RowMatrixXi>& m) {
  std::ofstream out;
  open_out(out, path);
  const Eigen::Index d = m.cols();
  std::vector<unsigned char> rec(4 + static_cast<std::size_t>(d) * 4);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    encode_i32(rec.data(), static_cast<std::int32_t>(d));
    for (Eigen::Index j = 0; j < d; ++j)
      encode_i32(rec.data() + 4 + 4 * j, m(i, j));
    out.write(reinterpret_cast<const char*>(rec.data()),
              static_cast<std::streamsize>(rec.size()));
  }
  if (!out.flush()) throw IoError("failed writing " + path);
}

LabelMap load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path + " for reading");
  LabelMap map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    map.labels.push_back(parse_label(line, path, line_no));
    ++line_no;
  }
  return map;
}

void write_labels(const std::string& path, const LabelMap& labels) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const std::int64_t l : labels.labels) out << l << '\n';
  if (!out.flush()) throw IoError("failed writing " + path);
}

HitSetFile load_hitsets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path + " for reading");
  HitSetFile file;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    std::unordered_set<std::int64_t> hits;
    std::string_view rest = trim(line);
    while (!rest.empty()) {
      const std::size_t comma = rest.find(',');
      const std::string_view pair =
          trim(comma == std::string_view::npos ? rest : rest.substr(0, comma));
      rest = comma == std::string_view::npos ? std::string_view{}
                                             : rest.substr(comma + 1);
      if (pair.empty())
        throw ValidationError(path + ":" + std::to_string(line_no + 1) +
                              ": empty label:popularity pair");
      const std::size_t colon = pair.find(':');
      if (colon == std::string_view::npos)
        throw ValidationError(path + ":" + std::to_string(line_no + 1) +
                              ": malformed pair '" + std::string(pair) +
                              "' (expected label:popularity)");
      const std::int64_t label =
          parse_label(pair.substr(0, colon), path, line_no);
      const std::string pop_text(trim(pair.substr(colon + 1)));
      char* end = nullptr;
      const double pop = std::strtod(pop_text.c_str(), &end);
      if (end != pop_text.c_str() + pop_text.size() || pop_text.empty() ||
          !std::isfinite(pop))
        throw ValidationError(path + ":" + std::to_string(line_no + 1) +
                              ": malformed popularity '" + pop_text + "'");
      if (pop < 0.0)
        throw ValidationError(path + ":" + std::to_string(line_no + 1) +
                              ": negative popularity for label " +
                              std::to_string(label));
      const auto [it, inserted] = file.popularity.weight.emplace(label, pop);
      if (!inserted && it->second != pop)
        throw ValidationError(path + ":" + std::to_string(line_no + 1) +
                              ": conflicting popularity for label " +
                              std::to_string(label));
      hits.insert(label);
    }
    file.hit_sets.push_back(std::move(hits));
    ++line_no;
  }
  return file;
}

}  // namespace vssc
