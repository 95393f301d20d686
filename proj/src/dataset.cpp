#include "subnewton/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

#include "subnewton/error.hpp"
#include "subnewton/rng.hpp"

namespace subnewton {

void SparseDataset::add_row(std::span<const Index> idx, std::span<const double> val, double label) {
  if (idx.size() != val.size()) throw ConfigError("row index/value length mismatch");
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0) throw ConfigError("negative feature index");
    if (k > 0 && idx[k] <= idx[k - 1]) throw DataError("row indices not strictly increasing");
    d_ = std::max(d_, static_cast<std::size_t>(idx[k]) + 1);
  }
  col_.insert(col_.end(), idx.begin(), idx.end());
  val_.insert(val_.end(), val.begin(), val.end());
  row_ptr_.push_back(static_cast<std::int64_t>(col_.size()));
  labels_.push_back(label);
}

void SparseDataset::set_dim(std::size_t d) { d_ = std::max(d_, d); }

double SparseDataset::row_squared_norm(std::size_t i) const {
  const RowView r = row(i);
  double s = 0.0;
  for (double v : r.val) s += v * v;
  return s;
}

double SparseDataset::max_row_squared_norm() const {
  double m = 0.0;
  for (std::size_t i = 0; i < n(); ++i) m = std::max(m, row_squared_norm(i));
  return m;
}

void SparseDataset::require_binary_labels() const {
  for (std::size_t i = 0; i < n(); ++i) {
    if (labels_[i] != 1.0 && labels_[i] != -1.0)
      throw DataError("label at row " + std::to_string(i + 1) + " is not -1/+1");
  }
}

void SparseDataset::require_nonempty() const {
  if (n() == 0) throw ConfigError("dataset has no rows");
}

SparseDataset SparseDataset::with_bias() const {
  SparseDataset out;
  const auto bias = static_cast<Index>(d_);
  std::vector<Index> idx;
  std::vector<double> val;
  for (std::size_t i = 0; i < n(); ++i) {
    const RowView r = row(i);
    idx.assign(r.idx.begin(), r.idx.end());
    val.assign(r.val.begin(), r.val.end());
    idx.push_back(bias);
    val.push_back(1.0);
    out.add_row(idx, val, labels_[i]);
  }
  out.set_dim(d_ + 1);
  return out;
}

namespace {

bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  if (tok.empty()) return false;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size() && std::isfinite(out);
}

bool parse_index(std::string_view tok, long long& out) {
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

[[noreturn]] void fail(const std::string& what, std::size_t line) {
  throw DataError(what + " at line " + std::to_string(line));
}

void parse_line(std::string_view line, std::size_t lineno, SparseDataset& out,
                std::vector<Index>& idx, std::vector<double>& val) {
  idx.clear();
  val.clear();
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string_view {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    return line.substr(start, pos - start);
  };

  const std::string_view label_tok = next_token();
  double label = 0.0;
  if (!parse_double(label_tok, label)) fail("malformed label '" + std::string(label_tok) + "'", lineno);

  for (std::string_view tok = next_token(); !tok.empty(); tok = next_token()) {
    const std::size_t colon = tok.find(':');
    if (colon == std::string_view::npos) fail("malformed token '" + std::string(tok) + "'", lineno);
    long long index = 0;
    double value = 0.0;
    if (!parse_index(tok.substr(0, colon), index) || !parse_double(tok.substr(colon + 1), value))
      fail("malformed token '" + std::string(tok) + "'", lineno);
    if (index < 1 || index > std::numeric_limits<Index>::max())
      fail("feature index out of range '" + std::string(tok) + "'", lineno);
    const auto zero_based = static_cast<Index>(index - 1);
    if (!idx.empty() && zero_based <= idx.back()) fail("indices not increasing", lineno);
    idx.push_back(zero_based);
    val.push_back(value);
  }
  out.add_row(idx, val, label);
}

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; });
}

}  // namespace

SparseDataset parse_libsvm(std::istream& in, std::size_t min_dim) {
  SparseDataset out;
  std::vector<Index> idx;
  std::vector<double> val;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    parse_line(line, lineno, out, idx, val);
  }
  out.set_dim(min_dim);
  return out;
}

SparseDataset parse_libsvm(std::string_view text, std::size_t min_dim) {
  SparseDataset out;
  std::vector<Index> idx;
  std::vector<double> val;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++lineno;
    const std::string_view line = text.substr(start, end - start);
    if (!blank(line)) parse_line(line, lineno, out, idx, val);
    start = end + 1;
  }
  out.set_dim(min_dim);
  return out;
}

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string read_gzip(const std::string& path) {
  std::unique_ptr<gzFile_s, int (*)(gzFile)> file(gzopen(path.c_str(), "rb"), gzclose);
  if (!file) throw DataError("cannot open '" + path + "'");
  std::string text;
  char buf[1 << 16];
  for (;;) {
    const int got = gzread(file.get(), buf, sizeof(buf));
    if (got < 0) throw DataError("corrupt compressed stream in '" + path + "'");
    if (got == 0) break;
    text.append(buf, static_cast<std::size_t>(got));
  }
  return text;
}

}  // namespace

SparseDataset load_libsvm(const std::string& path, std::size_t min_dim) {
  if (ends_with(path, ".gz")) return parse_libsvm(std::string_view(read_gzip(path)), min_dim);
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_libsvm(in, min_dim);
}

void write_libsvm(std::ostream& out, const SparseDataset& data) {
  char buf[64];
  for (std::size_t i = 0; i < data.n(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", data.label(i));
    out << buf;
    const RowView r = data.row(i);
    for (std::size_t k = 0; k < r.nnz(); ++k) {
      std::snprintf(buf, sizeof(buf), " %d:%.17g", r.idx[k] + 1, r.val[k]);
      out << buf;
    }
    out << '\n';
  }
}

std::string to_libsvm(const SparseDataset& data) {
  std::ostringstream out;
  write_libsvm(out, data);
  return out.str();
}

SyntheticInstance generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 1 || spec.d < 1) throw ConfigError("synthetic n and d must be >= 1");
  if (!(spec.density > 0.0 && spec.density <= 1.0)) throw ConfigError("density must lie in (0, 1]");
  if (!(spec.label_noise >= 0.0 && spec.label_noise <= 1.0))
    throw ConfigError("label noise must lie in [0, 1]");

  Rng rng = make_stream(spec.seed, 0x5e7);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SyntheticInstance inst;
  inst.w_true.resize(spec.d);
  for (double& v : inst.w_true) v = normal(rng);

  std::vector<Index> idx;
  std::vector<double> val;
  for (std::size_t i = 0; i < spec.n; ++i) {
    idx.clear();
    val.clear();
    double margin = 0.0;
    for (std::size_t j = 0; j < spec.d; ++j) {
      if (spec.density < 1.0 && unit(rng) >= spec.density) continue;
      const double x = normal(rng);
      idx.push_back(static_cast<Index>(j));
      val.push_back(x);
      margin += x * inst.w_true[j];
    }
    double label = margin >= 0.0 ? 1.0 : -1.0;
    if (spec.label_noise > 0.0 && unit(rng) < spec.label_noise) label = -label;
    inst.data.add_row(idx, val, label);
  }
  inst.data.set_dim(spec.d);
  return inst;
}

void margins_into(const SparseDataset& data, std::span<const double> w, std::span<double> out) {
  if (w.size() != data.d()) throw ConfigError("weight dimension does not match dataset");
  if (out.size() != data.n()) throw ConfigError("margin buffer length does not match dataset");
  for (std::size_t i = 0; i < data.n(); ++i) {
    const RowView r = data.row(i);
    out[i] = kernels::sparse_dot(r.idx, r.val, w);
  }
}

std::vector<double> margins(const SparseDataset& data, std::span<const double> w) {
  std::vector<double> out(data.n());
  margins_into(data, w, out);
  return out;
}

void accumulate_rows(const SparseDataset& data, std::span<const double> coef, std::span<double> out) {
  if (coef.size() != data.n() || out.size() != data.d())
    throw ConfigError("accumulate_rows dimension mismatch");
  for (std::size_t i = 0; i < data.n(); ++i) {
    if (coef[i] == 0.0) continue;
    const RowView r = data.row(i);
    kernels::sparse_axpy(coef[i], r.idx, r.val, out);
  }
}

DatasetStats describe(const SparseDataset& data) {
  DatasetStats s;
  s.n = data.n();
  s.d = data.d();
  s.nnz = data.nnz();
  s.density = (s.n == 0 || s.d == 0) ? 0.0
                                     : static_cast<double>(s.nnz) / (static_cast<double>(s.n) * static_cast<double>(s.d));
  s.max_row_norm = std::sqrt(data.max_row_squared_norm());
  for (double y : data.labels()) s.positives += (y > 0.0) ? 1 : 0;
  return s;
}

}  // namespace subnewton
