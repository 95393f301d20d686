#pragma once

// Row-sparse design matrix with labels, LIBSVM I/O, and seeded synthetic
// instances.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "subnewton/kernels.hpp"

namespace subnewton {

using Index = kernels::Index;

// One sparse row: parallel index/value spans, indices strictly increasing.
struct RowView {
  std::span<const Index> idx;
  std::span<const double> val;
  std::size_t nnz() const { return idx.size(); }
};

// CSR storage. Immutable once built; share freely across threads.
class SparseDataset {
 public:
  SparseDataset() : row_ptr_{0} {}

  // Appends a row; `idx` must be strictly increasing and < dim().
  void add_row(std::span<const Index> idx, std::span<const double> val, double label);
  // Raises the feature dimension (never lowers it below an observed index).
  void set_dim(std::size_t d);

  std::size_t n() const { return labels_.size(); }
  std::size_t d() const { return d_; }
  std::size_t nnz() const { return col_.size(); }

  RowView row(std::size_t i) const {
    const auto b = static_cast<std::size_t>(row_ptr_[i]);
    const auto e = static_cast<std::size_t>(row_ptr_[i + 1]);
    return {std::span<const Index>(col_).subspan(b, e - b),
            std::span<const double>(val_).subspan(b, e - b)};
  }
  double label(std::size_t i) const { return labels_[i]; }
  std::span<const double> labels() const { return labels_; }

  double row_squared_norm(std::size_t i) const;
  double max_row_squared_norm() const;

  // Throws DataError unless every label is -1 or +1.
  void require_binary_labels() const;
  // Throws ConfigError when n == 0.
  void require_nonempty() const;

  // Copy with a constant-1 feature appended at index d().
  SparseDataset with_bias() const;

  friend bool operator==(const SparseDataset&, const SparseDataset&) = default;

 private:
  std::size_t d_ = 0;
  std::vector<std::int64_t> row_ptr_;
  std::vector<Index> col_;
  std::vector<double> val_;
  std::vector<double> labels_;
};

// Parses LIBSVM text (`<label> <idx>:<val> ...`, 1-based indices). Blank lines
// are skipped. The dimension is the maximum index seen, or `min_dim` if larger.
SparseDataset parse_libsvm(std::istream& in, std::size_t min_dim = 0);
SparseDataset parse_libsvm(std::string_view text, std::size_t min_dim = 0);
// Reads a file; names ending in ".gz" are decompressed on the fly.
SparseDataset load_libsvm(const std::string& path, std::size_t min_dim = 0);

// Round-trip exact LIBSVM text (values printed with 17 significant digits).
std::string to_libsvm(const SparseDataset& data);
void write_libsvm(std::ostream& out, const SparseDataset& data);

struct SyntheticSpec {
  std::size_t n = 1000;
  std::size_t d = 20;
  double density = 1.0;
  double label_noise = 0.0;
  std::uint64_t seed = 1;
};

struct SyntheticInstance {
  SparseDataset data;
  std::vector<double> w_true;
};

// Rows i.i.d.: each entry present with probability `density`, value N(0,1);
// label sign(x^T w_true) flipped with probability `label_noise`.
SyntheticInstance generate_synthetic(const SyntheticSpec& spec);

// u_i = x_i^T w for every row.
std::vector<double> margins(const SparseDataset& data, std::span<const double> w);
void margins_into(const SparseDataset& data, std::span<const double> w, std::span<double> out);

// out += sum_i coef_i x_i  (X^T coef)
void accumulate_rows(const SparseDataset& data, std::span<const double> coef, std::span<double> out);

struct DatasetStats {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t nnz = 0;
  double density = 0.0;
  double max_row_norm = 0.0;
  std::size_t positives = 0;
};
DatasetStats describe(const SparseDataset& data);

}  // namespace subnewton
