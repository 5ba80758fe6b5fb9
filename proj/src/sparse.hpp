#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace hfg {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

// Triplet-form sparse matrix. Entries are kept column-major sorted with
// unique (row, col) coordinates and finite values; this canonical order is
// what the plain-text dump format and all equality comparisons rely on.
class SparseMatrix {
public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols);

  // Validates ranges and finiteness, sorts into canonical order, and
  // rejects duplicate coordinates.
  static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> entries);

  static SparseMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nnz() const { return static_cast<int>(entries_.size()); }
  const std::vector<Triplet>& entries() const { return entries_; }

  double coeff(int row, int col) const;

  // y = A x
  std::vector<double> multiply(std::span<const double> x) const;
  // y = A^T x
  std::vector<double> multiply_transposed(std::span<const double> x) const;

  SparseMatrix transposed() const;

  // Row-major dense copy, rows*cols doubles.
  std::vector<double> to_dense() const;

  // a - b; exact cancellations are dropped.
  static SparseMatrix subtract(const SparseMatrix& a, const SparseMatrix& b);

  static SparseMatrix kronecker(const SparseMatrix& a, const SparseMatrix& b);

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Triplet> entries_;
};

// Shortest decimal representation that round-trips through double.
std::string format_double(double value);

// 17-significant-digit decimal, used by the QP debug dump.
std::string format_double_17(double value);

// "rows cols nnz" header then one "row col value" line per entry.
void write_triplet_block(std::ostream& os, const SparseMatrix& m);
SparseMatrix read_triplet_block(std::istream& is);

}  // namespace hfg
