#include "sparse.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "error.hpp"

namespace hfg {

SparseMatrix::SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) {
    throw Error(ErrorKind::argument, "sparse matrix dimensions must be nonnegative");
  }
}

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::vector<Triplet> entries) {
  SparseMatrix m(rows, cols);
  for (const Triplet& t : entries) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw Error(ErrorKind::argument,
                  "sparse entry (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                      ") out of range for " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (!std::isfinite(t.value)) {
      throw Error(ErrorKind::argument, "sparse entry (" + std::to_string(t.row) + ", " +
                                           std::to_string(t.col) + ") is not finite");
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
  for (size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].row == entries[i - 1].row && entries[i].col == entries[i - 1].col) {
      throw Error(ErrorKind::argument,
                  "duplicate sparse entry at (" + std::to_string(entries[i].row) + ", " +
                      std::to_string(entries[i].col) + ")");
    }
  }
  m.entries_ = std::move(entries);
  return m;
}

SparseMatrix SparseMatrix::identity(int n) {
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, n, std::move(t));
}

double SparseMatrix::coeff(int row, int col) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), Triplet{row, col, 0.0},
                             [](const Triplet& a, const Triplet& b) {
                               return a.col != b.col ? a.col < b.col : a.row < b.row;
                             });
  if (it != entries_.end() && it->row == row && it->col == col) return it->value;
  return 0.0;
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != cols_) {
    throw Error(ErrorKind::argument, "matrix-vector size mismatch: " + std::to_string(cols_) +
                                         " columns vs vector of " + std::to_string(x.size()));
  }
  std::vector<double> y(static_cast<size_t>(rows_), 0.0);
  for (const Triplet& t : entries_) y[static_cast<size_t>(t.row)] += t.value * x[static_cast<size_t>(t.col)];
  return y;
}

std::vector<double> SparseMatrix::multiply_transposed(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != rows_) {
    throw Error(ErrorKind::argument, "transposed matrix-vector size mismatch");
  }
  std::vector<double> y(static_cast<size_t>(cols_), 0.0);
  for (const Triplet& t : entries_) y[static_cast<size_t>(t.col)] += t.value * x[static_cast<size_t>(t.row)];
  return y;
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<Triplet> t;
  t.reserve(entries_.size());
  for (const Triplet& e : entries_) t.push_back({e.col, e.row, e.value});
  return from_triplets(cols_, rows_, std::move(t));
}

std::vector<double> SparseMatrix::to_dense() const {
  std::vector<double> d(static_cast<size_t>(rows_) * static_cast<size_t>(cols_), 0.0);
  for (const Triplet& t : entries_) {
    d[static_cast<size_t>(t.row) * static_cast<size_t>(cols_) + static_cast<size_t>(t.col)] = t.value;
  }
  return d;
}

SparseMatrix SparseMatrix::subtract(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) {
    throw Error(ErrorKind::argument, "sparse subtraction shape mismatch");
  }
  std::vector<Triplet> merged;
  merged.reserve(a.entries_.size() + b.entries_.size());
  size_t i = 0;
  size_t j = 0;
  auto before = [](const Triplet& x, const Triplet& y) {
    return x.col != y.col ? x.col < y.col : x.row < y.row;
  };
  while (i < a.entries_.size() || j < b.entries_.size()) {
    if (j == b.entries_.size() || (i < a.entries_.size() && before(a.entries_[i], b.entries_[j]))) {
      merged.push_back(a.entries_[i++]);
    } else if (i == a.entries_.size() || before(b.entries_[j], a.entries_[i])) {
      Triplet t = b.entries_[j++];
      t.value = -t.value;
      merged.push_back(t);
    } else {
      double v = a.entries_[i].value - b.entries_[j].value;
      if (v != 0.0) merged.push_back({a.entries_[i].row, a.entries_[i].col, v});
      ++i;
      ++j;
    }
  }
  return from_triplets(a.rows_, a.cols_, std::move(merged));
}

SparseMatrix SparseMatrix::kronecker(const SparseMatrix& a, const SparseMatrix& b) {
  std::vector<Triplet> t;
  t.reserve(a.entries_.size() * b.entries_.size());
  for (const Triplet& ea : a.entries_) {
    for (const Triplet& eb : b.entries_) {
      t.push_back({ea.row * b.rows() + eb.row, ea.col * b.cols() + eb.col, ea.value * eb.value});
    }
  }
  return from_triplets(a.rows() * b.rows(), a.cols() * b.cols(), std::move(t));
}

std::string format_double(double value) {
  if (value == 0.0) return "0";  // normalizes -0
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw Error(ErrorKind::internal, "number formatting failed");
  return std::string(buf, ptr);
}

std::string format_double_17(double value) {
  char buf[48];
  int n = std::snprintf(buf, sizeof(buf), "%.17g", value);
  if (n < 0) throw Error(ErrorKind::internal, "number formatting failed");
  return std::string(buf, static_cast<size_t>(n));
}

void write_triplet_block(std::ostream& os, const SparseMatrix& m) {
  os << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
  for (const Triplet& t : m.entries()) {
    os << t.row << ' ' << t.col << ' ' << format_double_17(t.value) << '\n';
  }
}

SparseMatrix read_triplet_block(std::istream& is) {
  int rows = 0;
  int cols = 0;
  int nnz = 0;
  if (!(is >> rows >> cols >> nnz)) {
    throw Error(ErrorKind::parse, "triplet block header malformed");
  }
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(nnz));
  for (int i = 0; i < nnz; ++i) {
    Triplet e;
    if (!(is >> e.row >> e.col >> e.value)) {
      throw Error(ErrorKind::parse, "triplet block entry " + std::to_string(i) + " malformed");
    }
    t.push_back(e);
  }
  return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

}  // namespace hfg
