#ifndef PIF_COUNT_MATRIX_HPP
#define PIF_COUNT_MATRIX_HPP

#include <span>
#include <vector>

namespace pif {

struct CountEntry {
  int row;
  int col;
  long count;

  friend bool operator==(const CountEntry&, const CountEntry&) = default;
};

// Sparse nonnegative integer matrix; zeros are never stored, duplicate keys
// are summed on construction. Entries end up sorted by (row, col).
class CountMatrix {
 public:
  CountMatrix() = default;
  CountMatrix(int n_rows, int n_cols, std::vector<CountEntry> entries);

  int n_rows() const { return n_rows_; }
  int n_cols() const { return n_cols_; }
  const std::vector<CountEntry>& entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }

  std::span<const CountEntry> row(int r) const {
    return {entries_.data() + offsets_[r], entries_.data() + offsets_[r + 1]};
  }
  int row_nnz(int r) const { return offsets_[r + 1] - offsets_[r]; }
  long row_sum(int r) const;
  long total() const;
  long at(int r, int c) const;  // 0 when absent

  CountMatrix binarized() const;

 private:
  int n_rows_ = 0;
  int n_cols_ = 0;
  std::vector<CountEntry> entries_;
  std::vector<int> offsets_;  // row CSR offsets, size n_rows + 1
};

}  // namespace pif

#endif
