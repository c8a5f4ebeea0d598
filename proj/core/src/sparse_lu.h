#ifndef ROBUSTNET_SRC_SPARSE_LU_H_
#define ROBUSTNET_SRC_SPARSE_LU_H_

#include <utility>
#include <vector>

namespace robustnet::internal {

struct SparseEntry {
  int index;
  double value;
};
using SparseVector = std::vector<SparseEntry>;

// LU factorization of a sparse square basis matrix with Markowitz pivot
// selection (threshold partial pivoting), plus product-form eta updates for
// column replacements between refactorizations.
class SparseLu {
 public:
  // Factorizes the m x m matrix whose k-th column is *columns[k]. Returns the
  // (position, row) pairs left unpivoted when the matrix is singular; empty on
  // success. The factorization is unusable until a call returns empty.
  std::vector<std::pair<int, int>> Factorize(int m, const std::vector<const SparseVector*>& columns);

  // Solves B x = b. b is indexed by row, x by basis position.
  void Ftran(const std::vector<double>& b, std::vector<double>* x) const;
  // Solves B^T y = c. c is indexed by basis position, y by row.
  void Btran(const std::vector<double>& c, std::vector<double>* y) const;

  // Records the replacement of the column at `position` by a column whose
  // FTRAN image is alpha (dense, indexed by position).
  void AddEta(int position, const std::vector<double>& alpha);
  int num_etas() const { return static_cast<int>(etas_.size()); }
  long fill() const { return fill_; }

 private:
  struct LFactor {
    int pivot_row;
    SparseVector multipliers;  // (row, l)
  };
  struct URow {
    int pivot_row;
    int pivot_col;
    double pivot;
    SparseVector entries;  // (position, value), positions pivoted later
  };
  struct Eta {
    int position;
    double pivot;
    SparseVector entries;  // (position, alpha), excluding `position`
  };

  int m_ = 0;
  std::vector<LFactor> lower_;
  std::vector<URow> upper_;
  std::vector<Eta> etas_;
  long fill_ = 0;
};

}  // namespace robustnet::internal

#endif  // ROBUSTNET_SRC_SPARSE_LU_H_
