#include "sparse_lu.h"

#include <algorithm>
#include <cmath>

namespace robustnet::internal {
namespace {

constexpr double kDropTolerance = 1e-14;
constexpr double kSingularTolerance = 1e-11;
constexpr double kThreshold = 0.01;
constexpr int kMarkowitzSearch = 4;

// Doubly linked lists of items bucketed by a nonnegative count.
class CountBuckets {
 public:
  explicit CountBuckets(int items, int max_count)
      : head_(max_count + 2, -1), next_(items, -1), prev_(items, -1), count_(items, -1) {}

  void Insert(int item, int count) {
    count_[item] = count;
    prev_[item] = -1;
    next_[item] = head_[count];
    if (head_[count] >= 0) prev_[head_[count]] = item;
    head_[count] = item;
  }
  void Remove(int item) {
    int c = count_[item];
    if (c < 0) return;
    if (prev_[item] >= 0) {
      next_[prev_[item]] = next_[item];
    } else {
      head_[c] = next_[item];
    }
    if (next_[item] >= 0) prev_[next_[item]] = prev_[item];
    count_[item] = -1;
  }
  void Move(int item, int count) {
    Remove(item);
    Insert(item, count);
  }
  int Head(int count) const { return head_[count]; }
  int Next(int item) const { return next_[item]; }
  int max_count() const { return static_cast<int>(head_.size()) - 2; }

 private:
  std::vector<int> head_;
  std::vector<int> next_;
  std::vector<int> prev_;
  std::vector<int> count_;
};

void EraseIndex(std::vector<int>* list, int value) {
  auto it = std::find(list->begin(), list->end(), value);
  if (it != list->end()) {
    *it = list->back();
    list->pop_back();
  }
}

}  // namespace

std::vector<std::pair<int, int>> SparseLu::Factorize(int m, const std::vector<const SparseVector*>& columns) {
  m_ = m;
  lower_.clear();
  upper_.clear();
  etas_.clear();
  fill_ = 0;

  // Active submatrix, column-wise values and row-wise column indices.
  std::vector<SparseVector> cols(m);
  std::vector<std::vector<int>> rows(m);
  for (int j = 0; j < m; ++j) {
    for (const SparseEntry& entry : *columns[j]) {
      if (entry.value == 0.0) continue;
      cols[j].push_back(entry);
      rows[entry.index].push_back(j);
    }
  }
  CountBuckets col_buckets(m, m);
  CountBuckets row_buckets(m, m);
  for (int j = 0; j < m; ++j) col_buckets.Insert(j, static_cast<int>(cols[j].size()));
  for (int i = 0; i < m; ++i) row_buckets.Insert(i, static_cast<int>(rows[i].size()));
  std::vector<bool> col_done(m, false);
  std::vector<bool> row_done(m, false);
  std::vector<int> scatter(m, -1);

  auto column_max = [&](int j) {
    double best = 0.0;
    for (const SparseEntry& e : cols[j]) best = std::max(best, std::abs(e.value));
    return best;
  };
  auto value_at = [&](int i, int j) {
    for (const SparseEntry& e : cols[j]) {
      if (e.index == i) return e.value;
    }
    return 0.0;
  };

  lower_.reserve(m);
  upper_.reserve(m);
  for (int step = 0; step < m; ++step) {
    int p = -1;
    int q = -1;
    // Column singletons.
    for (int j = col_buckets.Head(1); j >= 0; j = col_buckets.Next(j)) {
      if (std::abs(cols[j][0].value) > kSingularTolerance) {
        q = j;
        p = cols[j][0].index;
        break;
      }
    }
    // Row singletons that pass the threshold test.
    if (q < 0) {
      for (int i = row_buckets.Head(1); i >= 0; i = row_buckets.Next(i)) {
        int j = rows[i][0];
        double v = std::abs(value_at(i, j));
        if (v > kSingularTolerance && v >= kThreshold * column_max(j)) {
          p = i;
          q = j;
          break;
        }
      }
    }
    // Markowitz search over the sparsest columns.
    if (q < 0) {
      long best_cost = -1;
      double best_value = 0.0;
      int searched = 0;
      for (int count = 1; count <= col_buckets.max_count() && searched < kMarkowitzSearch; ++count) {
        for (int j = col_buckets.Head(count); j >= 0 && searched < kMarkowitzSearch; j = col_buckets.Next(j)) {
          double cmax = column_max(j);
          if (cmax <= kSingularTolerance) continue;
          ++searched;
          for (const SparseEntry& e : cols[j]) {
            double v = std::abs(e.value);
            if (v < kThreshold * cmax || v <= kSingularTolerance) continue;
            long cost = static_cast<long>(rows[e.index].size() - 1) * (count - 1);
            if (best_cost < 0 || cost < best_cost || (cost == best_cost && v > best_value)) {
              best_cost = cost;
              best_value = v;
              p = e.index;
              q = j;
            }
          }
        }
      }
    }
    if (q < 0) break;  // singular remainder

    const double pivot = value_at(p, q);
    LFactor lfactor{p, {}};
    for (const SparseEntry& e : cols[q]) {
      if (e.index != p) lfactor.multipliers.push_back({e.index, e.value / pivot});
    }
    URow urow{p, q, pivot, {}};
    for (int j : rows[p]) {
      if (j != q) urow.entries.push_back({j, value_at(p, j)});
    }

    // Retire column q and row p from the active submatrix.
    col_done[q] = true;
    col_buckets.Remove(q);
    for (const SparseEntry& e : cols[q]) {
      EraseIndex(&rows[e.index], q);
    }
    cols[q].clear();
    row_done[p] = true;
    row_buckets.Remove(p);
    for (const SparseEntry& u : urow.entries) {
      SparseVector& col = cols[u.index];
      for (size_t k = 0; k < col.size(); ++k) {
        if (col[k].index == p) {
          col[k] = col.back();
          col.pop_back();
          break;
        }
      }
    }
    rows[p].clear();

    // Schur complement update.
    for (const SparseEntry& u : urow.entries) {
      const int j = u.index;
      SparseVector& col = cols[j];
      for (size_t k = 0; k < col.size(); ++k) scatter[col[k].index] = static_cast<int>(k);
      for (const SparseEntry& l : lfactor.multipliers) {
        double delta = -l.value * u.value;
        if (scatter[l.index] >= 0) {
          col[scatter[l.index]].value += delta;
        } else {
          scatter[l.index] = static_cast<int>(col.size());
          col.push_back({l.index, delta});
          rows[l.index].push_back(j);
          ++fill_;
        }
      }
      for (const SparseEntry& e : col) scatter[e.index] = -1;
      // Drop cancellations.
      for (size_t k = 0; k < col.size();) {
        if (std::abs(col[k].value) < kDropTolerance) {
          EraseIndex(&rows[col[k].index], j);
          col[k] = col.back();
          col.pop_back();
        } else {
          ++k;
        }
      }
      col_buckets.Move(j, static_cast<int>(col.size()));
    }
    for (const SparseEntry& l : lfactor.multipliers) {
      if (!row_done[l.index]) row_buckets.Move(l.index, static_cast<int>(rows[l.index].size()));
    }

    lower_.push_back(std::move(lfactor));
    upper_.push_back(std::move(urow));
  }

  std::vector<std::pair<int, int>> deficiency;
  if (static_cast<int>(upper_.size()) < m) {
    std::vector<int> free_cols;
    std::vector<int> free_rows;
    for (int j = 0; j < m; ++j) {
      if (!col_done[j]) free_cols.push_back(j);
    }
    for (int i = 0; i < m; ++i) {
      if (!row_done[i]) free_rows.push_back(i);
    }
    for (size_t k = 0; k < free_cols.size(); ++k) deficiency.emplace_back(free_cols[k], free_rows[k]);
  }
  return deficiency;
}

void SparseLu::Ftran(const std::vector<double>& b, std::vector<double>* x) const {
  std::vector<double> work = b;
  for (const LFactor& l : lower_) {
    double v = work[l.pivot_row];
    if (v == 0.0) continue;
    for (const SparseEntry& e : l.multipliers) work[e.index] -= e.value * v;
  }
  x->assign(m_, 0.0);
  std::vector<double>& out = *x;
  for (int k = static_cast<int>(upper_.size()) - 1; k >= 0; --k) {
    const URow& u = upper_[k];
    double s = work[u.pivot_row];
    for (const SparseEntry& e : u.entries) s -= e.value * out[e.index];
    out[u.pivot_col] = s / u.pivot;
  }
  for (const Eta& eta : etas_) {
    double xr = out[eta.position];
    if (xr == 0.0) continue;
    xr /= eta.pivot;
    out[eta.position] = xr;
    for (const SparseEntry& e : eta.entries) out[e.index] -= e.value * xr;
  }
}

void SparseLu::Btran(const std::vector<double>& c, std::vector<double>* y) const {
  std::vector<double> work = c;
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double s = work[it->position];
    for (const SparseEntry& e : it->entries) s -= e.value * work[e.index];
    work[it->position] = s / it->pivot;
  }
  y->assign(m_, 0.0);
  std::vector<double>& z = *y;
  for (const URow& u : upper_) {
    double zp = work[u.pivot_col] / u.pivot;
    z[u.pivot_row] = zp;
    if (zp == 0.0) continue;
    for (const SparseEntry& e : u.entries) work[e.index] -= e.value * zp;
  }
  for (auto it = lower_.rbegin(); it != lower_.rend(); ++it) {
    double s = z[it->pivot_row];
    for (const SparseEntry& e : it->multipliers) s -= e.value * z[e.index];
    z[it->pivot_row] = s;
  }
}

void SparseLu::AddEta(int position, const std::vector<double>& alpha) {
  Eta eta{position, alpha[position], {}};
  for (int i = 0; i < m_; ++i) {
    if (i != position && std::abs(alpha[i]) > kDropTolerance) eta.entries.push_back({i, alpha[i]});
  }
  etas_.push_back(std::move(eta));
}

}  // namespace robustnet::internal
