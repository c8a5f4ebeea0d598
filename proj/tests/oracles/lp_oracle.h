#ifndef ROBUSTNET_TESTS_ORACLES_LP_ORACLE_H_
#define ROBUSTNET_TESTS_ORACLES_LP_ORACLE_H_

// Brute-force vertex enumeration for small LPs whose variables all have
// finite bounds. Test-only; shares no code with the simplex.

#include <cmath>
#include <optional>
#include <vector>

#include "robustnet/lp.h"

namespace robustnet::oracle {

struct Halfspace {
  std::vector<double> a;  // a x <= b (or == when equality)
  double b;
  bool equality;
};

inline std::optional<std::vector<double>> SolveSquare(std::vector<std::vector<double>> m, std::vector<double> rhs) {
  const int n = static_cast<int>(rhs.size());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    if (std::abs(m[pivot][col]) < 1e-10) return std::nullopt;
    std::swap(m[pivot], m[col]);
    std::swap(rhs[pivot], rhs[col]);
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = m[r][col] / m[col][col];
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) m[r][c] -= f * m[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = rhs[i] / m[i][i];
  return x;
}

// Returns the optimal objective, or nullopt when infeasible.
inline std::optional<double> VertexEnumerationOptimum(const LinearProgram& lp) {
  const int n = lp.num_variables();
  std::vector<Halfspace> hs;
  for (const LpRow& row : lp.rows()) {
    std::vector<double> a(n, 0.0);
    for (const LpTerm& t : row.terms) a[t.variable] += t.coefficient;
    if (row.relation == RowRelation::kGreaterEqual) {
      for (double& v : a) v = -v;
      hs.push_back({a, -row.rhs, false});
    } else {
      hs.push_back({a, row.rhs, row.relation == RowRelation::kEqual});
    }
  }
  for (int j = 0; j < n; ++j) {
    std::vector<double> up(n, 0.0), down(n, 0.0);
    up[j] = 1.0;
    down[j] = -1.0;
    hs.push_back({up, lp.upper()[j], false});
    hs.push_back({down, -lp.lower()[j], false});
  }
  const int total = static_cast<int>(hs.size());
  std::optional<double> best;
  std::vector<int> pick(n);
  // Enumerate all n-subsets of the halfspaces.
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  while (true) {
    std::vector<std::vector<double>> m(n);
    std::vector<double> rhs(n);
    for (int i = 0; i < n; ++i) {
      m[i] = hs[idx[i]].a;
      rhs[i] = hs[idx[i]].b;
    }
    if (auto x = SolveSquare(m, rhs)) {
      bool feasible = true;
      for (const Halfspace& h : hs) {
        double act = 0.0;
        for (int j = 0; j < n; ++j) act += h.a[j] * (*x)[j];
        if (act > h.b + 1e-9 || (h.equality && act < h.b - 1e-9)) {
          feasible = false;
          break;
        }
      }
      if (feasible) {
        double obj = lp.Evaluate(*x);
        if (!best || (lp.sense() == ObjectiveSense::kMinimize ? obj < *best : obj > *best)) best = obj;
      }
    }
    int i = n - 1;
    while (i >= 0 && idx[i] == total - n + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int k = i + 1; k < n; ++k) idx[k] = idx[k - 1] + 1;
  }
  return best;
}

}  // namespace robustnet::oracle

#endif  // ROBUSTNET_TESTS_ORACLES_LP_ORACLE_H_
