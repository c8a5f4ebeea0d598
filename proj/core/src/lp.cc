#include "robustnet/lp.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "robustnet/errors.h"
#include "sparse_lu.h"

namespace robustnet {

using internal::SparseEntry;
using internal::SparseLu;
using internal::SparseVector;

int LinearProgram::AddVariable(double lower, double upper, double objective, std::string name) {
  objective_.push_back(objective);
  lower_.push_back(lower);
  upper_.push_back(upper);
  if (name.empty()) name = "x" + std::to_string(objective_.size() - 1);
  names_.push_back(std::move(name));
  return static_cast<int>(objective_.size() - 1);
}

int LinearProgram::AddRow(std::vector<LpTerm> terms, RowRelation relation, double rhs) {
  rows_.push_back(LpRow{std::move(terms), relation, rhs});
  return static_cast<int>(rows_.size() - 1);
}

void LinearProgram::Validate() const {
  const int n = num_variables();
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(objective_[j])) throw StructuralError("non-finite objective coefficient on " + names_[j]);
    if (std::isnan(lower_[j]) || std::isnan(upper_[j]) || lower_[j] > upper_[j] || lower_[j] == kInfinity ||
        upper_[j] == -kInfinity) {
      throw StructuralError("invalid bounds on " + names_[j]);
    }
  }
  for (size_t r = 0; r < rows_.size(); ++r) {
    if (!std::isfinite(rows_[r].rhs)) throw StructuralError("non-finite rhs in row " + std::to_string(r));
    std::set<int> seen;
    for (const LpTerm& t : rows_[r].terms) {
      if (t.variable < 0 || t.variable >= n) {
        throw StructuralError("row " + std::to_string(r) + " references unknown variable " +
                              std::to_string(t.variable));
      }
      if (!std::isfinite(t.coefficient)) throw StructuralError("non-finite coefficient in row " + std::to_string(r));
      if (!seen.insert(t.variable).second) {
        throw StructuralError("row " + std::to_string(r) + " repeats variable " + names_[t.variable]);
      }
    }
  }
}

double LinearProgram::Evaluate(const std::vector<double>& x) const {
  double total = 0.0;
  for (int j = 0; j < num_variables(); ++j) total += objective_[j] * x[j];
  return total;
}

std::string LinearProgram::ToLpFormat() const {
  std::ostringstream out;
  out.precision(17);
  out << (sense_ == ObjectiveSense::kMinimize ? "Minimize" : "Maximize") << "\n obj:";
  for (int j = 0; j < num_variables(); ++j) {
    if (objective_[j] != 0.0) out << (objective_[j] < 0 ? " - " : " + ") << std::abs(objective_[j]) << " " << names_[j];
  }
  out << "\nSubject To\n";
  for (size_t r = 0; r < rows_.size(); ++r) {
    out << " c" << r << ":";
    if (rows_[r].terms.empty()) out << " 0 " << (names_.empty() ? std::string() : names_[0]);
    for (const LpTerm& t : rows_[r].terms) {
      out << (t.coefficient < 0 ? " - " : " + ") << std::abs(t.coefficient) << " " << names_[t.variable];
    }
    switch (rows_[r].relation) {
      case RowRelation::kLessEqual: out << " <= "; break;
      case RowRelation::kEqual: out << " = "; break;
      case RowRelation::kGreaterEqual: out << " >= "; break;
    }
    out << rows_[r].rhs << "\n";
  }
  out << "Bounds\n";
  for (int j = 0; j < num_variables(); ++j) {
    if (lower_[j] == -kInfinity && upper_[j] == kInfinity) {
      out << " " << names_[j] << " free\n";
      continue;
    }
    out << " ";
    if (lower_[j] == -kInfinity) {
      out << "-inf";
    } else {
      out << lower_[j];
    }
    out << " <= " << names_[j] << " <= ";
    if (upper_[j] == kInfinity) {
      out << "+inf";
    } else {
      out << upper_[j];
    }
    out << "\n";
  }
  out << "End\n";
  return out.str();
}

std::string ToString(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
  }
  return "unknown";
}

namespace {

constexpr double kPrimalFeasTol = 1e-9;
constexpr double kDualFeasTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kBlandPivotTol = 1e-7;
constexpr int kMaxPerturbations = 20;

enum class VarStatus { kBasic, kAtLower, kAtUpper, kFreeZero, kFixed };

// Internal computational form:  min c^T x  s.t.  A x - w = 0,
// l <= x <= u, row bounds on the logicals w. Rows are equilibrated.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const LpOptions& options) : lp_(lp), options_(options) {}

  LpSolution Run();

 private:
  void Setup();
  void Refactor();
  void ComputeBasicValues();
  double Infeasibility(int var) const;
  double SumInfeasibility() const;
  void PhaseCosts(bool phase_one, std::vector<double>* cb) const;
  double ReducedCost(int var, const std::vector<double>& y, bool phase_one) const;
  void Perturb();
  void Unperturb();
  bool DualCleanup();
  LpSolution Finish(LpStatus status, const std::vector<double>& y, const std::vector<double>& ray);

  const LinearProgram& lp_;
  LpOptions options_;
  int n_ = 0;
  int m_ = 0;
  std::vector<SparseVector> columns_;
  std::vector<SparseVector> row_entries_;  // row-wise copy, indices are columns
  std::vector<double> cost_;
  std::vector<double> lb_;
  std::vector<double> ub_;
  std::vector<double> row_scale_;
  std::vector<int> basis_;
  std::vector<int> position_;
  std::vector<VarStatus> status_;
  std::vector<double> x_;
  SparseLu lu_;
  int iterations_ = 0;
  int bland_iterations_ = 0;
  int refactorizations_ = 0;
  // Bounds before perturbation; empty while unperturbed.
  std::vector<double> saved_lb_;
  std::vector<double> saved_ub_;
  int perturbations_ = 0;
};

void Simplex::Setup() {
  n_ = lp_.num_variables();
  m_ = lp_.num_rows();
  const double sign = lp_.sense() == ObjectiveSense::kMinimize ? 1.0 : -1.0;
  row_scale_.assign(m_, 1.0);
  for (int i = 0; i < m_; ++i) {
    double biggest = 0.0;
    for (const LpTerm& t : lp_.rows()[i].terms) biggest = std::max(biggest, std::abs(t.coefficient));
    if (biggest > 0.0) row_scale_[i] = 1.0 / biggest;
  }
  columns_.assign(n_ + m_, {});
  for (int i = 0; i < m_; ++i) {
    for (const LpTerm& t : lp_.rows()[i].terms) {
      if (t.coefficient != 0.0) columns_[t.variable].push_back({i, t.coefficient * row_scale_[i]});
    }
    columns_[n_ + i].push_back({i, -1.0});
  }
  row_entries_.assign(m_, {});
  for (int j = 0; j < n_ + m_; ++j) {
    for (const SparseEntry& e : columns_[j]) row_entries_[e.index].push_back({j, e.value});
  }
  cost_.assign(n_ + m_, 0.0);
  lb_.assign(n_ + m_, 0.0);
  ub_.assign(n_ + m_, 0.0);
  for (int j = 0; j < n_; ++j) {
    cost_[j] = sign * lp_.objective()[j];
    lb_[j] = lp_.lower()[j];
    ub_[j] = lp_.upper()[j];
  }
  for (int i = 0; i < m_; ++i) {
    const LpRow& row = lp_.rows()[i];
    double b = row.rhs * row_scale_[i];
    switch (row.relation) {
      case RowRelation::kLessEqual: lb_[n_ + i] = -kInfinity; ub_[n_ + i] = b; break;
      case RowRelation::kGreaterEqual: lb_[n_ + i] = b; ub_[n_ + i] = kInfinity; break;
      case RowRelation::kEqual: lb_[n_ + i] = b; ub_[n_ + i] = b; break;
    }
  }
  status_.assign(n_ + m_, VarStatus::kAtLower);
  x_.assign(n_ + m_, 0.0);
  for (int j = 0; j < n_; ++j) {
    if (lb_[j] == ub_[j]) {
      status_[j] = VarStatus::kFixed;
      x_[j] = lb_[j];
    } else if (std::isfinite(lb_[j])) {
      status_[j] = VarStatus::kAtLower;
      x_[j] = lb_[j];
    } else if (std::isfinite(ub_[j])) {
      status_[j] = VarStatus::kAtUpper;
      x_[j] = ub_[j];
    } else {
      status_[j] = VarStatus::kFreeZero;
      x_[j] = 0.0;
    }
  }
  basis_.clear();
  position_.assign(n_ + m_, -1);
  const auto& start = options_.start_basis;
  if (static_cast<int>(start.size()) == n_ + m_) {
    for (int j = 0; j < n_ + m_; ++j) {
      if (start[j] == BasisStatus::kBasic && static_cast<int>(basis_.size()) < m_) {
        basis_.push_back(j);
      } else if (lb_[j] == ub_[j]) {
        status_[j] = VarStatus::kFixed;
        x_[j] = lb_[j];
      } else if (start[j] == BasisStatus::kAtUpper && std::isfinite(ub_[j])) {
        status_[j] = VarStatus::kAtUpper;
        x_[j] = ub_[j];
      } else if (std::isfinite(lb_[j])) {
        status_[j] = VarStatus::kAtLower;
        x_[j] = lb_[j];
      } else if (std::isfinite(ub_[j])) {
        status_[j] = VarStatus::kAtUpper;
        x_[j] = ub_[j];
      } else {
        status_[j] = VarStatus::kFreeZero;
        x_[j] = 0.0;
      }
    }
    std::vector<char> chosen(n_ + m_, 0);
    for (int j : basis_) chosen[j] = 1;
    for (int i = 0; i < m_ && static_cast<int>(basis_.size()) < m_; ++i) {
      if (!chosen[n_ + i]) basis_.push_back(n_ + i);
    }
  } else {
    for (int i = 0; i < m_; ++i) basis_.push_back(n_ + i);
  }
  for (int k = 0; k < m_; ++k) {
    position_[basis_[k]] = k;
    status_[basis_[k]] = VarStatus::kBasic;
  }
}

void Simplex::Refactor() {
  for (int attempt = 0; attempt <= m_; ++attempt) {
    std::vector<const SparseVector*> cols(m_);
    for (int k = 0; k < m_; ++k) cols[k] = &columns_[basis_[k]];
    auto deficiency = lu_.Factorize(m_, cols);
    ++refactorizations_;
    if (deficiency.empty()) return;
    // Basis repair: swap singular columns for the logicals of uncovered rows.
    for (auto [pos, row] : deficiency) {
      int leaving = basis_[pos];
      int logical = n_ + row;
      position_[leaving] = -1;
      if (lb_[leaving] == ub_[leaving]) {
        status_[leaving] = VarStatus::kFixed;
        x_[leaving] = lb_[leaving];
      } else if (std::isfinite(lb_[leaving])) {
        status_[leaving] = VarStatus::kAtLower;
        x_[leaving] = lb_[leaving];
      } else if (std::isfinite(ub_[leaving])) {
        status_[leaving] = VarStatus::kAtUpper;
        x_[leaving] = ub_[leaving];
      } else {
        status_[leaving] = VarStatus::kFreeZero;
        x_[leaving] = 0.0;
      }
      basis_[pos] = logical;
      position_[logical] = pos;
      status_[logical] = VarStatus::kBasic;
    }
  }
  throw SolverError("basis repair failed at pivot step " + std::to_string(iterations_));
}

void Simplex::ComputeBasicValues() {
  std::vector<double> rhs(m_, 0.0);
  for (int j = 0; j < n_ + m_; ++j) {
    if (status_[j] == VarStatus::kBasic || x_[j] == 0.0) continue;
    for (const SparseEntry& e : columns_[j]) rhs[e.index] -= e.value * x_[j];
  }
  std::vector<double> xb;
  lu_.Ftran(rhs, &xb);
  for (int k = 0; k < m_; ++k) x_[basis_[k]] = xb[k];
}

double Simplex::Infeasibility(int var) const {
  if (x_[var] < lb_[var] - kPrimalFeasTol) return lb_[var] - x_[var];
  if (x_[var] > ub_[var] + kPrimalFeasTol) return x_[var] - ub_[var];
  return 0.0;
}

double Simplex::SumInfeasibility() const {
  double total = 0.0;
  for (int k = 0; k < m_; ++k) total += Infeasibility(basis_[k]);
  return total;
}

void Simplex::PhaseCosts(bool phase_one, std::vector<double>* cb) const {
  cb->assign(m_, 0.0);
  for (int k = 0; k < m_; ++k) {
    int var = basis_[k];
    if (phase_one) {
      if (x_[var] < lb_[var] - kPrimalFeasTol) {
        (*cb)[k] = -1.0;
      } else if (x_[var] > ub_[var] + kPrimalFeasTol) {
        (*cb)[k] = 1.0;
      }
    } else {
      (*cb)[k] = cost_[var];
    }
  }
}

double Simplex::ReducedCost(int var, const std::vector<double>& y, bool phase_one) const {
  double d = phase_one ? 0.0 : cost_[var];
  for (const SparseEntry& e : columns_[var]) d -= e.value * y[e.index];
  return d;
}

// Widens the bounds of the basic variables by small random amounts so that
// degenerate vertices split apart.
void Simplex::Perturb() {
  if (saved_lb_.empty()) {
    saved_lb_ = lb_;
    saved_ub_ = ub_;
  }
  std::mt19937_64 rng(0x5eed + perturbations_);
  ++perturbations_;
  std::uniform_real_distribution<double> unit(1.0, 2.0);
  for (int k = 0; k < m_; ++k) {
    const int var = basis_[k];
    if (std::isfinite(lb_[var])) lb_[var] -= 1e-6 * (1.0 + std::abs(lb_[var])) * unit(rng);
    if (std::isfinite(ub_[var])) ub_[var] += 1e-6 * (1.0 + std::abs(ub_[var])) * unit(rng);
  }
}

void Simplex::Unperturb() {
  lb_ = std::move(saved_lb_);
  ub_ = std::move(saved_ub_);
  saved_lb_.clear();
  saved_ub_.clear();
  for (int j = 0; j < n_ + m_; ++j) {
    switch (status_[j]) {
      case VarStatus::kBasic: break;
      case VarStatus::kAtLower:
      case VarStatus::kAtUpper:
      case VarStatus::kFixed:
        if (lb_[j] == ub_[j]) {
          status_[j] = VarStatus::kFixed;
          x_[j] = lb_[j];
        } else {
          x_[j] = status_[j] == VarStatus::kAtUpper ? ub_[j] : lb_[j];
        }
        break;
      case VarStatus::kFreeZero: x_[j] = 0.0; break;
    }
  }
  Refactor();
  ComputeBasicValues();
}

// Dual simplex from a dual feasible basis until the basics are within their
// bounds. Used after removing a perturbation, when the basis is still
// optimal for the true costs. Returns false (basis left valid but possibly
// infeasible) when it gives up.
bool Simplex::DualCleanup() {
  std::vector<double> cb;
  std::vector<double> y;
  std::vector<double> d(n_ + m_, 0.0);
  std::vector<double> unit(m_, 0.0);
  std::vector<double> rho;
  std::vector<double> column(m_, 0.0);
  std::vector<double> alpha;
  std::vector<double> pivot_row(n_ + m_, 0.0);
  std::vector<char> in_row(n_ + m_, 0);
  std::vector<int> support;
  const int limit = 10 * m_ + 100;
  int updates = 0;
  bool fresh = false;
  for (int step = 0; step < limit; ++step) {
    if (!fresh) {
      PhaseCosts(false, &cb);
      lu_.Btran(cb, &y);
      for (int j = 0; j < n_ + m_; ++j) d[j] = status_[j] == VarStatus::kBasic ? 0.0 : ReducedCost(j, y, false);
      fresh = true;
    }
    int r = -1;
    double worst = kPrimalFeasTol;
    for (int k = 0; k < m_; ++k) {
      const double inf = Infeasibility(basis_[k]);
      if (inf > worst) {
        worst = inf;
        r = k;
      }
    }
    if (r < 0) return true;
    const int leaving = basis_[r];
    const bool above = x_[leaving] > ub_[leaving];
    const double target = above ? ub_[leaving] : lb_[leaving];

    std::fill(unit.begin(), unit.end(), 0.0);
    unit[r] = 1.0;
    lu_.Btran(unit, &rho);
    support.clear();
    for (int i = 0; i < m_; ++i) {
      if (rho[i] == 0.0) continue;
      for (const SparseEntry& e : row_entries_[i]) {
        const int j = e.index;
        if (status_[j] == VarStatus::kBasic || status_[j] == VarStatus::kFixed) continue;
        if (!in_row[j]) {
          in_row[j] = 1;
          support.push_back(j);
        }
        pivot_row[j] += rho[i] * e.value;
      }
    }
    // x_r moves by -alpha_rj per unit increase of x_j. Eligible j move x_r
    // toward its violated bound; the dual ratio keeps d sign-feasible.
    auto eligible = [&](int j, double* slack) {
      const double a = pivot_row[j];
      if (std::abs(a) <= kBlandPivotTol) return false;
      const VarStatus st = status_[j];
      const double want = above ? 1.0 : -1.0;  // sign of a for an increase in x_j
      if (st == VarStatus::kAtLower && a * want > 0) {
        *slack = std::max(d[j], 0.0);
        return true;
      }
      if (st == VarStatus::kAtUpper && a * want < 0) {
        *slack = std::max(-d[j], 0.0);
        return true;
      }
      if (st == VarStatus::kFreeZero) {
        *slack = std::abs(d[j]);
        return true;
      }
      return false;
    };
    // Harris two-pass dual ratio test: the largest |alpha_rj| among the
    // candidates within the relaxed minimum ratio.
    double harris = kInfinity;
    for (int j : support) {
      double slack;
      if (eligible(j, &slack)) harris = std::min(harris, (slack + kDualFeasTol) / std::abs(pivot_row[j]));
    }
    int entering = -1;
    double best_alpha = 0.0;
    for (int j : support) {
      double slack;
      if (!eligible(j, &slack) || slack / std::abs(pivot_row[j]) > harris) continue;
      if (std::abs(pivot_row[j]) > best_alpha) {
        best_alpha = std::abs(pivot_row[j]);
        entering = j;
      }
    }
    const double arq = entering >= 0 ? pivot_row[entering] : 0.0;
    const double dq = entering >= 0 ? d[entering] : 0.0;
    for (int j : support) {
      if (entering >= 0) d[j] -= dq / arq * pivot_row[j];
      pivot_row[j] = 0.0;
      in_row[j] = 0;
    }
    if (entering < 0) return false;

    std::fill(column.begin(), column.end(), 0.0);
    for (const SparseEntry& e : columns_[entering]) column[e.index] = e.value;
    lu_.Ftran(column, &alpha);
    if (std::abs(alpha[r]) < kBlandPivotTol) return false;
    const double t = (x_[leaving] - target) / alpha[r];
    x_[entering] += t;
    for (int k = 0; k < m_; ++k) {
      if (alpha[k] != 0.0) x_[basis_[k]] -= t * alpha[k];
    }
    d[leaving] = -dq / alpha[r];
    d[entering] = 0.0;
    x_[leaving] = target;
    status_[leaving] = lb_[leaving] == ub_[leaving] ? VarStatus::kFixed
                       : above                      ? VarStatus::kAtUpper
                                                    : VarStatus::kAtLower;
    position_[leaving] = -1;
    basis_[r] = entering;
    position_[entering] = r;
    status_[entering] = VarStatus::kBasic;
    lu_.AddEta(r, alpha);
    ++iterations_;
    if (++updates >= options_.refactor_interval) {
      Refactor();
      ComputeBasicValues();
      updates = 0;
      fresh = false;
    }
  }
  return false;
}

LpSolution Simplex::Run() {
  lp_.Validate();
  if (!options_.dump_path.empty()) {
    std::ofstream dump(options_.dump_path);
    dump << lp_.ToLpFormat();
  }
  Setup();
  const long max_iterations =
      options_.max_iterations > 0 ? options_.max_iterations : 50L * (n_ + m_) + 10000;

  if (m_ == 0) {
    // Only bounds: every variable sits at its cheapest bound.
    std::vector<double> ray(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
      if (cost_[j] > 0) {
        if (!std::isfinite(lb_[j])) {
          ray[j] = -1.0;
          return Finish(LpStatus::kUnbounded, {}, ray);
        }
        x_[j] = lb_[j];
      } else if (cost_[j] < 0) {
        if (!std::isfinite(ub_[j])) {
          ray[j] = 1.0;
          return Finish(LpStatus::kUnbounded, {}, ray);
        }
        x_[j] = ub_[j];
      }
    }
    return Finish(LpStatus::kOptimal, {}, {});
  }

  Refactor();
  ComputeBasicValues();
  bool phase_one = SumInfeasibility() > 0.0;
  bool bland = false;
  int degenerate_run = 0;
  int updates = 0;
  std::vector<double> cb;
  std::vector<double> y;
  std::vector<double> alpha;
  std::vector<double> column(m_, 0.0);
  // Devex reference weights.
  std::vector<double> weight(n_ + m_, 1.0);
  std::vector<double> unit_row(m_, 0.0);
  std::vector<double> rho;
  // Phase-two reduced costs, updated along the pivot row between refreshes.
  std::vector<double> d(n_ + m_, 0.0);
  bool d_fresh = false;
  bool d_valid = false;
  std::vector<double> pivot_row(n_ + m_, 0.0);
  std::vector<char> in_row(n_ + m_, 0);
  std::vector<int> row_support;

  while (true) {
    if (iterations_ >= max_iterations) {
      throw SolverError("iteration limit reached at pivot step " + std::to_string(iterations_));
    }
    if (updates >= options_.refactor_interval) {
      Refactor();
      ComputeBasicValues();
      updates = 0;
      d_valid = false;
      // Drift can push basics outside their bounds; repair in phase one.
      if (!phase_one && SumInfeasibility() > 0.0) phase_one = true;
    }
    if (phase_one && SumInfeasibility() == 0.0) phase_one = false;

    if (phase_one || !d_valid) {
      PhaseCosts(phase_one, &cb);
      lu_.Btran(cb, &y);
      for (int j = 0; j < n_ + m_; ++j) {
        d[j] = status_[j] == VarStatus::kBasic ? 0.0 : ReducedCost(j, y, phase_one);
      }
      d_fresh = true;
      d_valid = !phase_one;
    }

    // Pricing.
    int entering = -1;
    double entering_dir = 0.0;
    double best_score = 0.0;
    for (int j = 0; j < n_ + m_; ++j) {
      VarStatus st = status_[j];
      if (st == VarStatus::kBasic || st == VarStatus::kFixed) continue;
      const double dj = d[j];
      double dir = 0.0;
      if ((st == VarStatus::kAtLower || st == VarStatus::kFreeZero) && dj < -kDualFeasTol) {
        dir = 1.0;
      } else if ((st == VarStatus::kAtUpper || st == VarStatus::kFreeZero) && dj > kDualFeasTol) {
        dir = -1.0;
      }
      if (dir == 0.0) continue;
      if (bland) {
        entering = j;
        entering_dir = dir;
        break;
      }
      const double score = dj * dj / weight[j];
      if (score > best_score) {
        best_score = score;
        entering = j;
        entering_dir = dir;
      }
    }

    if (entering < 0 && !d_fresh) {
      // Confirm against freshly computed reduced costs.
      d_valid = false;
      continue;
    }
    if (entering < 0 && !saved_lb_.empty()) {
      // Finished on the perturbed bounds; restore them and clean up.
      Unperturb();
      DualCleanup();
      Refactor();
      ComputeBasicValues();
      updates = 0;
      d_valid = false;
      phase_one = SumInfeasibility() > 0.0;
      degenerate_run = 0;
      continue;
    }
    if (entering < 0) {
      if (phase_one) {
        if (SumInfeasibility() > kPrimalFeasTol * std::max(1, m_)) {
          // Phase-one duals are the infeasibility certificate.
          return Finish(LpStatus::kInfeasible, y, {});
        }
        phase_one = false;
        continue;
      }
      return Finish(LpStatus::kOptimal, y, {});
    }

    std::fill(column.begin(), column.end(), 0.0);
    for (const SparseEntry& e : columns_[entering]) column[e.index] = e.value;
    lu_.Ftran(column, &alpha);

    // Ratio test (Harris two-pass, or smallest index in Bland mode).
    const double relax = bland ? 0.0 : kPrimalFeasTol;
    double t_max = ub_[entering] - lb_[entering];
    if (!std::isfinite(t_max)) t_max = kInfinity;
    auto limit = [&](int k, double relaxation, double* t, bool* to_upper) -> bool {
      const double a = alpha[k];
      if (std::abs(a) <= (bland ? kBlandPivotTol : kPivotTol)) return false;
      const int var = basis_[k];
      const double rate = -entering_dir * a;
      const double xv = x_[var];
      if (rate < 0.0) {
        if (phase_one && xv > ub_[var] + kPrimalFeasTol) {
          *t = (xv - ub_[var] + relaxation) / -rate;
          *to_upper = true;
          return true;
        }
        if (std::isfinite(lb_[var]) && !(phase_one && xv < lb_[var] - kPrimalFeasTol)) {
          *t = (xv - lb_[var] + relaxation) / -rate;
          *to_upper = false;
          return true;
        }
        return false;
      }
      if (phase_one && xv < lb_[var] - kPrimalFeasTol) {
        *t = (lb_[var] - xv + relaxation) / rate;
        *to_upper = false;
        return true;
      }
      if (std::isfinite(ub_[var]) && !(phase_one && xv > ub_[var] + kPrimalFeasTol)) {
        *t = (ub_[var] - xv + relaxation) / rate;
        *to_upper = true;
        return true;
      }
      return false;
    };
    double harris = kInfinity;
    for (int k = 0; k < m_; ++k) {
      double t;
      bool up;
      if (limit(k, relax, &t, &up)) harris = std::min(harris, std::max(t, 0.0));
    }
    int leave_pos = -1;
    bool leave_to_upper = false;
    double step = 0.0;
    if (harris < kInfinity) {
      double best_alpha = -1.0;
      int best_index = -1;
      for (int k = 0; k < m_; ++k) {
        double t;
        bool up;
        if (!limit(k, 0.0, &t, &up)) continue;
        t = std::max(t, 0.0);
        if (t > harris + (bland ? 1e-12 : 0.0)) continue;
        bool better;
        if (bland) {
          better = best_index < 0 || basis_[k] < best_index;
        } else {
          better = std::abs(alpha[k]) > best_alpha;
        }
        if (better) {
          best_alpha = std::abs(alpha[k]);
          best_index = basis_[k];
          leave_pos = k;
          leave_to_upper = up;
          step = t;
        }
      }
    }

    const bool bound_flip = t_max < kInfinity && (leave_pos < 0 || t_max <= step);
    if (leave_pos < 0 && !bound_flip) {
      if (phase_one) throw SolverError("phase one unbounded at pivot step " + std::to_string(iterations_));
      if (!d_fresh) {
        d_valid = false;
        continue;
      }
      if (!saved_lb_.empty()) {
        Unperturb();
        updates = 0;
        d_valid = false;
        phase_one = SumInfeasibility() > 0.0;
        degenerate_run = 0;
        continue;
      }
      std::vector<double> ray(n_, 0.0);
      if (entering < n_) ray[entering] = entering_dir;
      for (int k = 0; k < m_; ++k) {
        if (basis_[k] < n_) ray[basis_[k]] = -entering_dir * alpha[k];
      }
      return Finish(LpStatus::kUnbounded, y, ray);
    }
    if (bound_flip) step = t_max;

    // Primal update.
    if (step != 0.0) {
      x_[entering] += entering_dir * step;
      for (int k = 0; k < m_; ++k) {
        if (alpha[k] != 0.0) x_[basis_[k]] -= entering_dir * step * alpha[k];
      }
    }
    ++iterations_;
    if (bland) ++bland_iterations_;
    if (step <= 1e-12) {
      if (++degenerate_run >= options_.degenerate_limit) {
        // Perturbation first; Bland once that has been spent.
        if (perturbations_ < kMaxPerturbations) {
          Perturb();
          degenerate_run = 0;
        } else {
          bland = true;
        }
      }
    } else {
      degenerate_run = 0;
      bland = false;
    }

    if (bound_flip) {
      if (entering_dir > 0) {
        status_[entering] = VarStatus::kAtUpper;
        x_[entering] = ub_[entering];
      } else {
        status_[entering] = VarStatus::kAtLower;
        x_[entering] = lb_[entering];
      }
      continue;
    }

    if (std::abs(alpha[leave_pos]) < kPivotTol) {
      throw SolverError("tiny pivot at pivot step " + std::to_string(iterations_));
    }
    const int leaving = basis_[leave_pos];
    {
      std::fill(unit_row.begin(), unit_row.end(), 0.0);
      unit_row[leave_pos] = 1.0;
      lu_.Btran(unit_row, &rho);
      const double pivot = alpha[leave_pos];
      // Pivot row alpha_rj = rho^T A_j over the rows where rho is nonzero.
      row_support.clear();
      for (int i = 0; i < m_; ++i) {
        const double ri = rho[i];
        if (ri == 0.0) continue;
        for (const SparseEntry& e : row_entries_[i]) {
          const int j = e.index;
          if (status_[j] == VarStatus::kBasic || status_[j] == VarStatus::kFixed || j == entering) continue;
          if (!in_row[j]) {
            in_row[j] = 1;
            row_support.push_back(j);
          }
          pivot_row[j] += ri * e.value;
        }
      }
      const double wq = weight[entering];
      const double dq = d[entering];
      double largest = 0.0;
      for (int j : row_support) {
        const double ratio = pivot_row[j] / pivot;
        weight[j] = std::max(weight[j], ratio * ratio * wq);
        largest = std::max(largest, weight[j]);
        if (d_valid) d[j] -= dq * ratio;
        pivot_row[j] = 0.0;
        in_row[j] = 0;
      }
      if (d_valid) {
        d[leaving] = -dq / pivot;
        d[entering] = 0.0;
        d_fresh = false;
      }
      weight[leaving] = std::max(wq / (pivot * pivot), 1.0);
      if (largest > 1e8) std::fill(weight.begin(), weight.end(), 1.0);
    }
    if (lb_[leaving] == ub_[leaving]) {
      status_[leaving] = VarStatus::kFixed;
      x_[leaving] = lb_[leaving];
    } else if (leave_to_upper) {
      status_[leaving] = VarStatus::kAtUpper;
      x_[leaving] = ub_[leaving];
    } else {
      status_[leaving] = VarStatus::kAtLower;
      x_[leaving] = lb_[leaving];
    }
    position_[leaving] = -1;
    basis_[leave_pos] = entering;
    position_[entering] = leave_pos;
    status_[entering] = VarStatus::kBasic;
    lu_.AddEta(leave_pos, alpha);
    ++updates;
  }
}

LpSolution Simplex::Finish(LpStatus status, const std::vector<double>& y, const std::vector<double>& ray) {
  LpSolution sol;
  sol.status = status;
  sol.iterations = iterations_;
  sol.bland_iterations = bland_iterations_;
  sol.refactorizations = refactorizations_;
  sol.basis.resize(n_ + m_);
  for (int j = 0; j < n_ + m_; ++j) {
    switch (status_[j]) {
      case VarStatus::kBasic: sol.basis[j] = BasisStatus::kBasic; break;
      case VarStatus::kAtUpper: sol.basis[j] = BasisStatus::kAtUpper; break;
      case VarStatus::kFreeZero: sol.basis[j] = BasisStatus::kFree; break;
      default: sol.basis[j] = BasisStatus::kAtLower; break;
    }
  }
  const double sign = lp_.sense() == ObjectiveSense::kMinimize ? 1.0 : -1.0;
  if (status == LpStatus::kOptimal) {
    if (m_ > 0) {
      // Clean primal values against a fresh factorization.
      Refactor();
      ComputeBasicValues();
    }
    sol.primal.assign(x_.begin(), x_.begin() + n_);
    for (int j = 0; j < n_; ++j) {
      // Snap nonbasic values exactly onto their bounds.
      if (status_[j] == VarStatus::kAtLower || status_[j] == VarStatus::kFixed) sol.primal[j] = lb_[j];
      if (status_[j] == VarStatus::kAtUpper) sol.primal[j] = ub_[j];
    }
    std::vector<double> cb;
    std::vector<double> yy;
    if (m_ > 0) {
      PhaseCosts(false, &cb);
      lu_.Btran(cb, &yy);
    }
    sol.duals.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) sol.duals[i] = sign * yy[i] * row_scale_[i];
    sol.reduced_costs.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) sol.reduced_costs[j] = lp_.objective()[j];
    for (int i = 0; i < m_; ++i) {
      for (const LpTerm& t : lp_.rows()[i].terms) sol.reduced_costs[t.variable] -= t.coefficient * sol.duals[i];
    }
    sol.objective = lp_.Evaluate(sol.primal);
  } else if (status == LpStatus::kInfeasible) {
    sol.ray.assign(m_, 0.0);
    double largest = 0.0;
    for (int i = 0; i < m_; ++i) {
      sol.ray[i] = y[i] * row_scale_[i];
      largest = std::max(largest, std::abs(sol.ray[i]));
    }
    // Round-off on rows with one-sided bounds would otherwise open the
    // interval test to infinity.
    for (double& v : sol.ray) {
      if (std::abs(v) <= 1e-11 * largest) v = 0.0;
    }
  } else {
    sol.ray = ray;
    sol.primal.assign(x_.begin(), x_.begin() + n_);
  }
  return sol;
}

double RowActivity(const LpRow& row, const std::vector<double>& x) {
  double total = 0.0;
  for (const LpTerm& t : row.terms) total += t.coefficient * x[t.variable];
  return total;
}

}  // namespace

LpSolution SolveLp(const LinearProgram& lp, const LpOptions& options) {
  Simplex simplex(lp, options);
  return simplex.Run();
}

CertificateCheck VerifyCertificate(const LinearProgram& lp, const LpSolution& sol, double tolerance) {
  CertificateCheck check;
  const int n = lp.num_variables();
  const int m = lp.num_rows();
  if (static_cast<int>(sol.primal.size()) != n || static_cast<int>(sol.duals.size()) != m) {
    throw StructuralError("certificate dimension mismatch: primal " + std::to_string(sol.primal.size()) + "/" +
                          std::to_string(n) + ", duals " + std::to_string(sol.duals.size()) + "/" +
                          std::to_string(m));
  }
  if (sol.status != LpStatus::kOptimal) {
    check.detail = "solution does not claim optimality";
    return check;
  }
  const double sense = lp.sense() == ObjectiveSense::kMinimize ? 1.0 : -1.0;
  const std::vector<double>& x = sol.primal;
  const std::vector<double>& y = sol.duals;

  // Primal feasibility, scaled by the row's largest coefficient.
  for (int i = 0; i < m; ++i) {
    const LpRow& row = lp.rows()[i];
    double scale = 1.0;
    for (const LpTerm& t : row.terms) scale = std::max(scale, std::abs(t.coefficient));
    double activity = RowActivity(row, x);
    double violation = 0.0;
    switch (row.relation) {
      case RowRelation::kLessEqual: violation = activity - row.rhs; break;
      case RowRelation::kGreaterEqual: violation = row.rhs - activity; break;
      case RowRelation::kEqual: violation = std::abs(activity - row.rhs); break;
    }
    check.primal_residual = std::max(check.primal_residual, violation / scale);
  }
  for (int j = 0; j < n; ++j) {
    check.primal_residual = std::max(check.primal_residual, lp.lower()[j] - x[j]);
    check.primal_residual = std::max(check.primal_residual, x[j] - lp.upper()[j]);
  }

  // Dual feasibility in minimization form (multiply by sense).
  std::vector<double> reduced(lp.objective());
  for (int i = 0; i < m; ++i) {
    for (const LpTerm& t : lp.rows()[i].terms) reduced[t.variable] -= t.coefficient * y[i];
  }
  double dual_objective = 0.0;
  for (int i = 0; i < m; ++i) {
    const LpRow& row = lp.rows()[i];
    double ym = sense * y[i];
    if (row.relation == RowRelation::kLessEqual) check.dual_residual = std::max(check.dual_residual, ym);
    if (row.relation == RowRelation::kGreaterEqual) check.dual_residual = std::max(check.dual_residual, -ym);
    dual_objective += y[i] * row.rhs;
  }
  for (int j = 0; j < n; ++j) {
    double d = sense * reduced[j];
    double lower = lp.lower()[j];
    double upper = lp.upper()[j];
    if (d > 0) {
      if (std::isfinite(lower)) {
        dual_objective += reduced[j] * lower;
      } else {
        check.dual_residual = std::max(check.dual_residual, d);
      }
    } else if (d < 0) {
      if (std::isfinite(upper)) {
        dual_objective += reduced[j] * upper;
      } else {
        check.dual_residual = std::max(check.dual_residual, -d);
      }
    }
  }
  check.primal_objective = lp.Evaluate(x);
  check.dual_objective = dual_objective;
  check.gap = std::abs(check.primal_objective - dual_objective);
  const double gap_limit = tolerance * (1.0 + std::abs(check.primal_objective));
  check.pass = check.primal_residual <= tolerance && check.dual_residual <= tolerance && check.gap <= gap_limit;
  std::ostringstream detail;
  detail << "primal_residual=" << check.primal_residual << " dual_residual=" << check.dual_residual
         << " gap=" << check.gap;
  check.detail = detail.str();
  return check;
}

bool VerifyInfeasibility(const LinearProgram& lp, const LpSolution& sol, double tolerance) {
  if (sol.status != LpStatus::kInfeasible || static_cast<int>(sol.ray.size()) != lp.num_rows()) return false;
  const int n = lp.num_variables();
  std::vector<double> g(n, 0.0);
  for (int i = 0; i < lp.num_rows(); ++i) {
    for (const LpTerm& t : lp.rows()[i].terms) g[t.variable] += t.coefficient * sol.ray[i];
  }
  // Range of y^T A x over the variable box.
  double gmin = 0.0;
  double gmax = 0.0;
  for (int j = 0; j < n; ++j) {
    if (std::abs(g[j]) <= 1e-12) continue;
    double a = g[j] * lp.lower()[j];
    double b = g[j] * lp.upper()[j];
    if (std::isnan(a)) a = 0.0;
    if (std::isnan(b)) b = 0.0;
    gmin += std::min(a, b);
    gmax += std::max(a, b);
  }
  // Range of y^T w over the row bounds.
  double wmin = 0.0;
  double wmax = 0.0;
  for (int i = 0; i < lp.num_rows(); ++i) {
    const LpRow& row = lp.rows()[i];
    double yi = sol.ray[i];
    if (yi == 0.0) continue;
    double lo = row.relation == RowRelation::kLessEqual ? -kInfinity : row.rhs;
    double hi = row.relation == RowRelation::kGreaterEqual ? kInfinity : row.rhs;
    double a = yi * lo;
    double b = yi * hi;
    wmin += std::min(a, b);
    wmax += std::max(a, b);
  }
  return gmax < wmin - tolerance || gmin > wmax + tolerance;
}

bool VerifyUnboundedRay(const LinearProgram& lp, const LpSolution& sol, double tolerance) {
  if (sol.status != LpStatus::kUnbounded || static_cast<int>(sol.ray.size()) != lp.num_variables()) return false;
  const std::vector<double>& r = sol.ray;
  double norm = 0.0;
  for (double v : r) norm = std::max(norm, std::abs(v));
  if (norm == 0.0) return false;
  for (int j = 0; j < lp.num_variables(); ++j) {
    double v = r[j] / norm;
    if (std::isfinite(lp.lower()[j]) && v < -tolerance) return false;
    if (std::isfinite(lp.upper()[j]) && v > tolerance) return false;
  }
  for (const LpRow& row : lp.rows()) {
    double a = RowActivity(row, r) / norm;
    if (row.relation == RowRelation::kLessEqual && a > tolerance) return false;
    if (row.relation == RowRelation::kGreaterEqual && a < -tolerance) return false;
    if (row.relation == RowRelation::kEqual && std::abs(a) > tolerance) return false;
  }
  double slope = lp.Evaluate(r) / norm;
  return lp.sense() == ObjectiveSense::kMinimize ? slope < -tolerance : slope > tolerance;
}

}  // namespace robustnet
