#ifndef ROBUSTNET_LP_H_
#define ROBUSTNET_LP_H_

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace robustnet {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kLpTolerance = 1e-7;

enum class ObjectiveSense { kMinimize, kMaximize };
enum class RowRelation { kLessEqual, kEqual, kGreaterEqual };

struct LpTerm {
  int variable;
  double coefficient;
};

struct LpRow {
  std::vector<LpTerm> terms;
  RowRelation relation = RowRelation::kLessEqual;
  double rhs = 0.0;
};

// A linear program with bounded variables and <=, =, >= rows.
class LinearProgram {
 public:
  explicit LinearProgram(ObjectiveSense sense = ObjectiveSense::kMinimize) : sense_(sense) {}

  int AddVariable(double lower, double upper, double objective, std::string name = {});
  int AddRow(std::vector<LpTerm> terms, RowRelation relation, double rhs);
  void SetObjective(int variable, double coefficient) { objective_[variable] = coefficient; }
  void SetSense(ObjectiveSense sense) { sense_ = sense; }

  ObjectiveSense sense() const { return sense_; }
  int num_variables() const { return static_cast<int>(objective_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  const std::vector<double>& objective() const { return objective_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<LpRow>& rows() const { return rows_; }
  const std::string& name(int variable) const { return names_[variable]; }

  // Throws StructuralError on out-of-range indices, NaN/inf coefficients,
  // lower > upper, or a duplicated variable within one row.
  void Validate() const;

  double Evaluate(const std::vector<double>& x) const;

  // CPLEX-LP style text, for cross-checking with external solvers.
  std::string ToLpFormat() const;

 private:
  ObjectiveSense sense_;
  std::vector<double> objective_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<std::string> names_;
  std::vector<LpRow> rows_;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

// Simplex basis status of a variable, or of a row's activity for rows.
enum class BasisStatus { kBasic, kAtLower, kAtUpper, kFree };

std::string ToString(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> primal;
  // Row multipliers y in the convention objective = sum_i y_i b_i + bound
  // terms of the reduced costs c - A^T y. For minimization y_i <= 0 on <=
  // rows and y_i >= 0 on >= rows (signs flip for maximization).
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  double objective = 0.0;
  // kInfeasible: row multipliers proving infeasibility (see
  // VerifyInfeasibility). kUnbounded: improving primal direction.
  std::vector<double> ray;
  int iterations = 0;
  int bland_iterations = 0;
  int refactorizations = 0;
  // Final basis, variables first then rows.
  std::vector<BasisStatus> basis;
};

struct LpOptions {
  double tolerance = kLpTolerance;
  int refactor_interval = 64;
  // Consecutive degenerate pivots before the bounds are perturbed.
  int degenerate_limit = 50;
  long max_iterations = 0;  // 0: automatic
  // Write ToLpFormat() to this path before solving (empty: off).
  std::string dump_path;
  // Starting basis, variables then rows; ignored unless it has exactly
  // num_variables + num_rows entries. Surplus basics are dropped and
  // missing ones filled with row activities.
  std::vector<BasisStatus> start_basis;
};

// Bounded-variable revised primal simplex. Devex pricing, bound
// perturbation on degenerate stalls (removed by a dual simplex cleanup),
// Bland as the last resort, sparse LU with product-form updates.
// Throws SolverError on numerical breakdown (message names the pivot step).
LpSolution SolveLp(const LinearProgram& lp, const LpOptions& options = {});

struct CertificateCheck {
  bool pass = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  std::string detail;
};

// Recomputes primal/dual residuals and the duality gap from scratch using
// only the LP data and sol.primal / sol.duals.
CertificateCheck VerifyCertificate(const LinearProgram& lp, const LpSolution& sol,
                                   double tolerance = kLpTolerance);

// Checks that sol.ray is a valid Farkas certificate (kInfeasible) or an
// improving unbounded direction (kUnbounded).
bool VerifyInfeasibility(const LinearProgram& lp, const LpSolution& sol, double tolerance = kLpTolerance);
bool VerifyUnboundedRay(const LinearProgram& lp, const LpSolution& sol, double tolerance = kLpTolerance);

}  // namespace robustnet

#endif  // ROBUSTNET_LP_H_
