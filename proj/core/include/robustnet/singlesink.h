#ifndef ROBUSTNET_SINGLESINK_H_
#define ROBUSTNET_SINGLESINK_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "robustnet/instances.h"
#include "robustnet/lp.h"
#include "robustnet/model.h"
#include "robustnet/network.h"
#include "robustnet/rational.h"
#include "robustnet/report.h"

namespace robustnet {

// ---------------------------------------------------------------------------
// FR (dynamic routing) on unit single-sink hose instances.

struct FrReservation {
  CapacityReservation reservation;
  Rational cost;
};

// beta on every port edge, 1 on every expander edge. The network must have
// the gap shape: a sink adjacent to every terminal through a port of cost
// n/k, all other edges cost 1 (StructuralError otherwise).
FrReservation HandcraftedFrReservation(const Network& network, int k);
FrReservation HandcraftedFrReservation(const GapInstance& instance);

struct FrSolveOptions {
  // Exhaustive separation over all S; defaults to on when there are at
  // most 20 non-sink nodes. Without it the value is only a lower bound.
  std::optional<bool> exact_separation;
  int max_rounds = 1000;
  int cuts_per_round = 64;
  int local_search_starts = 64;
  std::uint64_t seed = 0;
  LpOptions lp;
};

struct FrSolution {
  CapacityReservation reservation;
  SolveReport report;
  // Node sets S of the cuts in the final LP.
  std::vector<std::vector<NodeIndex>> cuts;
};

// min sum c(e) u(e) s.t. u(delta(S)) >= min(|S cap T|, k) for all S not
// containing the sink, by lazy cut generation starting from the singleton
// cuts and S = V.
FrSolution SolveFrSingleSink(const Network& network, int k, const FrSolveOptions& options = {});

// ---------------------------------------------------------------------------
// MPR through the buy-and-rent problem.

struct BarSolution {
  int k = 0;
  std::vector<double> gamma;  // bought capacity per edge, in [0, 1]
  // One commodity per terminal (network terminal order) into the sink.
  RoutingTemplate routing;
  double buy_cost = 0.0;
  double rent_cost = 0.0;
  double total = 0.0;
};

// Builds a solution and fills in the three cost fields.
BarSolution MakeBarSolution(const Network& network, int k, std::vector<double> gamma, RoutingTemplate routing);

struct BarCostBreakdown {
  double buy = 0.0;
  double rent = 0.0;
  double total = 0.0;
  std::vector<double> rent_per_terminal;
};

// Recomputes buy k sum gamma c and rent sum c max(0, f_i - gamma) from
// scratch. Throws StructuralError when gamma leaves [0, 1], a flow is not a
// unit flow into the sink, or terminals are missing.
BarCostBreakdown BarCost(const Network& network, int k, const BarSolution& solution);

// gamma(e) = k-th largest load f_i(e).
std::vector<double> OptimalGammaFromTemplate(const Network& network, const RoutingTemplate& routing, int k);

// Smallest cost-minimizing gamma for a fixed template, the (k+1)-th largest
// load. Used to break rent/buy ties toward renting.
std::vector<double> RentPreferringGamma(const Network& network, const RoutingTemplate& routing, int k);

struct MprResult {
  BarSolution solution;
  SolveReport report;
};

struct MprLpOptions {
  long max_variables = 200000;
  LpOptions lp;
};

// Number of LP columns SolveMprBarLp would create.
long MprLpVariableCount(const Network& network);

// Monolithic LP over gamma, oriented flows and rental slacks. Throws
// RefusedError above the variable guard (use SolveMprDecomposition).
MprResult SolveMprBarLp(const Network& network, int k, const MprLpOptions& options = {});

struct MprDecompositionOptions {
  // Relative gap between the best value and the best lower bound at which
  // the search stops.
  double tolerance = 1e-3;
  int max_iterations = 3000;  // cutting-plane iterations
  std::optional<std::vector<double>> warm_start;
  int threads = 1;
  // Called after every iteration with (iteration, best value, lower bound,
  // cuts, seconds so far).
  std::function<void(int, double, double, int, double)> progress;
};

// Minimizes
//   Phi(gamma) = k sum c gamma + sum_i mincost_i(gamma)
// with disaggregated cutting planes (one cut per terminal per evaluation)
// inside a box around the best point. The best evaluated point is the
// reported cost (bound=upper); the lower bound is the larger of the global
// model minimum and the Lagrangian value at the model's multipliers.
MprResult SolveMprDecomposition(const Network& network, int k, const MprDecompositionOptions& options = {});

// Phi(gamma) with its subgradient and the matching Lagrangian lower bound.
struct PhiEvaluation {
  double value = 0.0;
  double rent = 0.0;
  double lower_bound = 0.0;
  std::vector<double> subgradient;
  RoutingTemplate routing;
  // Per terminal: mincost_i(gamma) and the free-capacity prices p_i, so
  // that mincost_i(g) >= mincost_i(gamma) - p_i . (g - gamma).
  std::vector<double> rents;
  std::vector<std::vector<double>> free_prices;
};
PhiEvaluation EvaluatePhi(const Network& network, int k, const std::vector<double>& gamma, int threads = 1);

}  // namespace robustnet

#endif  // ROBUSTNET_SINGLESINK_H_
