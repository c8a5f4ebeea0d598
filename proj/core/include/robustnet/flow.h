#ifndef ROBUSTNET_FLOW_H_
#define ROBUSTNET_FLOW_H_

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "robustnet/model.h"
#include "robustnet/network.h"
#include "robustnet/rational.h"

namespace robustnet {

// Undirected capacities plus per-node supplies feeding one sink. Supplies
// are modelled as arcs from an implicit super source.
struct FlowProblem {
  const Network* network = nullptr;
  std::vector<Rational> capacity;  // per edge
  std::vector<Rational> supply;    // per node
  NodeIndex sink = -1;
};

struct MaxFlowResult {
  Rational value;
  // Signed flow along the stored orientation a->b of each edge.
  std::vector<Rational> flow;
  std::vector<Rational> supply_used;
  // Source side of the largest minimum cut: nodes that cannot reach the sink
  // in the final residual graph.
  std::vector<bool> source_side;
  Rational cut_capacity;
};

// Edmonds-Karp over exact rationals. The returned flow value always equals
// the capacity of the returned cut; a mismatch throws SolverError.
MaxFlowResult MaxFlowMinCut(const FlowProblem& problem);

struct MinCostFlowResult {
  Commodity flow;
  // sum_e rent_cost(e) * max(0, f(e) - free_cap(e)), f counted per direction.
  double rental_cost = 0.0;
  // Shortest-path distances from the source in the final residual graph.
  std::vector<double> potential;
  // Dual price of the free capacity in each direction, in [0, rent_cost(e)].
  std::vector<double> free_price_forward;
  std::vector<double> free_price_backward;
  int augmentations = 0;
};

// Unit flow from source to sink where each direction of edge e carries up to
// free_cap[e] at no charge and any excess at rent_cost[e] per unit.
// Successive shortest paths with Dijkstra on reduced costs. Throws
// InfeasibleError when source and sink are disconnected.
MinCostFlowResult MinCostUnitFlow(const Network& network, const std::vector<double>& free_cap,
                                  const std::vector<double>& rent_cost, NodeIndex source, NodeIndex sink);

struct SubsetRoutability {
  bool routable = true;
  Rational flow_value;
  Rational demand;
  // Violated cut S (nodes on the terminal side) when not routable.
  std::vector<NodeIndex> cut;
  Rational cut_value;  // u(delta(S)) + |X \ S|
  std::vector<Rational> flow;
};

// One unit from every node of X to r under capacities u.
SubsetRoutability CheckSubsetRoutable(const Network& network, const CapacityReservation& u,
                                      const std::vector<NodeIndex>& subset, NodeIndex r);

enum class FrCheckMode { kExactBruteForce, kSampled, kCutCondition };

enum class FrVerdict { kFeasible, kInfeasible, kFeasibleCertified, kInconclusive };

const char* ToString(FrVerdict verdict);

struct FrCheckOptions {
  FrCheckMode mode = FrCheckMode::kExactBruteForce;
  int samples = 1000;
  std::optional<std::uint64_t> seed;  // required for kSampled
  int threads = 1;
};

struct FrFeasibility {
  FrVerdict verdict = FrVerdict::kInconclusive;
  // Infeasible: the cut S (exact mode) or the unroutable subset X and its
  // cut (sampled mode).
  std::vector<NodeIndex> witness_cut;
  std::vector<NodeIndex> witness_subset;
  Rational witness_capacity;
  Rational witness_requirement;
  // Exact mode: minimum of u(delta(S)) - min(|S cap T|, k) over all S.
  std::optional<Rational> min_slack;
  std::int64_t checks = 0;
};

// Exact mode tests u(delta(S)) >= min(|S cap T|, k) for every S not
// containing the sink (at most 20 non-sink nodes, else RefusedError).
// Sampled mode can only answer infeasible or inconclusive. Cut-condition mode
// answers feasible_certified when min_cut_deficiency >= 0.
FrFeasibility CheckFrFeasibility(const Network& network, const CapacityReservation& u, int k,
                                 const FrCheckOptions& options);

// min over S not containing r of u(delta(S)) - |S cap T|, via one max flow
// from an auxiliary node joined to every terminal at capacity 1.
Rational MinCutDeficiency(const Network& network, const CapacityReservation& u, NodeIndex r);

inline const Rational kUnreachable = Rational(-1);

// All-pairs shortest paths over exact rational weights. Ties are broken
// toward the lexicographically smallest predecessor id, so paths are
// deterministic.
class ShortestPaths {
 public:
  ShortestPaths(const Network& network, const std::vector<Rational>& weights);
  // Uses the network's own edge costs.
  explicit ShortestPaths(const Network& network);

  bool Reachable(NodeIndex from, NodeIndex to) const { return pred_edge_[from][to] >= 0 || from == to; }
  // Throws InfeasibleError for disconnected pairs; see DistanceOrInfinity.
  const Rational& Distance(NodeIndex from, NodeIndex to) const;
  double DistanceOrInfinity(NodeIndex from, NodeIndex to) const;
  // Node sequence from `from` to `to`; empty when unreachable.
  std::vector<NodeIndex> PathNodes(NodeIndex from, NodeIndex to) const;
  std::vector<EdgeIndex> PathEdges(NodeIndex from, NodeIndex to) const;
  int num_nodes() const { return static_cast<int>(dist_.size()); }

 private:
  const Network* network_;
  std::vector<std::vector<Rational>> dist_;
  std::vector<std::vector<EdgeIndex>> pred_edge_;
};

struct FlowPath {
  std::vector<NodeIndex> nodes;
  std::vector<EdgeIndex> edges;
  double amount = 0.0;
};

// Deterministic decomposition of a commodity into source->target paths.
// Flow on cycles is cancelled and dropped. Arcs are scanned in edge index
// order.
// Cuts the cycles out of a node walk, keeping the first visit of each node.
std::vector<NodeIndex> EraseLoops(const std::vector<NodeIndex>& walk);

std::vector<FlowPath> PathDecompose(const Network& network, const Commodity& commodity);

}  // namespace robustnet

#endif  // ROBUSTNET_FLOW_H_
