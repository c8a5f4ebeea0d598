#ifndef ROBUSTNET_TREES_H_
#define ROBUSTNET_TREES_H_

#include <functional>
#include <vector>

#include "robustnet/model.h"
#include "robustnet/network.h"
#include "robustnet/rational.h"
#include "robustnet/report.h"

namespace robustnet {

// Edge subset of the network forming a tree that joins every demand
// endpoint. Other nodes may be absent or hang off as Steiner nodes.
struct TreeTemplate {
  std::vector<EdgeIndex> edges;
};

// Matrix-tree theorem (log-determinant in doubles), so only an estimate
// for huge counts. 0 for disconnected graphs.
double CountSpanningTrees(const Network& network);

// Calls `visit` with the edge list of every spanning tree, by include /
// exclude branching on edges with union-find contraction. Throws
// RefusedError when the tree count exceeds `budget`.
void ForEachSpanningTree(const Network& network, long budget,
                         const std::function<void(const std::vector<EdgeIndex>&)>& visit);

struct TreeCost {
  std::vector<Rational> capacity;  // per network edge, 0 off the tree
  Rational cost;
};

// capacity(e) = max over D of the demand crossing the two components of
// T - e. Throws StructuralError when T has a cycle, a repeated or unknown
// edge, or leaves a demand endpoint disconnected.
TreeCost TreeTemplateCost(const Network& network, const DemandUniverse& universe, const TreeTemplate& tree);

// The routing a tree template implies: one commodity per demand pair along
// its tree path (terminal -> sink for single-sink hoses).
RoutingTemplate TreeRouting(const Network& network, const DemandUniverse& universe, const TreeTemplate& tree);

enum class TrMode { kExactSmall, kMstHeuristic, kSptHeuristic };

struct TrOptions {
  TrMode mode = TrMode::kExactSmall;
  long tree_budget = 1000000;
};

struct TrResult {
  TreeTemplate tree;
  TreeCost cost;
  SolveReport report;
};

// Exact mode enumerates spanning trees (RefusedError above the budget); the
// heuristics take the minimum spanning tree or the shortest-path tree from
// the sink (the first demand endpoint when there is no sink).
TrResult SolveTr(const Network& network, const DemandUniverse& universe, const TrOptions& options = {});

// (m - (n - 1)) (g - 1) for a single explicit matrix with unit demand on
// every edge and unit costs: every spanning tree leaves out m - n + 1 demand
// edges, and each of them closes a cycle of length >= g. 0 for forests.
// Throws StructuralError on any other universe or costs.
Rational TrGirthLowerBound(const Network& network, const DemandUniverse& universe);

// Routes every demand pair of an explicit universe on the edge joining it
// (StructuralError when a pair is not an edge).
RoutingTemplate EdgeIdentityTemplate(const Network& network, const ExplicitMatrices& universe);

}  // namespace robustnet

#endif  // ROBUSTNET_TREES_H_
