#ifndef ROBUSTNET_SPR_H_
#define ROBUSTNET_SPR_H_

#include <cstdint>
#include <string>
#include <vector>

#include "robustnet/model.h"
#include "robustnet/network.h"
#include "robustnet/rational.h"
#include "robustnet/report.h"

namespace robustnet {

// Single-path routing on a unit single-sink hose with b_r = k: every
// terminal sends along one simple path P_v into the sink, and edge e needs
// min(N(e), k) where N(e) counts the paths through e.
struct SprSolution {
  int k = 0;
  std::vector<std::vector<NodeIndex>> paths;  // node paths, network terminal order
  std::vector<int> usage;                     // N(e)
  Rational cost;
};

// Validates the paths (simple, adjacent steps, terminal -> sink) and
// computes N and the cost. Throws StructuralError otherwise.
SprSolution MakeSprSolution(const Network& network, int k, std::vector<std::vector<NodeIndex>> paths);

// The routing template behind a solution, one unit commodity per terminal.
RoutingTemplate SprTemplate(const Network& network, const SprSolution& solution);

enum class SprStrategy { kShortestPathTree, kSampleAugment, kLocalSearch };

const char* ToString(SprStrategy strategy);
SprStrategy ParseSprStrategy(const std::string& text);

struct SprResult {
  SprSolution solution;
  SolveReport report;
};

// spt: every terminal on its shortest path. sample_augment: terminals are
// marked with probability 1/k, the shortest-path tree from the sink to the
// marked set is bought and the others rent to their nearest tree node.
// local_search: from spt, reroute one terminal at a time on its cheapest
// marginal path until no move helps. Always bound=upper.
SprResult SolveSprHeuristic(const Network& network, int k, SprStrategy strategy, std::uint64_t seed = 0);

struct SprExactOptions {
  int max_terminals = 9;
  long tree_budget = 1000000;
};

// Best forced routing over all spanning trees; some optimal SPR template
// is supported on a tree, so the result is exact. RefusedError above either
// guard.
SprResult SolveSprExactSmall(const Network& network, int k, const SprExactOptions& options = {});

}  // namespace robustnet

#endif  // ROBUSTNET_SPR_H_
