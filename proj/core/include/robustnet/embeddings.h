#ifndef ROBUSTNET_EMBEDDINGS_H_
#define ROBUSTNET_EMBEDDINGS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "robustnet/model.h"
#include "robustnet/network.h"
#include "robustnet/rational.h"
#include "robustnet/report.h"

namespace robustnet {

// Finite metric over named points, exact distances.
struct FiniteMetric {
  std::vector<std::string> ids;
  std::vector<std::vector<Rational>> distance;

  int size() const { return static_cast<int>(ids.size()); }
};

// Throws StructuralError on asymmetry, negative or nonzero diagonal
// entries, or a triangle inequality violation.
void ValidateMetric(const FiniteMetric& metric);

// Shortest-path metric of a connected network (StructuralError otherwise).
FiniteMetric MetricFromNetwork(const Network& network);

// Hierarchical decomposition tree. Node 0 is the root; leaves are the
// points. Every node carries the level of its cluster, the cluster members
// and a representative point (the member with the smallest id).
struct TreeMetricNode {
  int parent = -1;
  Rational length;  // edge to the parent
  int level = 0;
  int center = -1;          // point whose ball carved this cluster
  int representative = -1;  // point index
  std::vector<int> members;
};

struct DominatingTreeMetric {
  std::vector<TreeMetricNode> nodes;
  std::vector<int> leaf;  // tree node of each point
  std::uint64_t seed = 0;
  double beta = 1.0;  // radius factor in [1, 2)
  std::vector<int> permutation;
  Rational scale;  // metric distances were multiplied by this before carving

  Rational Distance(int x, int y) const;
};

// Random permutation and beta drawn log-uniformly from [1, 2); the
// distances are scaled so the smallest positive one is 1 and the top level
// is the next power of two above the diameter. Level-i clusters are balls
// of radius beta 2^(i-1) around the first permuted center that reaches
// them, and the edge above a level-i node has length 2^(i+1) / scale, so
// the tree dominates the metric.
DominatingTreeMetric FrtEmbed(const FiniteMetric& metric, std::uint64_t seed);

// Capacity of every tree edge (indexed by the child node; entry 0 unused):
// the largest demand between the points below it and the rest.
std::vector<Rational> TreeOptimalCapacity(const Network& network, const DominatingTreeMetric& tree,
                                          const DemandUniverse& universe);

struct TransferResult {
  CapacityReservation reservation;  // u_{G(T)}
  RoutingTemplate routing;          // images of the tree paths
  Rational cost;                    // cost of u_{G(T)}
  // sum over tree edges of u_T times d_G between the representatives.
  Rational contracted_tree_cost;
  // sum over tree edges of u_T times the tree edge length.
  Rational tree_cost;
};

// Contracts every tree node to its representative, then reserves u_T along a
// shortest network path for each tree edge; overlapping paths add up. The
// routing sends every demand pair along the images of its tree path with
// loops cut out.
TransferResult TreeTemplateTransfer(const Network& network, const DominatingTreeMetric& tree,
                                    const std::vector<Rational>& capacity, const DemandUniverse& universe);

struct TreeSamplingOptions {
  int samples = 50;
  std::uint64_t seed = 0;
  int threads = 1;
  // When given, the report records cost / fr_lower_bound.
  std::optional<double> fr_lower_bound;
};

struct TreeSamplingResult {
  TransferResult best;
  int best_sample = -1;
  std::uint64_t best_seed = 0;
  std::vector<Rational> sample_costs;
  SolveReport report;
};

// Seed of sample i, derived from the base seed alone (SplitMix64).
std::uint64_t SampleSeed(std::uint64_t base, int i);

// Cheapest transferred reservation over the sampled trees; ties go to the
// lower sample index. bound=upper for SPR.
TreeSamplingResult SprUpperBoundViaTrees(const Network& network, const DemandUniverse& universe,
                                         const TreeSamplingOptions& options = {});

}  // namespace robustnet

#endif  // ROBUSTNET_EMBEDDINGS_H_
