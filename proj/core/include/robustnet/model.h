#ifndef ROBUSTNET_MODEL_H_
#define ROBUSTNET_MODEL_H_

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "robustnet/network.h"
#include "robustnet/rational.h"

namespace robustnet {

// ---------------------------------------------------------------------------
// Demand universes.

// All demand is between terminals and one sink r. marginals[v] is b_v (zero
// for non-terminals), sink_marginal is b_r.
struct SingleSinkHose {
  NodeIndex sink = -1;
  std::vector<Rational> marginals;
  Rational sink_marginal;
};

// Demand only between sources and sinks; marginals[v] bounds the total
// traffic terminating at v.
struct AsymmetricHose {
  std::vector<NodeIndex> sources;
  std::vector<NodeIndex> sinks;
  std::vector<Rational> marginals;
};

struct DemandEntry {
  NodeIndex i;
  NodeIndex j;
  Rational value;
};

// Symmetric demand matrix stored as its upper triangle (i < j, value > 0).
struct DemandMatrix {
  std::vector<DemandEntry> entries;
};

struct ExplicitMatrices {
  std::vector<DemandMatrix> matrices;
};

using DemandUniverse = std::variant<SingleSinkHose, AsymmetricHose, ExplicitMatrices>;

// Throws StructuralError if the universe violates its invariants or does not
// fit the network.
void ValidateUniverse(const Network& network, const DemandUniverse& universe);

// b_v = 1 on every terminal, b_r = k.
SingleSinkHose UnitSingleSinkHose(const Network& network, int k);

// Returns k when the universe is a single-sink hose with b_v = 1 on every
// terminal of the network and an integral b_r = k >= 1.
std::optional<int> UnitHoseParameter(const Network& network, const DemandUniverse& universe);

// Canonicalizes (i < j), merges nothing: duplicate pairs, diagonal entries
// and negative values are StructuralErrors.
DemandMatrix MakeDemandMatrix(std::vector<DemandEntry> entries);

// ---------------------------------------------------------------------------
// Routing templates.

// One unit flow from source to target. forward[e] is the flow along the
// stored orientation a->b of edge e, backward[e] along b->a.
struct Commodity {
  NodeIndex source = -1;
  NodeIndex target = -1;
  std::vector<double> forward;
  std::vector<double> backward;

  double Load(EdgeIndex e) const { return forward[e] + backward[e]; }
};

struct RoutingTemplate {
  std::vector<Commodity> commodities;

  // Index of the commodity joining {u, v} in either orientation.
  std::optional<int> Find(NodeIndex u, NodeIndex v) const;
};

// A zero commodity sized for the network.
Commodity EmptyCommodity(const Network& network, NodeIndex source, NodeIndex target);

// Adds `amount` along a node path (consecutive nodes must be adjacent).
void AddPathFlow(const Network& network, const std::vector<NodeIndex>& path, double amount,
                 Commodity* commodity);

inline constexpr double kFlowTolerance = 1e-9;

struct TemplateValidation {
  bool valid = true;
  // Max absolute conservation residual per commodity.
  std::vector<double> residuals;
  std::vector<std::string> problems;
};

// Conservation residuals per commodity. Throws StructuralError for negative
// flows, wrong vector sizes or a single-sink commodity whose source is not a
// terminal.
TemplateValidation ValidateTemplate(const Network& network, const RoutingTemplate& routing);

// ---------------------------------------------------------------------------
// Capacity reservations.

struct CapacityReservation {
  std::vector<Rational> capacity;  // one entry per edge
};

CapacityReservation ZeroReservation(const Network& network);

// sum_e u(e) c(e), exact. Throws StructuralError when u does not cover every
// edge or has a negative entry.
Rational ReservationCost(const Network& network, const CapacityReservation& reservation);

// u(e) = sum of the k largest single-sink loads f_i(e). k is truncated to the
// number of commodities; k <= 0 is an ArgumentError.
CapacityReservation TemplateCapacitySingleSink(const Network& network, const RoutingTemplate& routing,
                                               int k);

// u(e) = max over D in the universe of the load routed on e by the template.
// Explicit universes take the max over the list; hose universes solve one LP
// per edge.
CapacityReservation TemplateCapacityPolytope(const Network& network, const RoutingTemplate& routing,
                                             const DemandUniverse& universe);

// max over D in the universe of the demand between `side` and its
// complement (side[v] for every node). Closed forms: min(b(A), b_r) for a
// single-sink hose with A the side away from the sink; the two transport
// directions min(b(S cap A), b(T \ A)) + min(b(S \ A), b(T cap A)) for an
// asymmetric hose; the largest crossing sum for explicit matrices.
Rational MaxCrossingDemand(const Network& network, const DemandUniverse& universe, const std::vector<bool>& side);

// Nodes that carry demand: positive marginals (and the sink when b_r > 0),
// or the support of the explicit matrices. Sorted.
std::vector<NodeIndex> DemandEndpoints(const Network& network, const DemandUniverse& universe);

// Node pairs a template must route: (v, sink) for positive single-sink
// marginals, sources x sinks for asymmetric hoses, the distinct (i, j)
// pairs of explicit matrices in order of appearance.
std::vector<std::pair<NodeIndex, NodeIndex>> DemandPairs(const Network& network, const DemandUniverse& universe);

// Sum of the k largest values (duplicates counted). Helper shared by the
// template capacity and buy-and-rent code.
double SumOfLargest(std::vector<double> values, int k);
// k-th largest value (1-based), 0 if fewer than k values.
double KthLargest(std::vector<double> values, int k);

}  // namespace robustnet

#endif  // ROBUSTNET_MODEL_H_
