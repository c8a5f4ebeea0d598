#include "robustnet/flow.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <numeric>
#include <queue>
#include <random>
#include <thread>

#include "robustnet/errors.h"

namespace robustnet {
namespace {

constexpr double kResidualEps = 1e-12;

void CheckCapacities(const Network& network, const std::vector<Rational>& capacity) {
  if (static_cast<int>(capacity.size()) != network.num_edges()) {
    throw StructuralError("capacity vector does not cover every edge");
  }
  for (const Rational& c : capacity) {
    if (c < 0) throw StructuralError("negative capacity");
  }
}

std::vector<int> IdRanks(const Network& network) {
  std::vector<int> order(network.num_nodes());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return network.id(x) < network.id(y); });
  std::vector<int> rank(network.num_nodes());
  for (int i = 0; i < static_cast<int>(order.size()); ++i) rank[order[i]] = i;
  return rank;
}

}  // namespace

MaxFlowResult MaxFlowMinCut(const FlowProblem& problem) {
  if (problem.network == nullptr) throw StructuralError("flow problem without network");
  const Network& net = *problem.network;
  const int n = net.num_nodes();
  CheckCapacities(net, problem.capacity);
  if (static_cast<int>(problem.supply.size()) != n) throw StructuralError("supply vector does not cover every node");
  if (problem.sink < 0 || problem.sink >= n) throw StructuralError("flow sink out of range");
  for (const Rational& s : problem.supply) {
    if (s < 0) throw StructuralError("negative supply");
  }
  if (problem.supply[problem.sink] != 0) throw StructuralError("sink carries a supply");

  // gmpxx leaves Rational(p, q) uncanonical; comparisons need canonical form.
  std::vector<Rational> capacity = problem.capacity;
  for (Rational& c : capacity) c.canonicalize();
  std::vector<Rational> supply = problem.supply;
  for (Rational& s : supply) s.canonicalize();

  MaxFlowResult result;
  result.flow.assign(net.num_edges(), Rational(0));
  result.supply_used.assign(n, Rational(0));
  const int source = n;

  // Residual capacity of moving flow from `from` across edge e.
  auto residual = [&](EdgeIndex e, NodeIndex from) -> Rational {
    const Edge& edge = net.edge(e);
    if (from == edge.a) return Rational(capacity[e] - result.flow[e]);
    return Rational(capacity[e] + result.flow[e]);
  };

  std::vector<int> parent_edge(n + 1);
  std::vector<int> parent_node(n + 1);
  while (true) {
    std::fill(parent_node.begin(), parent_node.end(), -2);
    parent_node[source] = -1;
    std::deque<int> queue;
    for (NodeIndex v = 0; v < n; ++v) {
      if (supply[v] - result.supply_used[v] > 0) {
        parent_node[v] = source;
        parent_edge[v] = -1;
        queue.push_back(v);
      }
    }
    while (!queue.empty() && parent_node[problem.sink] == -2) {
      int v = queue.front();
      queue.pop_front();
      for (const Incidence& inc : net.incident(v)) {
        if (parent_node[inc.neighbor] != -2) continue;
        if (residual(inc.edge, v) > 0) {
          parent_node[inc.neighbor] = v;
          parent_edge[inc.neighbor] = inc.edge;
          queue.push_back(inc.neighbor);
        }
      }
    }
    if (parent_node[problem.sink] == -2) break;
    Rational bottleneck;
    bool first = true;
    int v = problem.sink;
    while (parent_node[v] != source) {
      Rational r = residual(parent_edge[v], parent_node[v]);
      if (first || r < bottleneck) bottleneck = r;
      first = false;
      v = parent_node[v];
    }
    Rational head = supply[v] - result.supply_used[v];
    if (first || head < bottleneck) bottleneck = head;
    result.supply_used[v] += bottleneck;
    v = problem.sink;
    while (parent_node[v] != source) {
      EdgeIndex e = parent_edge[v];
      if (parent_node[v] == net.edge(e).a) {
        result.flow[e] += bottleneck;
      } else {
        result.flow[e] -= bottleneck;
      }
      v = parent_node[v];
    }
    result.value += bottleneck;
  }

  // The source side is everything that cannot reach the sink in the final
  // residual graph, i.e. the largest minimum cut.
  std::vector<bool> reaches_sink(n, false);
  reaches_sink[problem.sink] = true;
  std::deque<int> queue{problem.sink};
  while (!queue.empty()) {
    int x = queue.front();
    queue.pop_front();
    for (const Incidence& inc : net.incident(x)) {
      if (!reaches_sink[inc.neighbor] && residual(inc.edge, inc.neighbor) > 0) {
        reaches_sink[inc.neighbor] = true;
        queue.push_back(inc.neighbor);
      }
    }
  }
  result.source_side.assign(n, false);
  for (NodeIndex v = 0; v < n; ++v) result.source_side[v] = !reaches_sink[v];
  for (NodeIndex v = 0; v < n; ++v) {
    if (!result.source_side[v]) result.cut_capacity += supply[v];
  }
  for (EdgeIndex e = 0; e < net.num_edges(); ++e) {
    const Edge& edge = net.edge(e);
    if (result.source_side[edge.a] != result.source_side[edge.b]) result.cut_capacity += capacity[e];
  }
  if (result.cut_capacity != result.value) throw SolverError("max-flow value differs from the cut capacity");
  return result;
}

MinCostFlowResult MinCostUnitFlow(const Network& network, const std::vector<double>& free_cap,
                                  const std::vector<double>& rent_cost, NodeIndex source, NodeIndex sink) {
  const int n = network.num_nodes();
  const int m = network.num_edges();
  if (static_cast<int>(free_cap.size()) != m || static_cast<int>(rent_cost.size()) != m) {
    throw StructuralError("free capacity or rent vector does not cover every edge");
  }
  if (source < 0 || source >= n || sink < 0 || sink >= n) throw StructuralError("flow endpoint out of range");
  if (source == sink) throw ArgumentError("min-cost flow source equals sink");
  for (int e = 0; e < m; ++e) {
    if (!(free_cap[e] >= 0.0) || !(rent_cost[e] >= 0.0) || !std::isfinite(rent_cost[e])) {
      throw StructuralError("free capacity and rent cost must be finite and nonnegative");
    }
  }

  // Arc 4e+0/1: free a->b and its reverse, 4e+2/3: rent a->b and its reverse,
  // then the same block for b->a at 4m + 4e.
  struct Arc {
    int to;
    double cap;
    double cost;
  };
  std::vector<Arc> arcs;
  arcs.reserve(8 * m);
  std::vector<std::vector<int>> out(n);
  auto add = [&](int u, int v, double cap, double cost) {
    out[u].push_back(static_cast<int>(arcs.size()));
    arcs.push_back({v, cap, cost});
    out[v].push_back(static_cast<int>(arcs.size()));
    arcs.push_back({u, 0.0, -cost});
  };
  for (int dir = 0; dir < 2; ++dir) {
    for (int e = 0; e < m; ++e) {
      int u = dir == 0 ? network.edge(e).a : network.edge(e).b;
      int v = network.edge(e).Other(u);
      add(u, v, free_cap[e], 0.0);
      add(u, v, 2.0, rent_cost[e]);
    }
  }

  MinCostFlowResult result;
  std::vector<double> pi(n, 0.0);
  std::vector<double> dist(n);
  std::vector<int> pred(n);
  const double inf = std::numeric_limits<double>::infinity();
  auto dijkstra = [&]() {
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(pred.begin(), pred.end(), -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0.0;
    heap.push({0.0, source});
    while (!heap.empty()) {
      auto [d, u] = heap.top();
      heap.pop();
      if (d > dist[u]) continue;
      for (int a : out[u]) {
        const Arc& arc = arcs[a];
        if (arc.cap <= kResidualEps) continue;
        double reduced = std::max(0.0, arc.cost + pi[u] - pi[arc.to]);
        double nd = d + reduced;
        if (nd < dist[arc.to]) {
          dist[arc.to] = nd;
          pred[arc.to] = a;
          heap.push({nd, arc.to});
        }
      }
    }
  };

  double remaining = 1.0;
  while (remaining > kResidualEps) {
    dijkstra();
    if (dist[sink] == inf) throw InfeasibleError("source and sink are disconnected");
    for (int v = 0; v < n; ++v) {
      if (dist[v] < inf) pi[v] += dist[v];
    }
    double push = remaining;
    for (int v = sink; v != source; v = arcs[pred[v] ^ 1].to) push = std::min(push, arcs[pred[v]].cap);
    for (int v = sink; v != source; v = arcs[pred[v] ^ 1].to) {
      arcs[pred[v]].cap -= push;
      arcs[pred[v] ^ 1].cap += push;
    }
    remaining -= push;
    ++result.augmentations;
  }

  // Distances from the source in the final residual graph.
  dijkstra();
  result.potential.assign(n, inf);
  for (int v = 0; v < n; ++v) {
    if (dist[v] < inf) result.potential[v] = dist[v] + pi[v] - pi[source];
  }

  result.flow = EmptyCommodity(network, source, sink);
  result.free_price_forward.assign(m, 0.0);
  result.free_price_backward.assign(m, 0.0);
  for (int e = 0; e < m; ++e) {
    // Flow on an arc is the residual capacity of its reverse.
    double ab = arcs[4 * e + 1].cap + arcs[4 * e + 3].cap;
    double ba = arcs[4 * m + 4 * e + 1].cap + arcs[4 * m + 4 * e + 3].cap;
    double net_flow = ab - ba;
    if (net_flow > 0) {
      result.flow.forward[e] = net_flow;
    } else {
      result.flow.backward[e] = -net_flow;
    }
    result.rental_cost += rent_cost[e] * std::max(0.0, std::abs(net_flow) - free_cap[e]);
    const double pa = result.potential[network.edge(e).a];
    const double pb = result.potential[network.edge(e).b];
    if (std::isfinite(pa) && std::isfinite(pb)) {
      result.free_price_forward[e] = std::clamp(pb - pa, 0.0, rent_cost[e]);
      result.free_price_backward[e] = std::clamp(pa - pb, 0.0, rent_cost[e]);
    }
  }
  return result;
}

SubsetRoutability CheckSubsetRoutable(const Network& network, const CapacityReservation& u,
                                      const std::vector<NodeIndex>& subset, NodeIndex r) {
  CheckCapacities(network, u.capacity);
  SubsetRoutability out;
  if (subset.empty()) return out;
  FlowProblem problem;
  problem.network = &network;
  problem.capacity = u.capacity;
  problem.supply.assign(network.num_nodes(), Rational(0));
  problem.sink = r;
  for (NodeIndex v : subset) {
    if (v < 0 || v >= network.num_nodes()) throw StructuralError("subset node out of range");
    if (v == r) throw StructuralError("subset contains the sink");
    if (problem.supply[v] != 0) throw StructuralError("subset lists a node twice");
    problem.supply[v] = 1;
  }
  MaxFlowResult flow = MaxFlowMinCut(problem);
  out.demand = static_cast<long>(subset.size());
  out.flow_value = flow.value;
  out.flow = std::move(flow.flow);
  out.routable = flow.value >= out.demand;
  if (!out.routable) {
    for (NodeIndex v = 0; v < network.num_nodes(); ++v) {
      if (flow.source_side[v]) out.cut.push_back(v);
    }
    out.cut_value = flow.cut_capacity;
  }
  return out;
}

const char* ToString(FrVerdict verdict) {
  switch (verdict) {
    case FrVerdict::kFeasible: return "feasible";
    case FrVerdict::kInfeasible: return "infeasible";
    case FrVerdict::kFeasibleCertified: return "feasible_certified";
    case FrVerdict::kInconclusive: return "inconclusive";
  }
  return "unknown";
}

namespace {

FrFeasibility ExactCutCheck(const Network& network, CapacityReservation u, int k, NodeIndex r) {
  for (Rational& c : u.capacity) c.canonicalize();
  std::vector<NodeIndex> nodes;
  for (NodeIndex v = 0; v < network.num_nodes(); ++v) {
    if (v != r) nodes.push_back(v);
  }
  const int w = static_cast<int>(nodes.size());
  if (w > 20) {
    throw RefusedError("exact FR feasibility is limited to 20 non-sink nodes (got " + std::to_string(w) + ")");
  }
  // Scale capacities to integers so the Gray-code walk does no gcd work.
  mpz_class scale = 1;
  for (const Rational& c : u.capacity) mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), c.get_den_mpz_t());
  std::vector<mpz_class> cap(network.num_edges());
  for (EdgeIndex e = 0; e < network.num_edges(); ++e) {
    cap[e] = u.capacity[e].get_num() * (scale / u.capacity[e].get_den());
  }
  std::vector<int> position(network.num_nodes(), -1);
  for (int i = 0; i < w; ++i) position[nodes[i]] = i;

  FrFeasibility result;
  std::vector<bool> in_set(network.num_nodes(), false);
  mpz_class cut = 0;
  int terminals_in = 0;
  bool have_min = false;
  mpz_class best_slack;
  std::uint64_t best_mask = 0;
  std::uint64_t mask = 0;
  const std::uint64_t total = std::uint64_t{1} << w;
  mpz_class slack;
  for (std::uint64_t step = 1; step < total; ++step) {
    int bit = __builtin_ctzll(step);
    NodeIndex v = nodes[bit];
    bool entering = !in_set[v];
    for (const Incidence& inc : network.incident(v)) {
      bool crossing_before = entering ? in_set[inc.neighbor] : !in_set[inc.neighbor];
      if (crossing_before) {
        cut -= cap[inc.edge];
      } else {
        cut += cap[inc.edge];
      }
    }
    in_set[v] = entering;
    mask ^= std::uint64_t{1} << bit;
    if (network.IsTerminal(v)) terminals_in += entering ? 1 : -1;
    slack = cut - scale * std::min(terminals_in, k);
    // Ties prefer the larger set.
    if (!have_min || slack < best_slack ||
        (slack == best_slack && __builtin_popcountll(mask) > __builtin_popcountll(best_mask))) {
      best_slack = slack;
      best_mask = mask;
      have_min = true;
    }
  }
  result.checks = static_cast<std::int64_t>(total - 1);
  if (!have_min) {
    result.verdict = FrVerdict::kFeasible;
    return result;
  }
  result.min_slack = Rational(best_slack, scale);
  result.min_slack->canonicalize();
  if (best_slack < 0) {
    result.verdict = FrVerdict::kInfeasible;
    int count = 0;
    for (int i = 0; i < w; ++i) {
      if (best_mask >> i & 1) {
        result.witness_cut.push_back(nodes[i]);
        if (network.IsTerminal(nodes[i])) ++count;
      }
    }
    std::vector<bool> member(network.num_nodes(), false);
    for (NodeIndex v : result.witness_cut) member[v] = true;
    for (EdgeIndex e = 0; e < network.num_edges(); ++e) {
      if (member[network.edge(e).a] != member[network.edge(e).b]) result.witness_capacity += u.capacity[e];
    }
    result.witness_requirement = std::min(count, k);
  } else {
    result.verdict = FrVerdict::kFeasible;
  }
  return result;
}

FrFeasibility SampledCheck(const Network& network, const CapacityReservation& u, int k, NodeIndex r,
                           const FrCheckOptions& options) {
  if (!options.seed) throw ArgumentError("sampled FR feasibility requires a seed");
  if (options.samples < 1) throw ArgumentError("sampled FR feasibility needs at least one sample");
  std::vector<NodeIndex> terminals = network.terminals();
  const int size = std::min<int>(k, static_cast<int>(terminals.size()));
  std::mt19937_64 rng(*options.seed);
  std::vector<std::vector<NodeIndex>> subsets(options.samples);
  for (auto& subset : subsets) {
    std::vector<NodeIndex> pool = terminals;
    for (int i = 0; i < size; ++i) {
      std::uniform_int_distribution<int> pick(i, static_cast<int>(pool.size()) - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    subset.assign(pool.begin(), pool.begin() + size);
    std::sort(subset.begin(), subset.end());
  }

  std::vector<char> failed(subsets.size(), 0);
  auto worker = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < subsets.size(); i += stride) {
      failed[i] = CheckSubsetRoutable(network, u, subsets[i], r).routable ? 0 : 1;
    }
  };
  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(subsets.size())));
  if (threads == 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t, threads);
    for (auto& th : pool) th.join();
  }

  FrFeasibility result;
  result.checks = options.samples;
  result.verdict = FrVerdict::kInconclusive;
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    if (!failed[i]) continue;
    SubsetRoutability witness = CheckSubsetRoutable(network, u, subsets[i], r);
    result.verdict = FrVerdict::kInfeasible;
    result.witness_subset = subsets[i];
    result.witness_cut = witness.cut;
    result.witness_capacity = witness.cut_value;
    result.witness_requirement = witness.demand;
    break;
  }
  return result;
}

}  // namespace

FrFeasibility CheckFrFeasibility(const Network& network, const CapacityReservation& u, int k,
                                 const FrCheckOptions& options) {
  if (k < 1) throw ArgumentError("FR feasibility needs k >= 1");
  CheckCapacities(network, u.capacity);
  NodeIndex r = network.RequireSink();
  switch (options.mode) {
    case FrCheckMode::kExactBruteForce:
      return ExactCutCheck(network, u, k, r);
    case FrCheckMode::kSampled:
      return SampledCheck(network, u, k, r, options);
    case FrCheckMode::kCutCondition: {
      FrFeasibility result;
      Rational deficiency = MinCutDeficiency(network, u, r);
      result.min_slack = deficiency;
      result.checks = 1;
      result.verdict = deficiency >= 0 ? FrVerdict::kFeasibleCertified : FrVerdict::kInconclusive;
      return result;
    }
  }
  throw ArgumentError("unknown FR feasibility mode");
}

Rational MinCutDeficiency(const Network& network, const CapacityReservation& u, NodeIndex r) {
  CheckCapacities(network, u.capacity);
  FlowProblem problem;
  problem.network = &network;
  problem.capacity = u.capacity;
  problem.supply.assign(network.num_nodes(), Rational(0));
  problem.sink = r;
  Rational terminals = 0;
  for (NodeIndex v : network.terminals()) {
    if (v == r) continue;
    problem.supply[v] = 1;
    terminals += 1;
  }
  return MaxFlowMinCut(problem).value - terminals;
}

ShortestPaths::ShortestPaths(const Network& network) : ShortestPaths(network, [&] {
  std::vector<Rational> w;
  w.reserve(network.num_edges());
  for (const Edge& e : network.edges()) w.push_back(e.cost);
  return w;
}()) {}

ShortestPaths::ShortestPaths(const Network& network, const std::vector<Rational>& weights) : network_(&network) {
  const int n = network.num_nodes();
  if (static_cast<int>(weights.size()) != network.num_edges()) {
    throw StructuralError("weight vector does not cover every edge");
  }
  for (const Rational& w : weights) {
    if (w < 0) throw StructuralError("negative shortest-path weight");
  }
  std::vector<int> rank = IdRanks(network);
  dist_.assign(n, std::vector<Rational>(n, kUnreachable));
  pred_edge_.assign(n, std::vector<EdgeIndex>(n, -1));
  for (NodeIndex s = 0; s < n; ++s) {
    std::vector<Rational>& dist = dist_[s];
    std::vector<bool> done(n, false);
    std::vector<int> order(n, -1);
    // Simple O(n^2) selection keeps ties deterministic by id rank.
    dist[s] = 0;
    for (int round = 0; round < n; ++round) {
      int best = -1;
      for (int v = 0; v < n; ++v) {
        if (done[v] || dist[v] < 0) continue;
        if (best < 0 || dist[v] < dist[best] || (dist[v] == dist[best] && rank[v] < rank[best])) best = v;
      }
      if (best < 0) break;
      done[best] = true;
      order[best] = round;
      for (const Incidence& inc : network.incident(best)) {
        Rational nd = dist[best] + weights[inc.edge];
        Rational& cur = dist[inc.neighbor];
        if (!done[inc.neighbor] && (cur < 0 || nd < cur)) cur = nd;
      }
    }
    for (NodeIndex v = 0; v < n; ++v) {
      if (v == s || order[v] < 0) continue;
      int chosen = -1;
      for (const Incidence& inc : network.incident(v)) {
        NodeIndex w = inc.neighbor;
        if (order[w] < 0 || order[w] >= order[v]) continue;
        if (dist[w] + weights[inc.edge] != dist[v]) continue;
        if (chosen < 0 || rank[w] < rank[network.edge(chosen).Other(v)]) chosen = inc.edge;
      }
      pred_edge_[s][v] = chosen;
    }
  }
}

const Rational& ShortestPaths::Distance(NodeIndex from, NodeIndex to) const {
  if (dist_[from][to] < 0) throw InfeasibleError("nodes " + network_->id(from) + " and " + network_->id(to) +
                                                 " are disconnected");
  return dist_[from][to];
}

double ShortestPaths::DistanceOrInfinity(NodeIndex from, NodeIndex to) const {
  if (dist_[from][to] < 0) return std::numeric_limits<double>::infinity();
  return dist_[from][to].get_d();
}

std::vector<EdgeIndex> ShortestPaths::PathEdges(NodeIndex from, NodeIndex to) const {
  std::vector<EdgeIndex> edges;
  if (dist_[from][to] < 0) return edges;
  for (NodeIndex v = to; v != from;) {
    EdgeIndex e = pred_edge_[from][v];
    edges.push_back(e);
    v = network_->edge(e).Other(v);
  }
  std::reverse(edges.begin(), edges.end());
  return edges;
}

std::vector<NodeIndex> ShortestPaths::PathNodes(NodeIndex from, NodeIndex to) const {
  std::vector<NodeIndex> nodes;
  if (dist_[from][to] < 0) return nodes;
  nodes.push_back(from);
  for (EdgeIndex e : PathEdges(from, to)) nodes.push_back(network_->edge(e).Other(nodes.back()));
  return nodes;
}

std::vector<FlowPath> PathDecompose(const Network& network, const Commodity& commodity) {
  const int m = network.num_edges();
  if (static_cast<int>(commodity.forward.size()) != m || static_cast<int>(commodity.backward.size()) != m) {
    throw StructuralError("commodity does not cover every edge");
  }
  std::vector<double> fwd = commodity.forward;
  std::vector<double> bwd = commodity.backward;
  for (int e = 0; e < m; ++e) {
    double both = std::min(fwd[e], bwd[e]);
    fwd[e] -= both;
    bwd[e] -= both;
  }
  auto amount = [&](EdgeIndex e, NodeIndex from) -> double& {
    return from == network.edge(e).a ? fwd[e] : bwd[e];
  };
  auto next_arc = [&](NodeIndex v) -> EdgeIndex {
    EdgeIndex best = -1;
    for (const Incidence& inc : network.incident(v)) {
      if (amount(inc.edge, v) > kResidualEps && (best < 0 || inc.edge < best)) best = inc.edge;
    }
    return best;
  };

  std::vector<FlowPath> paths;
  const NodeIndex s = commodity.source;
  const NodeIndex t = commodity.target;
  std::vector<int> on_walk(network.num_nodes(), -1);
  for (int guard = 0; guard < 4 * (m + 1) * (m + 1); ++guard) {
    std::vector<NodeIndex> nodes{s};
    std::vector<EdgeIndex> edges;
    std::fill(on_walk.begin(), on_walk.end(), -1);
    on_walk[s] = 0;
    if (next_arc(s) < 0) break;
    bool progressed = false;
    while (true) {
      NodeIndex v = nodes.back();
      if (v == t) {
        double push = 1.0;
        for (std::size_t i = 0; i < edges.size(); ++i) push = std::min(push, amount(edges[i], nodes[i]));
        for (std::size_t i = 0; i < edges.size(); ++i) amount(edges[i], nodes[i]) -= push;
        paths.push_back({nodes, edges, push});
        progressed = true;
        break;
      }
      EdgeIndex e = next_arc(v);
      if (e < 0) {
        // Dead end from conservation noise: drop the walk's bottleneck.
        double push = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < edges.size(); ++i) push = std::min(push, amount(edges[i], nodes[i]));
        for (std::size_t i = 0; i < edges.size(); ++i) amount(edges[i], nodes[i]) -= push;
        progressed = !edges.empty();
        break;
      }
      NodeIndex w = network.edge(e).Other(v);
      if (on_walk[w] >= 0) {
        // Cancel the cycle w -> ... -> v -> w.
        int start = on_walk[w];
        double push = amount(e, v);
        for (std::size_t i = start; i < edges.size(); ++i) push = std::min(push, amount(edges[i], nodes[i]));
        for (std::size_t i = start; i < edges.size(); ++i) amount(edges[i], nodes[i]) -= push;
        amount(e, v) -= push;
        for (std::size_t i = start + 1; i < nodes.size(); ++i) on_walk[nodes[i]] = -1;
        nodes.resize(start + 1);
        edges.resize(start);
        continue;
      }
      on_walk[w] = static_cast<int>(nodes.size());
      nodes.push_back(w);
      edges.push_back(e);
    }
    if (!progressed) break;
  }
  return paths;
}

std::vector<NodeIndex> EraseLoops(const std::vector<NodeIndex>& walk) {
  std::vector<NodeIndex> out;
  for (NodeIndex v : walk) {
    auto it = std::find(out.begin(), out.end(), v);
    if (it != out.end()) {
      out.erase(it + 1, out.end());
    } else {
      out.push_back(v);
    }
  }
  return out;
}

}  // namespace robustnet
