#include "robustnet/trees.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <variant>

#include "robustnet/errors.h"
#include "robustnet/instances.h"

namespace robustnet {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Union-find with an undo log, for the include branch of the enumeration.
class RollbackUnionFind {
 public:
  explicit RollbackUnionFind(int n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }

  int Find(int x) const {
    while (parent_[x] != x) x = parent_[x];
    return x;
  }
  bool Unite(int a, int b) {
    a = Find(a);
    b = Find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    log_.push_back(b);
    return true;
  }
  void Undo() {
    const int b = log_.back();
    log_.pop_back();
    size_[parent_[b]] -= size_[b];
    parent_[b] = b;
  }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
  std::vector<int> log_;
};

// Rooted view of a tree template: parent edge per node and an Euler
// interval so that "u below e" is an O(1) test.
struct RootedTree {
  std::vector<EdgeIndex> parent_edge;  // -1 at the root and off the tree
  std::vector<int> tin;
  std::vector<int> tout;
  std::vector<NodeIndex> order;  // preorder
  bool Contains(NodeIndex v) const { return tin[v] >= 0; }
  // True when v lies in the subtree hanging below node `top`.
  bool Below(NodeIndex v, NodeIndex top) const { return tin[v] >= tin[top] && tin[v] < tout[top]; }
};

RootedTree Root(const Network& network, const std::vector<EdgeIndex>& edges, NodeIndex root) {
  const int n = network.num_nodes();
  std::vector<std::vector<std::pair<NodeIndex, EdgeIndex>>> adj(n);
  for (EdgeIndex e : edges) {
    adj[network.edge(e).a].push_back({network.edge(e).b, e});
    adj[network.edge(e).b].push_back({network.edge(e).a, e});
  }
  RootedTree t;
  t.parent_edge.assign(n, -1);
  t.tin.assign(n, -1);
  t.tout.assign(n, -1);
  int clock = 0;
  // Iterative DFS.
  std::vector<std::pair<NodeIndex, std::size_t>> stack{{root, 0}};
  t.tin[root] = clock++;
  t.order.push_back(root);
  while (!stack.empty()) {
    auto& [v, next] = stack.back();
    if (next == adj[v].size()) {
      t.tout[v] = clock;
      stack.pop_back();
      continue;
    }
    const auto [w, e] = adj[v][next++];
    if (t.tin[w] >= 0) continue;
    t.parent_edge[w] = e;
    t.tin[w] = clock++;
    t.order.push_back(w);
    stack.push_back({w, 0});
  }
  return t;
}

void CheckTreeShape(const Network& network, const std::vector<EdgeIndex>& edges) {
  RollbackUnionFind uf(network.num_nodes());
  std::set<EdgeIndex> seen;
  for (EdgeIndex e : edges) {
    if (e < 0 || e >= network.num_edges()) throw StructuralError("tree references unknown edge " + std::to_string(e));
    if (!seen.insert(e).second) throw StructuralError("tree repeats edge " + network.EdgeKey(e));
    if (!uf.Unite(network.edge(e).a, network.edge(e).b)) {
      throw StructuralError("tree template has a cycle through " + network.EdgeKey(e));
    }
  }
}

// The node the tree hangs from: the sink for single-sink hoses, else the
// first demand endpoint.
NodeIndex TreeRoot(const Network& network, const DemandUniverse& universe, const std::vector<NodeIndex>& endpoints) {
  if (const auto* hose = std::get_if<SingleSinkHose>(&universe)) return hose->sink;
  if (!endpoints.empty()) return endpoints.front();
  return network.num_nodes() > 0 ? 0 : -1;
}

// Double-precision crossing demand, used while searching over trees.
class FastCrossing {
 public:
  FastCrossing(const Network& network, const DemandUniverse& universe) : universe_(&universe) {
    const int n = network.num_nodes();
    if (const auto* hose = std::get_if<SingleSinkHose>(&universe)) {
      weight_.resize(n);
      for (NodeIndex v = 0; v < n; ++v) weight_[v] = hose->marginals[v].get_d();
      cap_ = hose->sink_marginal.get_d();
    } else if (const auto* asym = std::get_if<AsymmetricHose>(&universe)) {
      source_.assign(n, 0.0);
      sink_.assign(n, 0.0);
      for (NodeIndex v : asym->sources) source_[v] = asym->marginals[v].get_d();
      for (NodeIndex v : asym->sinks) sink_[v] = asym->marginals[v].get_d();
      total_source_ = std::accumulate(source_.begin(), source_.end(), 0.0);
      total_sink_ = std::accumulate(sink_.begin(), sink_.end(), 0.0);
    } else {
      for (const DemandMatrix& m : std::get<ExplicitMatrices>(universe).matrices) {
        std::vector<std::tuple<NodeIndex, NodeIndex, double>> entries;
        for (const DemandEntry& entry : m.entries) entries.emplace_back(entry.i, entry.j, entry.value.get_d());
        matrices_.push_back(std::move(entries));
      }
    }
  }

  // Demand across the edge above `top` in the rooted tree.
  double Across(const RootedTree& tree, NodeIndex top, const std::vector<NodeIndex>& nodes) const {
    if (std::holds_alternative<SingleSinkHose>(*universe_)) {
      // The root is the sink, so the subtree side is the side away from it.
      double below = 0.0;
      for (NodeIndex v : nodes) {
        if (weight_[v] != 0.0 && tree.Contains(v) && tree.Below(v, top)) below += weight_[v];
      }
      return std::min(below, cap_);
    }
    if (std::holds_alternative<AsymmetricHose>(*universe_)) {
      double s_in = 0.0, t_in = 0.0;
      for (NodeIndex v : nodes) {
        if (tree.Contains(v) && tree.Below(v, top)) {
          s_in += source_[v];
          t_in += sink_[v];
        }
      }
      return std::min(s_in, total_sink_ - t_in) + std::min(total_source_ - s_in, t_in);
    }
    double best = 0.0;
    for (const auto& entries : matrices_) {
      double crossing = 0.0;
      for (const auto& [i, j, value] : entries) {
        if (tree.Below(i, top) != tree.Below(j, top)) crossing += value;
      }
      best = std::max(best, crossing);
    }
    return best;
  }

 private:
  const DemandUniverse* universe_;
  std::vector<double> weight_;
  double cap_ = 0.0;
  std::vector<double> source_;
  std::vector<double> sink_;
  double total_source_ = 0.0;
  double total_sink_ = 0.0;
  std::vector<std::vector<std::tuple<NodeIndex, NodeIndex, double>>> matrices_;
};

// Dijkstra tree from `root` on double costs; ties go to the smaller node.
std::vector<EdgeIndex> ShortestPathTree(const Network& network, NodeIndex root) {
  const int n = network.num_nodes();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<EdgeIndex> via(n, -1);
  std::vector<bool> done(n, false);
  using Item = std::pair<double, NodeIndex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[root] = 0.0;
  queue.push({0.0, root});
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (done[v]) continue;
    done[v] = true;
    for (const Incidence& inc : network.incident(v)) {
      const double nd = d + network.cost(inc.edge);
      if (nd < dist[inc.neighbor]) {
        dist[inc.neighbor] = nd;
        via[inc.neighbor] = inc.edge;
        queue.push({nd, inc.neighbor});
      }
    }
  }
  std::vector<EdgeIndex> edges;
  for (NodeIndex v = 0; v < n; ++v) {
    if (via[v] >= 0) edges.push_back(via[v]);
  }
  return edges;
}

std::vector<EdgeIndex> MinimumSpanningForest(const Network& network) {
  std::vector<EdgeIndex> order(network.num_edges());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](EdgeIndex x, EdgeIndex y) { return network.edge(x).cost < network.edge(y).cost; });
  RollbackUnionFind uf(network.num_nodes());
  std::vector<EdgeIndex> edges;
  for (EdgeIndex e : order) {
    if (uf.Unite(network.edge(e).a, network.edge(e).b)) edges.push_back(e);
  }
  return edges;
}

// Drops edges whose far side holds no demand endpoint (they carry nothing).
std::vector<EdgeIndex> PruneToEndpoints(const Network& network, const std::vector<EdgeIndex>& edges,
                                        const std::vector<NodeIndex>& endpoints, NodeIndex root) {
  const RootedTree tree = Root(network, edges, root);
  std::vector<int> count(network.num_nodes(), 0);
  for (NodeIndex v : endpoints) {
    if (tree.Contains(v)) count[v] = 1;
  }
  for (auto it = tree.order.rbegin(); it != tree.order.rend(); ++it) {
    const EdgeIndex e = tree.parent_edge[*it];
    if (e >= 0) count[network.edge(e).Other(*it)] += count[*it];
  }
  std::vector<EdgeIndex> kept;
  for (NodeIndex v : tree.order) {
    if (tree.parent_edge[v] >= 0 && count[v] > 0) kept.push_back(tree.parent_edge[v]);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace

double CountSpanningTrees(const Network& network) {
  const int n = network.num_nodes();
  if (n <= 1) return 1.0;
  if (!network.IsConnected()) return 0.0;
  // Laplacian minor without node 0; log-determinant by partial pivoting.
  const int size = n - 1;
  std::vector<std::vector<double>> a(size, std::vector<double>(size, 0.0));
  for (const Edge& e : network.edges()) {
    const int x = e.a - 1, y = e.b - 1;
    if (x >= 0) a[x][x] += 1.0;
    if (y >= 0) a[y][y] += 1.0;
    if (x >= 0 && y >= 0) {
      a[x][y] -= 1.0;
      a[y][x] -= 1.0;
    }
  }
  double log_det = 0.0;
  for (int col = 0; col < size; ++col) {
    int pivot = col;
    for (int row = col + 1; row < size; ++row) {
      if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
    }
    if (std::abs(a[pivot][col]) < 1e-12) return 0.0;
    std::swap(a[pivot], a[col]);
    log_det += std::log(std::abs(a[col][col]));
    for (int row = col + 1; row < size; ++row) {
      const double f = a[row][col] / a[col][col];
      if (f == 0.0) continue;
      for (int k = col; k < size; ++k) a[row][k] -= f * a[col][k];
    }
  }
  return std::round(std::exp(log_det));
}

void ForEachSpanningTree(const Network& network, long budget,
                         const std::function<void(const std::vector<EdgeIndex>&)>& visit) {
  const int n = network.num_nodes();
  const int m = network.num_edges();
  const double count = CountSpanningTrees(network);
  if (count > static_cast<double>(budget)) {
    throw RefusedError("spanning tree enumeration: about " + std::to_string(static_cast<long long>(count)) +
                       " trees exceed the budget of " + std::to_string(budget));
  }
  if (count == 0.0) return;
  RollbackUnionFind uf(n);
  std::vector<EdgeIndex> chosen;
  std::vector<bool> excluded(m, false);

  // Can the graph minus the excluded edges still connect everything?
  auto connected_without = [&]() {
    std::vector<bool> seen(n, false);
    std::vector<NodeIndex> stack{0};
    seen[0] = true;
    int reached = 1;
    while (!stack.empty()) {
      const NodeIndex v = stack.back();
      stack.pop_back();
      for (const Incidence& inc : network.incident(v)) {
        if (excluded[inc.edge] || seen[inc.neighbor]) continue;
        seen[inc.neighbor] = true;
        ++reached;
        stack.push_back(inc.neighbor);
      }
    }
    return reached == n;
  };

  std::function<void(int)> branch = [&](int i) {
    if (static_cast<int>(chosen.size()) == n - 1) {
      visit(chosen);
      return;
    }
    if (i == m || m - i < n - 1 - static_cast<int>(chosen.size())) return;
    const Edge& edge = network.edge(i);
    if (uf.Unite(edge.a, edge.b)) {
      chosen.push_back(i);
      branch(i + 1);
      chosen.pop_back();
      uf.Undo();
    } else {
      // Closes a cycle: this edge can only be left out.
      branch(i + 1);
      return;
    }
    excluded[i] = true;
    if (connected_without()) branch(i + 1);
    excluded[i] = false;
  };
  branch(0);
}

TreeCost TreeTemplateCost(const Network& network, const DemandUniverse& universe, const TreeTemplate& tree) {
  ValidateUniverse(network, universe);
  CheckTreeShape(network, tree.edges);
  const std::vector<NodeIndex> endpoints = DemandEndpoints(network, universe);
  TreeCost out;
  out.capacity.assign(network.num_edges(), Rational(0));
  out.cost = 0;
  const NodeIndex root = TreeRoot(network, universe, endpoints);
  if (root < 0) return out;
  const RootedTree rooted = Root(network, tree.edges, root);
  for (NodeIndex v : endpoints) {
    if (!rooted.Contains(v)) throw StructuralError("tree template misses demand endpoint '" + network.id(v) + "'");
  }
  for (EdgeIndex e : tree.edges) {
    if (!rooted.Contains(network.edge(e).a)) continue;  // a piece away from every endpoint
    const NodeIndex below =
        rooted.parent_edge[network.edge(e).a] == e ? network.edge(e).a : network.edge(e).b;
    std::vector<bool> side(network.num_nodes(), false);
    for (NodeIndex v = 0; v < network.num_nodes(); ++v) side[v] = rooted.Contains(v) && rooted.Below(v, below);
    out.capacity[e] = MaxCrossingDemand(network, universe, side);
    out.cost += out.capacity[e] * network.edge(e).cost;
  }
  return out;
}

RoutingTemplate TreeRouting(const Network& network, const DemandUniverse& universe, const TreeTemplate& tree) {
  ValidateUniverse(network, universe);
  CheckTreeShape(network, tree.edges);
  const auto pairs = DemandPairs(network, universe);
  RoutingTemplate routing;
  for (const auto& [s, t] : pairs) {
    const RootedTree rooted = Root(network, tree.edges, t);
    if (!rooted.Contains(s)) {
      throw StructuralError("tree template does not join '" + network.id(s) + "' and '" + network.id(t) + "'");
    }
    std::vector<NodeIndex> path{s};
    while (path.back() != t) path.push_back(network.edge(rooted.parent_edge[path.back()]).Other(path.back()));
    Commodity c = EmptyCommodity(network, s, t);
    AddPathFlow(network, path, 1.0, &c);
    routing.commodities.push_back(std::move(c));
  }
  return routing;
}

TrResult SolveTr(const Network& network, const DemandUniverse& universe, const TrOptions& options) {
  const auto start = Clock::now();
  ValidateUniverse(network, universe);
  const std::vector<NodeIndex> endpoints = DemandEndpoints(network, universe);
  const NodeIndex root = TreeRoot(network, universe, endpoints);
  TrResult out;
  SolveReport& report = out.report;
  report.model = RoutingModel::kTR;

  if (root < 0 || endpoints.empty()) {
    report.solver = "tr_empty";
    report.bound = BoundType::kExact;
  } else if (options.mode == TrMode::kExactSmall) {
    if (!network.IsConnected()) throw StructuralError("exact tree search needs a connected network");
    const FastCrossing crossing(network, universe);
    std::vector<NodeIndex> nodes(network.num_nodes());
    std::iota(nodes.begin(), nodes.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    std::vector<EdgeIndex> best_edges;
    long trees = 0;
    ForEachSpanningTree(network, options.tree_budget, [&](const std::vector<EdgeIndex>& edges) {
      ++trees;
      const RootedTree rooted = Root(network, edges, root);
      double cost = 0.0;
      for (NodeIndex v : rooted.order) {
        const EdgeIndex e = rooted.parent_edge[v];
        if (e < 0 || network.cost(e) == 0.0) continue;
        cost += network.cost(e) * crossing.Across(rooted, v, nodes);
        if (cost >= best) return;
      }
      if (best_edges.empty() || cost < best - 1e-9 * std::max(1.0, best)) {
        best = cost;
        best_edges = edges;
      }
    });
    out.tree.edges = PruneToEndpoints(network, best_edges, endpoints, root);
    report.solver = "tr_spanning_tree_enumeration";
    report.bound = BoundType::kExact;
    report.certificate.numbers["trees_enumerated"] = static_cast<double>(trees);
    report.certificate.labels["exhaustive"] = "true";
  } else {
    const std::vector<EdgeIndex> edges =
        options.mode == TrMode::kMstHeuristic ? MinimumSpanningForest(network) : ShortestPathTree(network, root);
    out.tree.edges = PruneToEndpoints(network, edges, endpoints, root);
    report.solver = options.mode == TrMode::kMstHeuristic ? "tr_mst" : "tr_spt";
    report.bound = BoundType::kUpper;
  }
  out.cost = TreeTemplateCost(network, universe, out.tree);
  report.cost = out.cost.cost.get_d();
  report.exact_cost = FormatRational(out.cost.cost);
  report.certificate.numbers["tree_edges"] = static_cast<double>(out.tree.edges.size());
  report.runtime_seconds = Seconds(start);
  return out;
}

Rational TrGirthLowerBound(const Network& network, const DemandUniverse& universe) {
  const auto* list = std::get_if<ExplicitMatrices>(&universe);
  if (list == nullptr || list->matrices.size() != 1) {
    throw StructuralError("girth bound needs a single explicit demand matrix");
  }
  const DemandMatrix& d = list->matrices.front();
  std::set<std::pair<NodeIndex, NodeIndex>> demand;
  for (const DemandEntry& entry : d.entries) {
    if (entry.value != 1) throw StructuralError("girth bound needs unit demands");
    demand.insert({entry.i, entry.j});
  }
  for (EdgeIndex e = 0; e < network.num_edges(); ++e) {
    const Edge& edge = network.edge(e);
    if (edge.cost != 1) throw StructuralError("girth bound needs unit edge costs");
    if (!demand.count({std::min(edge.a, edge.b), std::max(edge.a, edge.b)})) {
      throw StructuralError("girth bound needs demand on every edge");
    }
  }
  if (static_cast<int>(demand.size()) != network.num_edges()) {
    throw StructuralError("girth bound needs demand only on edges");
  }
  const std::optional<int> g = Girth(network);
  if (!g) return 0;
  const long extra = network.num_edges() - (network.num_nodes() - 1);
  return Rational(std::max(0L, extra)) * (*g - 1);
}

RoutingTemplate EdgeIdentityTemplate(const Network& network, const ExplicitMatrices& universe) {
  RoutingTemplate routing;
  std::set<std::pair<NodeIndex, NodeIndex>> seen;
  for (const DemandMatrix& m : universe.matrices) {
    for (const DemandEntry& entry : m.entries) {
      if (!seen.insert({entry.i, entry.j}).second) continue;
      if (!network.FindEdge(entry.i, entry.j)) {
        throw StructuralError("demand pair " + network.id(entry.i) + "," + network.id(entry.j) + " is not an edge");
      }
      Commodity c = EmptyCommodity(network, entry.i, entry.j);
      AddPathFlow(network, {entry.i, entry.j}, 1.0, &c);
      routing.commodities.push_back(std::move(c));
    }
  }
  return routing;
}

}  // namespace robustnet
