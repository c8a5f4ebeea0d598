#include "robustnet/spr.h"

#include <algorithm>
#include <chrono>
#include <limits>
#include <queue>
#include <random>

#include "robustnet/errors.h"
#include "robustnet/flow.h"
#include "robustnet/trees.h"

namespace robustnet {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void CheckK(int k) {
  if (k < 1) throw ArgumentError("k must be at least 1");
}

// Dijkstra from every source in `sources` (distance 0) on per-edge weights.
// via[v] is the edge used to reach v; ties keep the first label found.
struct Labels {
  std::vector<double> dist;
  std::vector<EdgeIndex> via;
};

Labels Dijkstra(const Network& network, const std::vector<double>& weight, const std::vector<NodeIndex>& sources) {
  const int n = network.num_nodes();
  Labels out{std::vector<double>(n, std::numeric_limits<double>::infinity()), std::vector<EdgeIndex>(n, -1)};
  using Item = std::pair<double, NodeIndex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (NodeIndex s : sources) {
    out.dist[s] = 0.0;
    queue.push({0.0, s});
  }
  std::vector<bool> done(n, false);
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (done[v]) continue;
    done[v] = true;
    for (const Incidence& inc : network.incident(v)) {
      const double nd = d + weight[inc.edge];
      if (nd < out.dist[inc.neighbor]) {
        out.dist[inc.neighbor] = nd;
        out.via[inc.neighbor] = inc.edge;
        queue.push({nd, inc.neighbor});
      }
    }
  }
  return out;
}

// Walks via[] from v back to a source.
std::vector<NodeIndex> Trace(const Network& network, const Labels& labels, NodeIndex v) {
  std::vector<NodeIndex> path{v};
  while (labels.via[path.back()] >= 0) path.push_back(network.edge(labels.via[path.back()]).Other(path.back()));
  return path;
}

std::vector<EdgeIndex> PathEdges(const Network& network, const std::vector<NodeIndex>& path) {
  std::vector<EdgeIndex> edges;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) edges.push_back(*network.FindEdge(path[i], path[i + 1]));
  return edges;
}

SprResult Finish(const Network& network, int k, std::vector<std::vector<NodeIndex>> paths, const std::string& solver,
                 BoundType bound, Clock::time_point start) {
  SprResult out;
  out.solution = MakeSprSolution(network, k, std::move(paths));
  SolveReport& report = out.report;
  report.model = RoutingModel::kSPR;
  report.cost = out.solution.cost.get_d();
  report.exact_cost = FormatRational(out.solution.cost);
  report.bound = bound;
  report.solver = solver;
  report.runtime_seconds = Seconds(start);
  return out;
}

}  // namespace

SprSolution MakeSprSolution(const Network& network, int k, std::vector<std::vector<NodeIndex>> paths) {
  CheckK(k);
  const NodeIndex r = network.RequireSink();
  const auto& terminals = network.terminals();
  if (paths.size() != terminals.size()) throw StructuralError("need one path per terminal");
  SprSolution out;
  out.k = k;
  out.usage.assign(network.num_edges(), 0);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const std::vector<NodeIndex>& path = paths[i];
    if (path.empty() || path.front() != terminals[i] || path.back() != r) {
      throw StructuralError("path of terminal '" + network.id(terminals[i]) + "' does not run to the sink");
    }
    std::vector<bool> seen(network.num_nodes(), false);
    for (std::size_t j = 0; j < path.size(); ++j) {
      if (path[j] < 0 || path[j] >= network.num_nodes()) throw StructuralError("path names an unknown node");
      if (seen[path[j]]) throw StructuralError("path of terminal '" + network.id(terminals[i]) + "' is not simple");
      seen[path[j]] = true;
      if (j + 1 < path.size()) {
        std::optional<EdgeIndex> e = network.FindEdge(path[j], path[j + 1]);
        if (!e) throw StructuralError("path steps over a non-edge " + network.id(path[j]) + "," + network.id(path[j + 1]));
        ++out.usage[*e];
      }
    }
  }
  out.cost = 0;
  for (EdgeIndex e = 0; e < network.num_edges(); ++e) out.cost += network.edge(e).cost * std::min(out.usage[e], k);
  out.paths = std::move(paths);
  return out;
}

RoutingTemplate SprTemplate(const Network& network, const SprSolution& solution) {
  const NodeIndex r = network.RequireSink();
  RoutingTemplate routing;
  for (std::size_t i = 0; i < solution.paths.size(); ++i) {
    Commodity c = EmptyCommodity(network, network.terminals()[i], r);
    AddPathFlow(network, solution.paths[i], 1.0, &c);
    routing.commodities.push_back(std::move(c));
  }
  return routing;
}

const char* ToString(SprStrategy strategy) {
  switch (strategy) {
    case SprStrategy::kShortestPathTree:
      return "spt";
    case SprStrategy::kSampleAugment:
      return "sample_augment";
    case SprStrategy::kLocalSearch:
      return "local_search";
  }
  return "?";
}

SprStrategy ParseSprStrategy(const std::string& text) {
  if (text == "spt") return SprStrategy::kShortestPathTree;
  if (text == "sample_augment") return SprStrategy::kSampleAugment;
  if (text == "local_search") return SprStrategy::kLocalSearch;
  throw ArgumentError("unknown SPR strategy '" + text + "'");
}

SprResult SolveSprHeuristic(const Network& network, int k, SprStrategy strategy, std::uint64_t seed) {
  CheckK(k);
  const auto start = Clock::now();
  const NodeIndex r = network.RequireSink();
  const auto& terminals = network.terminals();
  const int t = static_cast<int>(terminals.size());
  const Labels from_sink = Dijkstra(network, network.costs(), {r});
  for (NodeIndex v : terminals) {
    if (from_sink.via[v] < 0) throw InfeasibleError("terminal '" + network.id(v) + "' cannot reach the sink");
  }
  std::vector<std::vector<NodeIndex>> paths(t);
  for (int i = 0; i < t; ++i) paths[i] = Trace(network, from_sink, terminals[i]);

  int moves = 0;
  int marked = 0;
  if (strategy == SprStrategy::kSampleAugment) {
    std::mt19937_64 rng(seed);
    // 53-bit uniform draw by hand so the marks do not depend on the
    // standard library's distribution code.
    auto mark = [&](std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53 < 1.0 / k; };
    std::vector<bool> bought(network.num_nodes(), false);
    bought[r] = true;
    std::vector<bool> is_marked(t, false);
    for (int i = 0; i < t; ++i) {
      if (!mark(rng)) continue;
      is_marked[i] = true;
      ++marked;
      for (NodeIndex v : paths[i]) bought[v] = true;
    }
    std::vector<NodeIndex> tree_nodes;
    for (NodeIndex v = 0; v < network.num_nodes(); ++v) {
      if (bought[v]) tree_nodes.push_back(v);
    }
    const Labels to_tree = Dijkstra(network, network.costs(), tree_nodes);
    for (int i = 0; i < t; ++i) {
      if (is_marked[i]) continue;
      std::vector<NodeIndex> walk = Trace(network, to_tree, terminals[i]);
      const std::vector<NodeIndex> rest = Trace(network, from_sink, walk.back());
      walk.insert(walk.end(), rest.begin() + 1, rest.end());
      paths[i] = EraseLoops(walk);
    }
  } else if (strategy == SprStrategy::kLocalSearch) {
    std::vector<int> usage(network.num_edges(), 0);
    std::vector<std::vector<EdgeIndex>> edges(t);
    for (int i = 0; i < t; ++i) {
      edges[i] = PathEdges(network, paths[i]);
      for (EdgeIndex e : edges[i]) ++usage[e];
    }
    std::vector<double> weight(network.num_edges());
    for (bool improved = true; improved;) {
      improved = false;
      for (int i = 0; i < t; ++i) {
        for (EdgeIndex e : edges[i]) --usage[e];
        // Adding one more path through e costs c(e) until N(e) reaches k.
        for (EdgeIndex e = 0; e < network.num_edges(); ++e) weight[e] = usage[e] < k ? network.cost(e) : 0.0;
        double current = 0.0;
        for (EdgeIndex e : edges[i]) current += weight[e];
        const Labels labels = Dijkstra(network, weight, {r});
        if (labels.dist[terminals[i]] < current - 1e-9 * std::max(1.0, current)) {
          paths[i] = Trace(network, labels, terminals[i]);
          edges[i] = PathEdges(network, paths[i]);
          improved = true;
          ++moves;
        }
        for (EdgeIndex e : edges[i]) ++usage[e];
      }
    }
  }

  SprResult out = Finish(network, k, std::move(paths), std::string("spr_") + ToString(strategy), BoundType::kUpper, start);
  if (strategy == SprStrategy::kSampleAugment) {
    out.report.seed = seed;
    out.report.certificate.numbers["marked_terminals"] = marked;
  }
  if (strategy == SprStrategy::kLocalSearch) out.report.certificate.numbers["moves"] = moves;
  return out;
}

SprResult SolveSprExactSmall(const Network& network, int k, const SprExactOptions& options) {
  CheckK(k);
  const auto start = Clock::now();
  const NodeIndex r = network.RequireSink();
  const auto& terminals = network.terminals();
  if (static_cast<int>(terminals.size()) > options.max_terminals) {
    throw RefusedError("exact SPR handles at most " + std::to_string(options.max_terminals) + " terminals (got " +
                       std::to_string(terminals.size()) + "); use a heuristic strategy");
  }
  if (!network.IsConnected()) throw InfeasibleError("exact SPR needs a connected network");
  const int n = network.num_nodes();
  std::vector<int> weight(n, 0);
  for (NodeIndex v : terminals) weight[v] = 1;

  double best = std::numeric_limits<double>::infinity();
  std::vector<EdgeIndex> best_tree;
  long trees = 0;
  std::vector<std::vector<std::pair<NodeIndex, EdgeIndex>>> adj(n);
  std::vector<EdgeIndex> parent(n);
  std::vector<NodeIndex> order;
  std::vector<int> below(n);
  ForEachSpanningTree(network, options.tree_budget, [&](const std::vector<EdgeIndex>& tree) {
    ++trees;
    for (auto& list : adj) list.clear();
    for (EdgeIndex e : tree) {
      adj[network.edge(e).a].push_back({network.edge(e).b, e});
      adj[network.edge(e).b].push_back({network.edge(e).a, e});
    }
    std::fill(parent.begin(), parent.end(), -2);
    order.assign(1, r);
    parent[r] = -1;
    for (std::size_t i = 0; i < order.size(); ++i) {
      for (const auto& [w, e] : adj[order[i]]) {
        if (parent[w] != -2) continue;
        parent[w] = e;
        order.push_back(w);
      }
    }
    double cost = 0.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) below[*it] = weight[*it];
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const NodeIndex v = *it;
      if (parent[v] < 0) continue;
      below[network.edge(parent[v]).Other(v)] += below[v];
      cost += network.cost(parent[v]) * std::min(below[v], k);
    }
    if (best_tree.empty() || cost < best - 1e-9 * std::max(1.0, best)) {
      best = cost;
      best_tree = tree;
    }
  });

  // Forced routing inside the best tree.
  std::vector<double> inside(network.num_edges(), std::numeric_limits<double>::infinity());
  for (EdgeIndex e : best_tree) inside[e] = 0.0;
  const Labels labels = Dijkstra(network, inside, {r});
  std::vector<std::vector<NodeIndex>> paths;
  for (NodeIndex v : terminals) paths.push_back(Trace(network, labels, v));
  SprResult out = Finish(network, k, std::move(paths), "spr_spanning_tree_enumeration", BoundType::kExact, start);
  out.report.certificate.numbers["trees_enumerated"] = static_cast<double>(trees);
  out.report.certificate.labels["exhaustive"] = "true";
  return out;
}

}  // namespace robustnet
