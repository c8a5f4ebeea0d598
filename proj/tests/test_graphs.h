#ifndef ROBUSTNET_TESTS_TEST_GRAPHS_H_
#define ROBUSTNET_TESTS_TEST_GRAPHS_H_

#include <queue>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "robustnet/model.h"
#include "robustnet/network.h"

namespace robustnet::testing_util {

struct EdgeSpec {
  int a;
  int b;
  Rational cost;
};

// Nodes "0".."n-1"; sink = -1 leaves the network without a sink.
inline Network MakeNetwork(int n, const std::vector<EdgeSpec>& edges, int sink = -1) {
  NetworkBuilder builder;
  for (int v = 0; v < n; ++v) builder.AddNode(NumericId(v));
  for (const EdgeSpec& e : edges) builder.AddEdge(e.a, e.b, e.cost);
  if (sink >= 0) builder.SetSink(NumericId(sink));
  return builder.Build();
}

// Connected random graph: a random spanning tree plus `extra` edges, integer
// costs in [1, max_cost].
inline std::vector<EdgeSpec> RandomConnectedEdges(std::mt19937_64& rng, int n, int extra, int max_cost) {
  std::uniform_int_distribution<int> cost(1, max_cost);
  std::set<std::pair<int, int>> used;
  std::vector<EdgeSpec> edges;
  for (int v = 1; v < n; ++v) {
    int u = std::uniform_int_distribution<int>(0, v - 1)(rng);
    used.insert({u, v});
    edges.push_back({u, v, cost(rng)});
  }
  std::uniform_int_distribution<int> node(0, n - 1);
  for (int tries = 0; tries < 20 * extra && extra > 0; ++tries) {
    int a = node(rng);
    int b = node(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!used.insert({a, b}).second) continue;
    edges.push_back({a, b, cost(rng)});
    if (--extra == 0) break;
  }
  return edges;
}

// BFS node path from v to t.
inline std::vector<NodeIndex> HopPath(const Network& net, NodeIndex v, NodeIndex t) {
  std::vector<NodeIndex> parent(net.num_nodes(), -1);
  std::queue<NodeIndex> queue;
  parent[v] = v;
  queue.push(v);
  while (!queue.empty()) {
    NodeIndex x = queue.front();
    queue.pop();
    for (const Incidence& inc : net.incident(x)) {
      if (parent[inc.neighbor] < 0) {
        parent[inc.neighbor] = x;
        queue.push(inc.neighbor);
      }
    }
  }
  std::vector<NodeIndex> path{t};
  while (path.back() != v) path.push_back(parent[path.back()]);
  return {path.rbegin(), path.rend()};
}

// Random single-sink template: each terminal mixes up to three self-avoiding
// random walks to the sink (a walk that gets stuck falls back to a BFS path).
inline RoutingTemplate RandomTemplate(const Network& net, std::mt19937_64& rng) {
  const NodeIndex r = net.RequireSink();
  RoutingTemplate routing;
  for (NodeIndex v : net.terminals()) {
    Commodity c = EmptyCommodity(net, v, r);
    const int parts = 1 + static_cast<int>(rng() % 3);
    for (int p = 0; p < parts; ++p) {
      std::vector<NodeIndex> path{v};
      std::vector<bool> seen(net.num_nodes(), false);
      seen[v] = true;
      while (path.back() != r) {
        std::vector<NodeIndex> options;
        for (const Incidence& inc : net.incident(path.back())) {
          if (!seen[inc.neighbor]) options.push_back(inc.neighbor);
        }
        if (options.empty()) {
          path = HopPath(net, v, r);
          break;
        }
        NodeIndex next = options[rng() % options.size()];
        seen[next] = true;
        path.push_back(next);
      }
      AddPathFlow(net, path, 1.0 / parts, &c);
    }
    routing.commodities.push_back(std::move(c));
  }
  return routing;
}

}  // namespace robustnet::testing_util

#endif  // ROBUSTNET_TESTS_TEST_GRAPHS_H_
