#ifndef ROBUSTNET_NETWORK_H_
#define ROBUSTNET_NETWORK_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robustnet/rational.h"

namespace robustnet {

using NodeIndex = int;
using EdgeIndex = int;

struct Edge {
  NodeIndex a;
  NodeIndex b;
  Rational cost;

  NodeIndex Other(NodeIndex v) const { return v == a ? b : a; }
};

struct Incidence {
  EdgeIndex edge;
  NodeIndex neighbor;
};

// Undirected network with per-unit reservation costs, an optional sink and a
// terminal set. Immutable once built; construct through NetworkBuilder.
//
// Invariants: no self loops, no parallel edges, finite costs >= 0, sink (if
// any) is not a terminal. Terminals default to every non-sink node.
class Network {
 public:
  Network() = default;

  int num_nodes() const { return static_cast<int>(node_ids_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::string& id(NodeIndex v) const { return node_ids_[v]; }
  const std::vector<std::string>& node_ids() const { return node_ids_; }
  // Throws StructuralError for an unknown id.
  NodeIndex Index(const std::string& id) const;
  std::optional<NodeIndex> FindIndex(const std::string& id) const;

  const Edge& edge(EdgeIndex e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }
  double cost(EdgeIndex e) const { return cost_double_[e]; }
  const std::vector<double>& costs() const { return cost_double_; }

  std::span<const Incidence> incident(NodeIndex v) const { return adjacency_[v]; }
  int degree(NodeIndex v) const { return static_cast<int>(adjacency_[v].size()); }
  std::optional<EdgeIndex> FindEdge(NodeIndex u, NodeIndex v) const;

  std::optional<NodeIndex> sink() const { return sink_; }
  // Throws StructuralError when the network has no sink.
  NodeIndex RequireSink() const;
  const std::vector<NodeIndex>& terminals() const { return terminals_; }
  bool IsTerminal(NodeIndex v) const { return is_terminal_[v]; }
  int num_terminals() const { return static_cast<int>(terminals_.size()); }

  // Canonical "a,b" key with ids ordered lexicographically.
  std::string EdgeKey(EdgeIndex e) const;
  std::optional<EdgeIndex> FindEdgeByKey(const std::string& key) const;

  // True when every node is reachable from node 0 (empty graphs are connected).
  bool IsConnected() const;

 private:
  friend class NetworkBuilder;

  std::vector<std::string> node_ids_;
  std::map<std::string, NodeIndex> index_;
  std::vector<Edge> edges_;
  std::vector<double> cost_double_;
  std::vector<std::vector<Incidence>> adjacency_;
  std::map<std::pair<NodeIndex, NodeIndex>, EdgeIndex> edge_lookup_;
  std::optional<NodeIndex> sink_;
  std::vector<NodeIndex> terminals_;
  std::vector<bool> is_terminal_;
};

class NetworkBuilder {
 public:
  NodeIndex AddNode(const std::string& id);
  // Adds missing endpoints on demand.
  EdgeIndex AddEdge(const std::string& a, const std::string& b, const Rational& cost);
  EdgeIndex AddEdge(NodeIndex a, NodeIndex b, const Rational& cost);
  void SetSink(const std::string& id);
  void SetTerminals(const std::vector<std::string>& ids);

  int num_nodes() const { return static_cast<int>(ids_.size()); }

  // Validates all invariants; throws StructuralError on violation.
  Network Build() const;

 private:
  std::vector<std::string> ids_;
  std::map<std::string, NodeIndex> index_;
  std::vector<Edge> edges_;
  std::optional<std::string> sink_;
  std::optional<std::vector<std::string>> terminals_;
};

// Node ids "0".."n-1" plus optional extra named nodes; convenience for
// generators and tests.
std::string NumericId(int v);

}  // namespace robustnet

#endif  // ROBUSTNET_NETWORK_H_
