#include "robustnet/network.h"

#include <algorithm>
#include <queue>
#include <set>

#include "robustnet/errors.h"

namespace robustnet {

NodeIndex Network::Index(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw StructuralError("unknown node id '" + id + "'");
  return it->second;
}

std::optional<NodeIndex> Network::FindIndex(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<EdgeIndex> Network::FindEdge(NodeIndex u, NodeIndex v) const {
  auto it = edge_lookup_.find({std::min(u, v), std::max(u, v)});
  if (it == edge_lookup_.end()) return std::nullopt;
  return it->second;
}

NodeIndex Network::RequireSink() const {
  if (!sink_) throw StructuralError("network has no sink");
  return *sink_;
}

std::string Network::EdgeKey(EdgeIndex e) const {
  const std::string& a = node_ids_[edges_[e].a];
  const std::string& b = node_ids_[edges_[e].b];
  return a < b ? a + "," + b : b + "," + a;
}

std::optional<EdgeIndex> Network::FindEdgeByKey(const std::string& key) const {
  auto comma = key.find(',');
  if (comma == std::string::npos) return std::nullopt;
  auto u = FindIndex(key.substr(0, comma));
  auto v = FindIndex(key.substr(comma + 1));
  if (!u || !v) return std::nullopt;
  return FindEdge(*u, *v);
}

bool Network::IsConnected() const {
  if (num_nodes() == 0) return true;
  std::vector<bool> seen(num_nodes(), false);
  std::queue<NodeIndex> queue;
  queue.push(0);
  seen[0] = true;
  int count = 1;
  while (!queue.empty()) {
    NodeIndex v = queue.front();
    queue.pop();
    for (const Incidence& inc : adjacency_[v]) {
      if (!seen[inc.neighbor]) {
        seen[inc.neighbor] = true;
        ++count;
        queue.push(inc.neighbor);
      }
    }
  }
  return count == num_nodes();
}

NodeIndex NetworkBuilder::AddNode(const std::string& id) {
  auto it = index_.find(id);
  if (it != index_.end()) return it->second;
  if (id.empty()) throw StructuralError("empty node id");
  if (id.find(',') != std::string::npos) {
    throw StructuralError("node id '" + id + "' contains ','");
  }
  NodeIndex v = static_cast<NodeIndex>(ids_.size());
  ids_.push_back(id);
  index_.emplace(id, v);
  return v;
}

EdgeIndex NetworkBuilder::AddEdge(const std::string& a, const std::string& b, const Rational& cost) {
  NodeIndex u = AddNode(a);
  NodeIndex v = AddNode(b);
  return AddEdge(u, v, cost);
}

EdgeIndex NetworkBuilder::AddEdge(NodeIndex a, NodeIndex b, const Rational& cost) {
  edges_.push_back(Edge{a, b, cost});
  return static_cast<EdgeIndex>(edges_.size() - 1);
}

void NetworkBuilder::SetSink(const std::string& id) { sink_ = id; }

void NetworkBuilder::SetTerminals(const std::vector<std::string>& ids) { terminals_ = ids; }

Network NetworkBuilder::Build() const {
  Network net;
  net.node_ids_ = ids_;
  net.index_ = index_;
  const int n = static_cast<int>(ids_.size());
  net.adjacency_.assign(n, {});
  for (size_t e = 0; e < edges_.size(); ++e) {
    const Edge& edge = edges_[e];
    if (edge.a < 0 || edge.a >= n || edge.b < 0 || edge.b >= n) {
      throw StructuralError("edge endpoint out of range");
    }
    if (edge.a == edge.b) throw StructuralError("self-loop at node '" + ids_[edge.a] + "'");
    if (edge.cost < 0) {
      throw StructuralError("negative cost on edge " + ids_[edge.a] + "," + ids_[edge.b]);
    }
    auto key = std::make_pair(std::min(edge.a, edge.b), std::max(edge.a, edge.b));
    if (!net.edge_lookup_.emplace(key, static_cast<EdgeIndex>(e)).second) {
      throw StructuralError("parallel edge " + ids_[edge.a] + "," + ids_[edge.b]);
    }
    net.edges_.push_back(edge);
    net.edges_.back().cost.canonicalize();
    net.cost_double_.push_back(edge.cost.get_d());
    net.adjacency_[edge.a].push_back({static_cast<EdgeIndex>(e), edge.b});
    net.adjacency_[edge.b].push_back({static_cast<EdgeIndex>(e), edge.a});
  }
  if (sink_) {
    auto it = index_.find(*sink_);
    if (it == index_.end()) throw StructuralError("sink '" + *sink_ + "' is not a node");
    net.sink_ = it->second;
  }
  net.is_terminal_.assign(n, false);
  if (terminals_) {
    std::set<NodeIndex> chosen;
    for (const std::string& id : *terminals_) {
      auto it = index_.find(id);
      if (it == index_.end()) throw StructuralError("terminal '" + id + "' is not a node");
      if (net.sink_ && it->second == *net.sink_) {
        throw StructuralError("sink '" + id + "' cannot be a terminal");
      }
      chosen.insert(it->second);
    }
    net.terminals_.assign(chosen.begin(), chosen.end());
  } else {
    for (NodeIndex v = 0; v < n; ++v) {
      if (!net.sink_ || v != *net.sink_) net.terminals_.push_back(v);
    }
  }
  for (NodeIndex v : net.terminals_) net.is_terminal_[v] = true;
  return net;
}

std::string NumericId(int v) { return std::to_string(v); }

}  // namespace robustnet
