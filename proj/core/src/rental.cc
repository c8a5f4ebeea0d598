#include "robustnet/rental.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <string>

#include "robustnet/errors.h"
#include "robustnet/flow.h"

namespace robustnet {

int RentalRadius(int n, int d) {
  if (n < 1 || d < 2) throw ArgumentError("radius needs n >= 1 and d >= 2");
  // Largest j with d^(2j) <= n.
  int j = 0;
  long long power = 1;
  while (power * d * d <= n) {
    power *= static_cast<long long>(d) * d;
    ++j;
  }
  return std::max(0, j - 1);
}

namespace {

constexpr double kSplitTolerance = 1e-9;
constexpr double kRentTolerance = 1e-6;

// Hop distances inside the expander (the sink is skipped).
std::vector<int> ExpanderDistances(const Network& network, NodeIndex source, NodeIndex sink) {
  std::vector<int> dist(network.num_nodes(), -1);
  std::queue<NodeIndex> queue;
  dist[source] = 0;
  queue.push(source);
  while (!queue.empty()) {
    const NodeIndex v = queue.front();
    queue.pop();
    for (const Incidence& inc : network.incident(v)) {
      if (inc.neighbor == sink || dist[inc.neighbor] >= 0) continue;
      dist[inc.neighbor] = dist[v] + 1;
      queue.push(inc.neighbor);
    }
  }
  return dist;
}

int CeilLog2(int n) {
  int bits = 0;
  while ((1 << bits) < n) ++bits;
  return bits;
}

}  // namespace

RentalCertificate VerifyRentalCertificate(const GapInstance& instance, const BarSolution& solution,
                                              const RentalOptions& options) {
  const Network& network = instance.network;
  if (network.num_terminals() != instance.n || instance.k < 1 || instance.k > instance.n) {
    throw StructuralError("gap shape: network does not match the instance parameters");
  }
  // Throws on anything that is not sink + unit-cost expander + n/k ports.
  HandcraftedFrReservation(network, instance.k);
  const NodeIndex r = network.RequireSink();
  const int n = network.num_terminals();
  std::vector<EdgeIndex> port(network.num_nodes(), -1);
  for (EdgeIndex e = 0; e < network.num_edges(); ++e) {
    const Edge& edge = network.edge(e);
    if (edge.a == r || edge.b == r) port[edge.Other(r)] = e;
  }
  for (NodeIndex v : network.terminals()) {
    if (network.degree(v) - 1 != instance.d) {
      throw StructuralError("gap shape: node '" + network.id(v) + "' is not " + std::to_string(instance.d) +
                            "-regular in the expander");
    }
  }
  if (solution.k != instance.k) throw StructuralError("solution was built for another k");
  const BarCostBreakdown cost = BarCost(network, instance.k, solution);
  const std::vector<double>& gamma = solution.gamma;

  RentalCertificate cert;
  cert.n = n;
  cert.d = instance.d;
  cert.radius = options.radius ? *options.radius : RentalRadius(n, instance.d);
  if (cert.radius < 0) throw ArgumentError("radius must be nonnegative");
  cert.log_n = CeilLog2(n);
  for (EdgeIndex e = 0; e < network.num_edges(); ++e) {
    if (port[network.edge(e).a] == e || port[network.edge(e).b] == e) {
      cert.gamma_ports += gamma[e];
    } else {
      cert.gamma_expander += gamma[e];
    }
  }

  const int radius = cert.radius;
  cert.splits_ok = true;
  cert.rent_ok = true;
  cert.bought_within_ports = true;
  const auto& terminals = network.terminals();
  for (std::size_t i = 0; i < terminals.size(); ++i) {
    const NodeIndex v = terminals[i];
    TerminalSplit split;
    split.terminal = v;
    split.rent = cost.rent_per_terminal[i];
    const std::vector<int> dist = ExpanderDistances(network, v, r);
    auto in_ball = [&](NodeIndex w) { return dist[w] >= 0 && dist[w] <= radius; };

    std::vector<double> cut_gamma(radius, 0.0);  // gamma(C_i) for i < R
    for (EdgeIndex e = 0; e < network.num_edges(); ++e) {
      const Edge& edge = network.edge(e);
      if (edge.a == r || edge.b == r) continue;
      if (in_ball(edge.a) && in_ball(edge.b)) split.gamma_ball_edges += gamma[e];
      const int lo = std::min(dist[edge.a], dist[edge.b]);
      const int hi = std::max(dist[edge.a], dist[edge.b]);
      if (lo >= 0 && hi == lo + 1 && lo < radius) cut_gamma[lo] += gamma[e];
    }
    for (NodeIndex w : terminals) {
      if (!in_ball(w)) continue;
      ++split.ball_size;
      split.gamma_ball_ports += gamma[port[w]];
    }

    // Decomposed flow arriving through each port.
    const std::vector<FlowPath> paths = PathDecompose(network, solution.routing.commodities[i]);
    std::map<NodeIndex, double> arriving;
    for (const FlowPath& path : paths) {
      if (path.nodes.size() < 2 || path.nodes.back() != r) throw StructuralError("path does not end at the sink");
      arriving[path.nodes[path.nodes.size() - 2]] += path.amount;
    }
    for (const auto& [w, amount] : arriving) {
      const double rented = std::max(0.0, amount - gamma[port[w]]);
      split.mu_rent += rented;
      split.port_rent += network.cost(port[w]) * rented;
      if (in_ball(w)) {
        split.mu_bought += amount - rented;
      } else {
        split.mu_travel += amount - rented;
      }
    }

    split.bound = split.port_rent + radius * split.mu_travel - split.gamma_ball_edges;
    split.cut_bound = split.port_rent;
    for (double g : cut_gamma) split.cut_bound += std::max(0.0, split.mu_travel - g);

    const double error = std::abs(split.mu_rent + split.mu_bought + split.mu_travel - 1.0);
    cert.max_split_error = std::max(cert.max_split_error, error);
    if (error > kSplitTolerance) cert.splits_ok = false;
    if (split.rent < std::max(split.bound, split.cut_bound) - kRentTolerance) cert.rent_ok = false;
    if (split.mu_bought > split.gamma_ball_ports + kSplitTolerance) cert.bought_within_ports = false;

    cert.sum_gamma_ball_edges += split.gamma_ball_edges;
    cert.sum_gamma_ball_ports += split.gamma_ball_ports;
    cert.max_ball_size = std::max(cert.max_ball_size, split.ball_size);
    cert.rent_cost += split.rent;
    cert.lower_bound += split.bound;
    cert.cut_lower_bound += split.cut_bound;
    cert.terminals.push_back(split);
  }
  if (cert.rent_cost < std::max(cert.lower_bound, cert.cut_lower_bound) - kRentTolerance) cert.rent_ok = false;
  cert.gamma_edges_ok = cert.sum_gamma_ball_edges <= cert.max_ball_size * cert.gamma_expander + kSplitTolerance;
  cert.gamma_ports_ok = cert.sum_gamma_ball_ports <= cert.max_ball_size * cert.gamma_ports + kSplitTolerance;

  const double root = std::sqrt(static_cast<double>(n));
  const double log_n = cert.log_n;
  cert.aggregate_bound = radius * (n - root * log_n) - root * log_n * log_n;
  cert.aggregate_applies = cert.gamma_expander < log_n * log_n && cert.gamma_ports < log_n;
  return cert;
}

}  // namespace robustnet
