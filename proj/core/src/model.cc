#include "robustnet/model.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "robustnet/errors.h"
#include "robustnet/lp.h"

namespace robustnet {
namespace {

void CheckNode(const Network& network, NodeIndex v, const char* what) {
  if (v < 0 || v >= network.num_nodes()) throw StructuralError(std::string(what) + " references unknown node");
}

void CheckMarginals(const Network& network, const std::vector<Rational>& marginals) {
  if (static_cast<int>(marginals.size()) != network.num_nodes()) {
    throw StructuralError("marginal vector size does not match node count");
  }
  for (const Rational& b : marginals) {
    if (b < 0) throw StructuralError("negative marginal");
  }
}

}  // namespace

void ValidateUniverse(const Network& network, const DemandUniverse& universe) {
  if (const auto* hose = std::get_if<SingleSinkHose>(&universe)) {
    CheckNode(network, hose->sink, "single-sink hose sink");
    CheckMarginals(network, hose->marginals);
    if (hose->marginals[hose->sink] != 0) throw StructuralError("sink carries a terminal marginal");
    if (hose->sink_marginal < 0) throw StructuralError("negative sink marginal");
    Rational total = 0;
    for (const Rational& b : hose->marginals) total += b;
    if (hose->sink_marginal > total) throw StructuralError("sink marginal exceeds the sum of terminal marginals");
    if (network.sink() && *network.sink() != hose->sink) {
      throw StructuralError("hose sink differs from the network sink");
    }
  } else if (const auto* asym = std::get_if<AsymmetricHose>(&universe)) {
    CheckMarginals(network, asym->marginals);
    std::set<NodeIndex> seen;
    for (NodeIndex v : asym->sources) {
      CheckNode(network, v, "asymmetric hose source");
      seen.insert(v);
    }
    for (NodeIndex v : asym->sinks) {
      CheckNode(network, v, "asymmetric hose sink");
      if (seen.count(v)) throw StructuralError("node is both source and sink in asymmetric hose");
    }
  } else {
    const auto& explicit_list = std::get<ExplicitMatrices>(universe);
    for (const DemandMatrix& matrix : explicit_list.matrices) {
      std::set<std::pair<NodeIndex, NodeIndex>> pairs;
      for (const DemandEntry& entry : matrix.entries) {
        CheckNode(network, entry.i, "demand entry");
        CheckNode(network, entry.j, "demand entry");
        if (entry.i == entry.j) throw StructuralError("diagonal demand entry");
        if (entry.i > entry.j) throw StructuralError("demand entry not in upper-triangular form");
        if (entry.value < 0) throw StructuralError("negative demand entry");
        if (!pairs.insert({entry.i, entry.j}).second) throw StructuralError("duplicate demand pair");
      }
    }
  }
}

SingleSinkHose UnitSingleSinkHose(const Network& network, int k) {
  if (k < 1) throw ArgumentError("hose parameter k must be >= 1");
  SingleSinkHose hose;
  hose.sink = network.RequireSink();
  hose.marginals.assign(network.num_nodes(), Rational(0));
  for (NodeIndex v : network.terminals()) hose.marginals[v] = 1;
  hose.sink_marginal = k;
  return hose;
}

std::optional<int> UnitHoseParameter(const Network& network, const DemandUniverse& universe) {
  const auto* hose = std::get_if<SingleSinkHose>(&universe);
  if (hose == nullptr || !network.sink() || *network.sink() != hose->sink) return std::nullopt;
  for (NodeIndex v = 0; v < network.num_nodes(); ++v) {
    Rational expected = network.IsTerminal(v) ? 1 : 0;
    if (hose->marginals[v] != expected) return std::nullopt;
  }
  if (hose->sink_marginal.get_den() != 1 || hose->sink_marginal < 1) return std::nullopt;
  return static_cast<int>(hose->sink_marginal.get_num().get_si());
}

DemandMatrix MakeDemandMatrix(std::vector<DemandEntry> entries) {
  std::set<std::pair<NodeIndex, NodeIndex>> pairs;
  for (DemandEntry& entry : entries) {
    if (entry.i == entry.j) throw StructuralError("diagonal demand entry");
    if (entry.value < 0) throw StructuralError("negative demand entry");
    if (entry.i > entry.j) std::swap(entry.i, entry.j);
    if (!pairs.insert({entry.i, entry.j}).second) throw StructuralError("duplicate demand pair");
  }
  std::sort(entries.begin(), entries.end(),
            [](const DemandEntry& a, const DemandEntry& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
  return DemandMatrix{std::move(entries)};
}

std::optional<int> RoutingTemplate::Find(NodeIndex u, NodeIndex v) const {
  for (size_t c = 0; c < commodities.size(); ++c) {
    const Commodity& com = commodities[c];
    if ((com.source == u && com.target == v) || (com.source == v && com.target == u)) return static_cast<int>(c);
  }
  return std::nullopt;
}

Commodity EmptyCommodity(const Network& network, NodeIndex source, NodeIndex target) {
  Commodity c;
  c.source = source;
  c.target = target;
  c.forward.assign(network.num_edges(), 0.0);
  c.backward.assign(network.num_edges(), 0.0);
  return c;
}

void AddPathFlow(const Network& network, const std::vector<NodeIndex>& path, double amount, Commodity* commodity) {
  for (size_t k = 0; k + 1 < path.size(); ++k) {
    auto e = network.FindEdge(path[k], path[k + 1]);
    if (!e) throw StructuralError("path uses a non-edge");
    if (network.edge(*e).a == path[k]) {
      commodity->forward[*e] += amount;
    } else {
      commodity->backward[*e] += amount;
    }
  }
}

TemplateValidation ValidateTemplate(const Network& network, const RoutingTemplate& routing) {
  TemplateValidation report;
  const int m = network.num_edges();
  for (const Commodity& com : routing.commodities) {
    if (com.source < 0 || com.source >= network.num_nodes() || com.target < 0 ||
        com.target >= network.num_nodes() || com.source == com.target) {
      throw StructuralError("commodity has an invalid endpoint");
    }
    if (network.sink() && com.target == *network.sink() && !network.IsTerminal(com.source)) {
      throw StructuralError("unknown terminal '" + network.id(com.source) + "'");
    }
    if (static_cast<int>(com.forward.size()) != m || static_cast<int>(com.backward.size()) != m) {
      throw StructuralError("commodity flow vectors do not cover every edge");
    }
    std::vector<double> net_out(network.num_nodes(), 0.0);
    for (EdgeIndex e = 0; e < m; ++e) {
      if (com.forward[e] < 0 || com.backward[e] < 0 || std::isnan(com.forward[e]) || std::isnan(com.backward[e])) {
        throw StructuralError("negative flow on edge " + network.EdgeKey(e));
      }
      const Edge& edge = network.edge(e);
      double f = com.forward[e] - com.backward[e];
      net_out[edge.a] += f;
      net_out[edge.b] -= f;
      if (com.Load(e) > 1.0 + kFlowTolerance) {
        report.valid = false;
        report.problems.push_back("flow above 1 on edge " + network.EdgeKey(e) + " for source " +
                                  network.id(com.source));
      }
    }
    double residual = 0.0;
    NodeIndex worst = com.source;
    for (NodeIndex v = 0; v < network.num_nodes(); ++v) {
      double expected = v == com.source ? 1.0 : (v == com.target ? -1.0 : 0.0);
      double r = std::abs(net_out[v] - expected);
      if (r > residual) {
        residual = r;
        worst = v;
      }
    }
    report.residuals.push_back(residual);
    if (residual > kFlowTolerance) {
      report.valid = false;
      report.problems.push_back("conservation residual " + std::to_string(residual) + " at node " +
                                network.id(worst) + " for source " + network.id(com.source));
    }
  }
  return report;
}

CapacityReservation ZeroReservation(const Network& network) {
  return CapacityReservation{std::vector<Rational>(network.num_edges(), Rational(0))};
}

Rational ReservationCost(const Network& network, const CapacityReservation& reservation) {
  if (static_cast<int>(reservation.capacity.size()) != network.num_edges()) {
    throw StructuralError("reservation does not cover every edge (" + std::to_string(reservation.capacity.size()) +
                          " of " + std::to_string(network.num_edges()) + ")");
  }
  Rational total = 0;
  for (EdgeIndex e = 0; e < network.num_edges(); ++e) {
    if (reservation.capacity[e] < 0) throw StructuralError("negative capacity on edge " + network.EdgeKey(e));
    total += reservation.capacity[e] * network.edge(e).cost;
  }
  return total;
}

double SumOfLargest(std::vector<double> values, int k) {
  if (k <= 0) return 0.0;
  k = std::min<int>(k, values.size());
  std::nth_element(values.begin(), values.begin() + (k - 1), values.end(), std::greater<>());
  std::sort(values.begin(), values.begin() + k, std::greater<>());
  double total = 0.0;
  for (int i = 0; i < k; ++i) total += values[i];
  return total;
}

double KthLargest(std::vector<double> values, int k) {
  if (k <= 0 || k > static_cast<int>(values.size())) return 0.0;
  std::nth_element(values.begin(), values.begin() + (k - 1), values.end(), std::greater<>());
  return values[k - 1];
}

CapacityReservation TemplateCapacitySingleSink(const Network& network, const RoutingTemplate& routing, int k) {
  if (k <= 0) throw ArgumentError("k must be positive, got " + std::to_string(k));
  const int m = network.num_edges();
  CapacityReservation u = ZeroReservation(network);
  std::vector<std::pair<double, int>> loads(routing.commodities.size());
  const int top = std::min<int>(k, routing.commodities.size());
  for (EdgeIndex e = 0; e < m; ++e) {
    for (size_t c = 0; c < routing.commodities.size(); ++c) loads[c] = {routing.commodities[c].Load(e), c};
    std::partial_sort(loads.begin(), loads.begin() + top, loads.end(), std::greater<>());
    Rational total = 0;
    for (int i = 0; i < top; ++i) total += RationalFromDouble(loads[i].first);
    u.capacity[e] = total;
  }
  return u;
}

namespace {

const Commodity& RequireCommodity(const Network& network, const RoutingTemplate& routing, NodeIndex u, NodeIndex v) {
  auto c = routing.Find(u, v);
  if (!c) throw StructuralError("template has no commodity for " + network.id(u) + "," + network.id(v));
  return routing.commodities[*c];
}

double SolveEdgeLp(const LinearProgram& lp, const Network& network, EdgeIndex e) {
  LpSolution sol = SolveLp(lp);
  if (sol.status != LpStatus::kOptimal) {
    throw SolverError("per-edge capacity LP " + ToString(sol.status) + " on edge " + network.EdgeKey(e));
  }
  return std::max(0.0, sol.objective);
}

}  // namespace

CapacityReservation TemplateCapacityPolytope(const Network& network, const RoutingTemplate& routing,
                                             const DemandUniverse& universe) {
  ValidateUniverse(network, universe);
  const int m = network.num_edges();
  CapacityReservation u = ZeroReservation(network);

  if (const auto* list = std::get_if<ExplicitMatrices>(&universe)) {
    for (const DemandMatrix& matrix : list->matrices) {
      std::vector<Rational> load(m, Rational(0));
      for (const DemandEntry& entry : matrix.entries) {
        if (entry.value == 0) continue;
        const Commodity& com = RequireCommodity(network, routing, entry.i, entry.j);
        for (EdgeIndex e = 0; e < m; ++e) {
          double f = com.Load(e);
          if (f != 0.0) load[e] += entry.value * RationalFromDouble(f);
        }
      }
      for (EdgeIndex e = 0; e < m; ++e) u.capacity[e] = std::max(u.capacity[e], load[e]);
    }
    return u;
  }

  if (const auto* hose = std::get_if<SingleSinkHose>(&universe)) {
    std::vector<NodeIndex> terminals;
    std::vector<const Commodity*> flows;
    for (NodeIndex v = 0; v < network.num_nodes(); ++v) {
      if (hose->marginals[v] > 0) {
        terminals.push_back(v);
        flows.push_back(&RequireCommodity(network, routing, v, hose->sink));
      }
    }
    for (EdgeIndex e = 0; e < m; ++e) {
      LinearProgram lp(ObjectiveSense::kMaximize);
      std::vector<LpTerm> total;
      for (size_t t = 0; t < terminals.size(); ++t) {
        int var = lp.AddVariable(0.0, hose->marginals[terminals[t]].get_d(), flows[t]->Load(e));
        total.push_back({var, 1.0});
      }
      lp.AddRow(std::move(total), RowRelation::kLessEqual, hose->sink_marginal.get_d());
      u.capacity[e] = SnapToRational(SolveEdgeLp(lp, network, e));
    }
    return u;
  }

  const auto& asym = std::get<AsymmetricHose>(universe);
  for (EdgeIndex e = 0; e < m; ++e) {
    LinearProgram lp(ObjectiveSense::kMaximize);
    std::vector<std::vector<LpTerm>> by_source(asym.sources.size());
    std::vector<std::vector<LpTerm>> by_sink(asym.sinks.size());
    for (size_t s = 0; s < asym.sources.size(); ++s) {
      for (size_t t = 0; t < asym.sinks.size(); ++t) {
        const Commodity& com = RequireCommodity(network, routing, asym.sources[s], asym.sinks[t]);
        int var = lp.AddVariable(0.0, kInfinity, com.Load(e));
        by_source[s].push_back({var, 1.0});
        by_sink[t].push_back({var, 1.0});
      }
    }
    for (size_t s = 0; s < asym.sources.size(); ++s) {
      lp.AddRow(std::move(by_source[s]), RowRelation::kLessEqual, asym.marginals[asym.sources[s]].get_d());
    }
    for (size_t t = 0; t < asym.sinks.size(); ++t) {
      lp.AddRow(std::move(by_sink[t]), RowRelation::kLessEqual, asym.marginals[asym.sinks[t]].get_d());
    }
    u.capacity[e] = SnapToRational(SolveEdgeLp(lp, network, e));
  }
  return u;
}

Rational MaxCrossingDemand(const Network& network, const DemandUniverse& universe, const std::vector<bool>& side) {
  if (static_cast<int>(side.size()) != network.num_nodes()) throw StructuralError("side does not cover every node");
  if (const auto* hose = std::get_if<SingleSinkHose>(&universe)) {
    const bool away = !side[hose->sink];
    Rational total = 0;
    for (NodeIndex v = 0; v < network.num_nodes(); ++v) {
      if (side[v] == away) total += hose->marginals[v];
    }
    return std::min(total, hose->sink_marginal);
  }
  if (const auto* asym = std::get_if<AsymmetricHose>(&universe)) {
    Rational sources_in = 0, sources_out = 0, sinks_in = 0, sinks_out = 0;
    for (NodeIndex v : asym->sources) (side[v] ? sources_in : sources_out) += asym->marginals[v];
    for (NodeIndex v : asym->sinks) (side[v] ? sinks_in : sinks_out) += asym->marginals[v];
    return std::min(sources_in, sinks_out) + std::min(sources_out, sinks_in);
  }
  Rational best = 0;
  for (const DemandMatrix& matrix : std::get<ExplicitMatrices>(universe).matrices) {
    Rational crossing = 0;
    for (const DemandEntry& entry : matrix.entries) {
      if (side[entry.i] != side[entry.j]) crossing += entry.value;
    }
    best = std::max(best, crossing);
  }
  return best;
}

std::vector<NodeIndex> DemandEndpoints(const Network& network, const DemandUniverse& universe) {
  std::vector<bool> used(network.num_nodes(), false);
  if (const auto* hose = std::get_if<SingleSinkHose>(&universe)) {
    for (NodeIndex v = 0; v < network.num_nodes(); ++v) used[v] = hose->marginals[v] > 0;
    if (hose->sink_marginal > 0) used[hose->sink] = true;
  } else if (const auto* asym = std::get_if<AsymmetricHose>(&universe)) {
    for (NodeIndex v : asym->sources) used[v] = asym->marginals[v] > 0;
    for (NodeIndex v : asym->sinks) used[v] = asym->marginals[v] > 0;
  } else {
    for (const DemandMatrix& matrix : std::get<ExplicitMatrices>(universe).matrices) {
      for (const DemandEntry& entry : matrix.entries) {
        if (entry.value > 0) used[entry.i] = used[entry.j] = true;
      }
    }
  }
  std::vector<NodeIndex> out;
  for (NodeIndex v = 0; v < network.num_nodes(); ++v) {
    if (used[v]) out.push_back(v);
  }
  return out;
}

std::vector<std::pair<NodeIndex, NodeIndex>> DemandPairs(const Network& network, const DemandUniverse& universe) {
  std::vector<std::pair<NodeIndex, NodeIndex>> pairs;
  if (const auto* hose = std::get_if<SingleSinkHose>(&universe)) {
    for (NodeIndex v = 0; v < network.num_nodes(); ++v) {
      if (hose->marginals[v] > 0) pairs.push_back({v, hose->sink});
    }
  } else if (const auto* asym = std::get_if<AsymmetricHose>(&universe)) {
    for (NodeIndex s : asym->sources) {
      for (NodeIndex t : asym->sinks) pairs.push_back({s, t});
    }
  } else {
    std::set<std::pair<NodeIndex, NodeIndex>> seen;
    for (const DemandMatrix& m : std::get<ExplicitMatrices>(universe).matrices) {
      for (const DemandEntry& entry : m.entries) {
        if (seen.insert({entry.i, entry.j}).second) pairs.push_back({entry.i, entry.j});
      }
    }
  }
  return pairs;
}

}  // namespace robustnet
