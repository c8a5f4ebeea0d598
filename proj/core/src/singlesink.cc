#include "robustnet/singlesink.h"

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <string>

#include "parallel.h"
#include "robustnet/errors.h"
#include "robustnet/flow.h"

namespace robustnet {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void CheckK(int k) {
  if (k < 1) throw ArgumentError("k must be >= 1, got " + std::to_string(k));
}

// ---------------------------------------------------------------------------
// FR cut generation.

struct CutSet {
  std::vector<char> in;  // membership over all nodes, sink excluded
  int terminals = 0;
};

class FrCutModel {
 public:
  FrCutModel(const Network& network, int k) : network_(network), k_(k), sink_(network.RequireSink()) {
    for (NodeIndex v = 0; v < network.num_nodes(); ++v) {
      if (v != sink_) side_.push_back(v);
    }
  }

  const std::vector<NodeIndex>& side() const { return side_; }

  int Requirement(const CutSet& s) const { return std::min(s.terminals, k_); }

  double CutValue(const CutSet& s, const std::vector<double>& u) const {
    double total = 0.0;
    for (EdgeIndex e = 0; e < network_.num_edges(); ++e) {
      const Edge& edge = network_.edge(e);
      if (s.in[edge.a] != s.in[edge.b]) total += u[e];
    }
    return total;
  }

  CutSet FromNodes(const std::vector<NodeIndex>& nodes) const {
    CutSet s;
    s.in.assign(network_.num_nodes(), 0);
    for (NodeIndex v : nodes) {
      s.in[v] = 1;
      if (network_.IsTerminal(v)) ++s.terminals;
    }
    return s;
  }

  std::vector<NodeIndex> Nodes(const CutSet& s) const {
    std::vector<NodeIndex> nodes;
    for (NodeIndex v : side_) {
      if (s.in[v]) nodes.push_back(v);
    }
    return nodes;
  }

  LpRow Row(const CutSet& s) const {
    LpRow row;
    for (EdgeIndex e = 0; e < network_.num_edges(); ++e) {
      const Edge& edge = network_.edge(e);
      if (s.in[edge.a] != s.in[edge.b]) row.terms.push_back({e, 1.0});
    }
    row.relation = RowRelation::kGreaterEqual;
    row.rhs = Requirement(s);
    return row;
  }

  // Every S over the side nodes in Gray-code order; keeps the `limit` most
  // violated.
  std::vector<CutSet> SeparateExhaustive(const std::vector<double>& u, double tolerance, int limit,
                                         std::int64_t* checked) const {
    const int count = static_cast<int>(side_.size());
    std::vector<char> in(network_.num_nodes(), 0);
    using Entry = std::pair<double, std::uint32_t>;  // (slack, mask), max-heap on slack
    std::priority_queue<Entry> worst;
    double cut = 0.0;
    int terminals = 0;
    std::uint32_t mask = 0;
    const std::uint32_t total = std::uint32_t{1} << count;
    for (std::uint32_t step = 1; step < total; ++step) {
      const int j = std::countr_zero(step);
      const NodeIndex v = side_[j];
      const bool adding = !in[v];
      for (const Incidence& inc : network_.incident(v)) {
        const double w = u[inc.edge];
        cut += (in[inc.neighbor] ? -w : w) * (adding ? 1.0 : -1.0);
      }
      in[v] = adding ? 1 : 0;
      mask ^= std::uint32_t{1} << j;
      if (network_.IsTerminal(v)) terminals += adding ? 1 : -1;
      const double slack = cut - std::min(terminals, k_);
      if (slack < -tolerance) {
        if (static_cast<int>(worst.size()) < limit) {
          worst.push({slack, mask});
        } else if (slack < worst.top().first) {
          worst.pop();
          worst.push({slack, mask});
        }
      }
    }
    *checked += total - 1;
    std::vector<CutSet> cuts;
    while (!worst.empty()) {
      std::vector<NodeIndex> nodes;
      for (int j = 0; j < count; ++j) {
        if (worst.top().second >> j & 1) nodes.push_back(side_[j]);
      }
      worst.pop();
      CutSet s = FromNodes(nodes);
      // Drift in the incremental sum could fake a violation; recheck.
      if (CutValue(s, u) - Requirement(s) < -tolerance) cuts.push_back(std::move(s));
    }
    std::reverse(cuts.begin(), cuts.end());
    return cuts;
  }

  // Greedy single-node toggles from singletons and random starts.
  std::vector<CutSet> SeparateLocal(const std::vector<double>& u, double tolerance, int limit, int starts,
                                    std::mt19937_64& rng, std::int64_t* checked) const {
    std::vector<std::pair<double, CutSet>> found;
    std::set<std::vector<char>> seen;
    auto descend = [&](CutSet s) {
      double slack = CutValue(s, u) - Requirement(s);
      for (bool improved = true; improved;) {
        improved = false;
        NodeIndex best = -1;
        double best_slack = slack;
        for (NodeIndex v : side_) {
          s.in[v] ^= 1;
          const int delta = network_.IsTerminal(v) ? (s.in[v] ? 1 : -1) : 0;
          s.terminals += delta;
          bool nonempty = s.terminals > 0 || std::any_of(side_.begin(), side_.end(), [&](NodeIndex w) { return s.in[w]; });
          if (nonempty) {
            const double value = CutValue(s, u) - Requirement(s);
            ++*checked;
            if (value < best_slack - 1e-12) {
              best_slack = value;
              best = v;
            }
          }
          s.in[v] ^= 1;
          s.terminals -= delta;
        }
        if (best >= 0) {
          s.in[best] ^= 1;
          if (network_.IsTerminal(best)) s.terminals += s.in[best] ? 1 : -1;
          slack = best_slack;
          improved = true;
        }
      }
      if (slack < -tolerance && seen.insert(s.in).second) found.emplace_back(slack, std::move(s));
    };
    for (NodeIndex v : side_) descend(FromNodes({v}));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < starts; ++t) {
      const double p = unit(rng);
      std::vector<NodeIndex> nodes;
      for (NodeIndex v : side_) {
        if (unit(rng) < p) nodes.push_back(v);
      }
      if (nodes.empty()) nodes.push_back(side_[t % side_.size()]);
      descend(FromNodes(nodes));
    }
    std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<CutSet> cuts;
    for (auto& [slack, s] : found) {
      if (static_cast<int>(cuts.size()) >= limit) break;
      cuts.push_back(std::move(s));
    }
    return cuts;
  }

 private:
  const Network& network_;
  int k_;
  NodeIndex sink_;
  std::vector<NodeIndex> side_;
};

// ---------------------------------------------------------------------------
// Shortest path distances for the Lagrangian bound.

double DijkstraDistance(const Network& network, const std::vector<double>& length, NodeIndex source,
                        NodeIndex target) {
  std::vector<double> dist(network.num_nodes(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, NodeIndex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    if (v == target) return d;
    for (const Incidence& inc : network.incident(v)) {
      const double nd = d + length[inc.edge];
      if (nd < dist[inc.neighbor]) {
        dist[inc.neighbor] = nd;
        heap.push({nd, inc.neighbor});
      }
    }
  }
  return dist[target];
}

// Disaggregated cutting-plane model of Phi:
//   Phi(gamma) >= k c.gamma + sum_i max_j (b_ij - p_ij . gamma)
// with one cut per terminal and evaluation. The LP over gamma in a box
// [l, u] is solved in dual form, so it has one row per terminal and per edge
// and one column per cut:
//   max sum b_ij w_ij + l.s - u.v
//   s.t. sum_j w_ij = 1, sum_ij p_ij(e) w_ij + s_e - v_e = k c(e), w, s, v >= 0.
class CutModel {
  using BasisKey = std::array<int, 2>;
  enum : int { kCutVar, kLowerVar, kUpperVar, kTerminalRow, kEdgeRow };

 public:
  struct Cut {
    double offset = 0.0;                           // b_ij
    std::vector<std::pair<EdgeIndex, double>> slope;  // p_ij, nonzero entries
  };
  struct Solution {
    double value = 0.0;
    std::vector<double> gamma;
    // sum_j w_ij clamp(p_ij, 0, c): multipliers for the Lagrangian bound.
    std::vector<std::vector<double>> prices;
  };

  CutModel(const Network& network, int k) : network_(network), k_(k), cuts_(network.num_terminals()) {}

  void Add(int terminal, Cut cut) {
    cuts_[terminal].push_back(std::move(cut));
    ++size_;
  }
  int size() const { return size_; }

  Solution Solve(const std::vector<double>& lower, const std::vector<double>& upper) {
    const int m = network_.num_edges();
    const int t = static_cast<int>(cuts_.size());
    LinearProgram lp(ObjectiveSense::kMaximize);
    std::vector<BasisKey> keys;
    std::vector<std::vector<LpTerm>> terminal_rows(t);
    std::vector<std::vector<LpTerm>> edge_rows(m);
    std::vector<std::vector<int>> cut_var(t);
    for (int i = 0; i < t; ++i) {
      for (std::size_t j = 0; j < cuts_[i].size(); ++j) {
        const int w = lp.AddVariable(0.0, kInfinity, cuts_[i][j].offset);
        keys.push_back({kCutVar, CutId(i, j)});
        cut_var[i].push_back(w);
        terminal_rows[i].push_back({w, 1.0});
        for (const auto& [e, p] : cuts_[i][j].slope) edge_rows[e].push_back({w, p});
      }
    }
    for (EdgeIndex e = 0; e < m; ++e) {
      const int sv = lp.AddVariable(0.0, kInfinity, lower[e]);
      keys.push_back({kLowerVar, e});
      const int vv = lp.AddVariable(0.0, kInfinity, -upper[e]);
      keys.push_back({kUpperVar, e});
      edge_rows[e].push_back({sv, 1.0});
      edge_rows[e].push_back({vv, -1.0});
    }
    for (int i = 0; i < t; ++i) {
      lp.AddRow(std::move(terminal_rows[i]), RowRelation::kEqual, 1.0);
      keys.push_back({kTerminalRow, i});
    }
    std::vector<int> edge_row(m);
    for (EdgeIndex e = 0; e < m; ++e) {
      edge_row[e] = lp.AddRow(std::move(edge_rows[e]), RowRelation::kEqual, k_ * network_.cost(e));
      keys.push_back({kEdgeRow, e});
    }
    LpOptions options;
    options.start_basis.reserve(keys.size());
    for (const BasisKey& key : keys) {
      auto it = basis_.find(key);
      options.start_basis.push_back(it != basis_.end() ? it->second
                                    : key[0] >= kTerminalRow ? BasisStatus::kBasic
                                                             : BasisStatus::kAtLower);
    }
    LpSolution sol = SolveLp(lp, options);
    if (sol.status != LpStatus::kOptimal) throw SolverError("cut model ended " + ToString(sol.status));
    basis_.clear();
    for (std::size_t q = 0; q < keys.size(); ++q) basis_[keys[q]] = sol.basis[q];

    Solution out;
    out.value = sol.objective;
    // gamma is the dual of the edge rows; settle the sign convention by
    // matching the model value.
    std::vector<double> plus(m);
    std::vector<double> minus(m);
    for (EdgeIndex e = 0; e < m; ++e) {
      plus[e] = std::clamp(sol.duals[edge_row[e]], lower[e], upper[e]);
      minus[e] = std::clamp(-sol.duals[edge_row[e]], lower[e], upper[e]);
    }
    out.gamma = std::abs(Value(plus) - out.value) <= std::abs(Value(minus) - out.value) ? plus : minus;
    out.prices.assign(t, std::vector<double>(m, 0.0));
    for (int i = 0; i < t; ++i) {
      for (std::size_t j = 0; j < cuts_[i].size(); ++j) {
        const double w = sol.primal[cut_var[i][j]];
        if (w <= 0.0) continue;
        for (const auto& [e, p] : cuts_[i][j].slope) out.prices[i][e] += w * std::clamp(p, 0.0, network_.cost(e));
      }
    }
    return out;
  }

  // The model at gamma.
  double Value(const std::vector<double>& gamma) const {
    double value = 0.0;
    for (EdgeIndex e = 0; e < network_.num_edges(); ++e) value += k_ * network_.cost(e) * gamma[e];
    for (const auto& cuts : cuts_) {
      double top = -kInfinity;
      for (const Cut& cut : cuts) {
        double v = cut.offset;
        for (const auto& [e, p] : cut.slope) v -= p * gamma[e];
        top = std::max(top, v);
      }
      value += top;
    }
    return value;
  }

 private:
  // Stable across solves: cuts are only appended.
  int CutId(int terminal, std::size_t j) const { return static_cast<int>(j) * static_cast<int>(cuts_.size()) + terminal; }

  const Network& network_;
  int k_;
  std::vector<std::vector<Cut>> cuts_;
  int size_ = 0;
  std::map<BasisKey, BasisStatus> basis_;
};

std::vector<double> EdgeLoads(const RoutingTemplate& routing, EdgeIndex e) {
  std::vector<double> loads;
  loads.reserve(routing.commodities.size());
  for (const Commodity& c : routing.commodities) loads.push_back(c.Load(e));
  return loads;
}

}  // namespace

// ---------------------------------------------------------------------------

FrReservation HandcraftedFrReservation(const Network& network, int k) {
  CheckK(k);
  const NodeIndex r = network.RequireSink();
  const int n = network.num_terminals();
  if (n != network.num_nodes() - 1) throw StructuralError("gap shape: every non-sink node must be a terminal");
  if (k > n) throw ArgumentError("k exceeds the number of terminals");
  const Rational port_cost = MakeRational(n, k);
  const Rational beta = MakeRational(k, n);
  std::vector<int> ports(network.num_nodes(), 0);
  FrReservation out;
  out.reservation = ZeroReservation(network);
  for (EdgeIndex e = 0; e < network.num_edges(); ++e) {
    const Edge& edge = network.edge(e);
    if (edge.a == r || edge.b == r) {
      ++ports[edge.Other(r)];
      if (edge.cost != port_cost) {
        throw StructuralError("gap shape: port " + network.EdgeKey(e) + " costs " + FormatRational(edge.cost) +
                              ", expected " + FormatRational(port_cost));
      }
      out.reservation.capacity[e] = beta;
    } else {
      if (edge.cost != 1) throw StructuralError("gap shape: expander edge " + network.EdgeKey(e) + " does not cost 1");
      out.reservation.capacity[e] = 1;
    }
  }
  for (NodeIndex v : network.terminals()) {
    if (ports[v] != 1) throw StructuralError("gap shape: terminal '" + network.id(v) + "' has no port edge");
  }
  out.cost = ReservationCost(network, out.reservation);
  return out;
}

FrReservation HandcraftedFrReservation(const GapInstance& instance) {
  return HandcraftedFrReservation(instance.network, instance.k);
}

FrSolution SolveFrSingleSink(const Network& network, int k, const FrSolveOptions& options) {
  CheckK(k);
  const auto start = Clock::now();
  FrCutModel model(network, k);
  const int side = static_cast<int>(model.side().size());
  const bool exact = options.exact_separation.value_or(side <= 20);
  if (exact && side > 20) {
    throw RefusedError("exhaustive FR separation is limited to 20 non-sink nodes (have " + std::to_string(side) + ")");
  }
  const double tolerance = 1e-6;
  std::mt19937_64 rng(options.seed);

  LinearProgram lp(ObjectiveSense::kMinimize);
  for (EdgeIndex e = 0; e < network.num_edges(); ++e) {
    lp.AddVariable(0.0, kInfinity, network.cost(e), "u_" + std::to_string(e));
  }
  std::vector<CutSet> cuts;
  std::set<std::vector<char>> present;
  auto add_cut = [&](CutSet s) {
    if (!present.insert(s.in).second) return false;
    LpRow row = model.Row(s);
    if (row.terms.empty()) {
      if (row.rhs > 0) {
        throw InfeasibleError("terminal set {" + std::to_string(s.terminals) + " terminals} has no edge to the rest");
      }
      return false;
    }
    lp.AddRow(std::move(row.terms), row.relation, row.rhs);
    cuts.push_back(std::move(s));
    return true;
  };
  for (NodeIndex v : model.side()) add_cut(model.FromNodes({v}));
  add_cut(model.FromNodes(model.side()));

  FrSolution out;
  LpSolution sol;
  std::int64_t checked = 0;
  int rounds = 0;
  bool converged = false;
  while (rounds < options.max_rounds) {
    ++rounds;
    sol = SolveLp(lp, options.lp);
    if (sol.status != LpStatus::kOptimal) {
      throw SolverError("FR cut LP ended " + ToString(sol.status) + " in round " + std::to_string(rounds));
    }
    std::vector<CutSet> fresh =
        exact ? model.SeparateExhaustive(sol.primal, tolerance, options.cuts_per_round, &checked)
              : model.SeparateLocal(sol.primal, tolerance, options.cuts_per_round, options.local_search_starts, rng,
                                    &checked);
    int added = 0;
    for (CutSet& s : fresh) added += add_cut(std::move(s)) ? 1 : 0;
    if (added == 0) {
      converged = true;
      break;
    }
  }

  out.reservation = ZeroReservation(network);
  for (EdgeIndex e = 0; e < network.num_edges(); ++e) {
    out.reservation.capacity[e] = SnapToRational(std::max(0.0, sol.primal[e]));
  }
  for (const CutSet& s : cuts) out.cuts.push_back(model.Nodes(s));

  CertificateCheck check = VerifyCertificate(lp, sol);
  SolveReport& report = out.report;
  report.model = RoutingModel::kFR;
  report.cost = sol.objective;
  const Rational snapped = ReservationCost(network, out.reservation);
  if (std::abs(snapped.get_d() - sol.objective) <= 1e-6 * std::max(1.0, std::abs(sol.objective))) {
    report.exact_cost = FormatRational(snapped);
  }
  report.solver = exact ? "fr_cut_lp_exhaustive" : "fr_cut_lp_local_search";
  report.iterations = rounds;
  report.bound = exact && converged && check.pass ? BoundType::kExact : BoundType::kLower;
  report.certificate.numbers["objective"] = sol.objective;
  report.certificate.numbers["duality_gap"] = check.gap;
  report.certificate.numbers["cuts"] = static_cast<double>(cuts.size());
  report.certificate.numbers["subsets_checked"] = static_cast<double>(checked);
  report.certificate.numbers["simplex_iterations"] = sol.iterations;
  report.certificate.labels["separation"] = exact ? "exhaustive" : "local_search";
  report.certificate.labels["cut_condition"] = "derived";
  report.certificate.labels["converged"] = converged ? "true" : "false";
  if (!exact || !converged) report.certificate.numbers.erase("duality_gap");
  EnforceExactInvariant(&report, BoundType::kLower);
  report.runtime_seconds = Seconds(start);
  report.seed = exact ? std::nullopt : std::optional<std::uint64_t>(options.seed);
  return out;
}

// ---------------------------------------------------------------------------

BarCostBreakdown BarCost(const Network& network, int k, const BarSolution& solution) {
  CheckK(k);
  const NodeIndex r = network.RequireSink();
  const int m = network.num_edges();
  if (static_cast<int>(solution.gamma.size()) != m) throw StructuralError("gamma does not cover every edge");
  for (EdgeIndex e = 0; e < m; ++e) {
    const double g = solution.gamma[e];
    if (!(g >= -kFlowTolerance && g <= 1.0 + kFlowTolerance)) {
      throw StructuralError("gamma on edge " + network.EdgeKey(e) + " is outside [0, 1]: " + std::to_string(g));
    }
  }
  const auto& terminals = network.terminals();
  const auto& commodities = solution.routing.commodities;
  if (commodities.size() != terminals.size()) {
    throw StructuralError("buy-and-rent solution needs one flow per terminal");
  }
  for (std::size_t i = 0; i < terminals.size(); ++i) {
    if (commodities[i].source != terminals[i] || commodities[i].target != r) {
      throw StructuralError("flow " + std::to_string(i) + " is not terminal '" + network.id(terminals[i]) +
                            "' to the sink");
    }
  }
  TemplateValidation validation = ValidateTemplate(network, solution.routing);
  for (std::size_t i = 0; i < validation.residuals.size(); ++i) {
    if (validation.residuals[i] > kLpTolerance) {
      throw StructuralError("flow of terminal '" + network.id(terminals[i]) + "' is not a unit flow (residual " +
                            std::to_string(validation.residuals[i]) + ")");
    }
  }

  BarCostBreakdown out;
  out.rent_per_terminal.assign(terminals.size(), 0.0);
  for (EdgeIndex e = 0; e < m; ++e) {
    const double c = network.cost(e);
    const double g = std::clamp(solution.gamma[e], 0.0, 1.0);
    out.buy += k * g * c;
    for (std::size_t i = 0; i < commodities.size(); ++i) {
      const double excess = commodities[i].Load(e) - g;
      if (excess > 0) out.rent_per_terminal[i] += c * excess;
    }
  }
  for (double rent : out.rent_per_terminal) out.rent += rent;
  out.total = out.buy + out.rent;
  return out;
}

BarSolution MakeBarSolution(const Network& network, int k, std::vector<double> gamma, RoutingTemplate routing) {
  BarSolution sol;
  sol.k = k;
  sol.gamma = std::move(gamma);
  sol.routing = std::move(routing);
  BarCostBreakdown cost = BarCost(network, k, sol);
  sol.buy_cost = cost.buy;
  sol.rent_cost = cost.rent;
  sol.total = cost.total;
  return sol;
}

std::vector<double> OptimalGammaFromTemplate(const Network& network, const RoutingTemplate& routing, int k) {
  CheckK(k);
  std::vector<double> gamma(network.num_edges(), 0.0);
  for (EdgeIndex e = 0; e < network.num_edges(); ++e) {
    gamma[e] = std::min(1.0, KthLargest(EdgeLoads(routing, e), k));
  }
  return gamma;
}

std::vector<double> RentPreferringGamma(const Network& network, const RoutingTemplate& routing, int k) {
  CheckK(k);
  std::vector<double> gamma(network.num_edges(), 0.0);
  for (EdgeIndex e = 0; e < network.num_edges(); ++e) {
    gamma[e] = std::min(1.0, KthLargest(EdgeLoads(routing, e), k + 1));
  }
  return gamma;
}

long MprLpVariableCount(const Network& network) {
  const long m = network.num_edges();
  return m + 3L * m * network.num_terminals();
}

MprResult SolveMprBarLp(const Network& network, int k, const MprLpOptions& options) {
  CheckK(k);
  const auto start = Clock::now();
  const NodeIndex r = network.RequireSink();
  const long columns = MprLpVariableCount(network);
  if (columns > options.max_variables) {
    throw RefusedError("monolithic MPR LP would need " + std::to_string(columns) + " variables (guard " +
                       std::to_string(options.max_variables) + "); use the decomposition solver");
  }
  const int m = network.num_edges();
  const auto& terminals = network.terminals();
  const int t = static_cast<int>(terminals.size());

  LinearProgram lp(ObjectiveSense::kMinimize);
  for (EdgeIndex e = 0; e < m; ++e) lp.AddVariable(0.0, 1.0, k * network.cost(e), "g_" + std::to_string(e));
  // Per terminal block: forward, backward, rent for each edge.
  auto fwd = [&](int i, EdgeIndex e) { return m + 3 * (i * m + e); };
  for (int i = 0; i < t; ++i) {
    for (EdgeIndex e = 0; e < m; ++e) {
      const std::string tag = std::to_string(i) + "_" + std::to_string(e);
      lp.AddVariable(0.0, 1.0, 0.0, "xf_" + tag);
      lp.AddVariable(0.0, 1.0, 0.0, "xb_" + tag);
      lp.AddVariable(0.0, kInfinity, network.cost(e), "p_" + tag);
    }
  }
  for (int i = 0; i < t; ++i) {
    for (NodeIndex v = 0; v < network.num_nodes(); ++v) {
      if (v == r) continue;
      std::vector<LpTerm> terms;
      for (const Incidence& inc : network.incident(v)) {
        const bool tail = network.edge(inc.edge).a == v;
        terms.push_back({fwd(i, inc.edge), tail ? 1.0 : -1.0});
        terms.push_back({fwd(i, inc.edge) + 1, tail ? -1.0 : 1.0});
      }
      lp.AddRow(std::move(terms), RowRelation::kEqual, v == terminals[i] ? 1.0 : 0.0);
    }
    for (EdgeIndex e = 0; e < m; ++e) {
      lp.AddRow({{fwd(i, e), 1.0}, {fwd(i, e) + 1, 1.0}, {e, -1.0}, {fwd(i, e) + 2, -1.0}}, RowRelation::kLessEqual,
                0.0);
    }
  }

  LpSolution sol = SolveLp(lp, options.lp);
  if (sol.status != LpStatus::kOptimal) {
    throw SolverError("MPR buy-and-rent LP ended " + ToString(sol.status));
  }
  CertificateCheck check = VerifyCertificate(lp, sol);

  RoutingTemplate routing;
  for (int i = 0; i < t; ++i) {
    Commodity c = EmptyCommodity(network, terminals[i], r);
    for (EdgeIndex e = 0; e < m; ++e) {
      const double f = sol.primal[fwd(i, e)];
      const double b = sol.primal[fwd(i, e) + 1];
      c.forward[e] = f > 1e-12 ? std::min(f, 1.0) : 0.0;
      c.backward[e] = b > 1e-12 ? std::min(b, 1.0) : 0.0;
    }
    routing.commodities.push_back(std::move(c));
  }
  std::vector<double> gamma = RentPreferringGamma(network, routing, k);

  MprResult out;
  out.solution = MakeBarSolution(network, k, std::move(gamma), std::move(routing));
  SolveReport& report = out.report;
  report.model = RoutingModel::kMPR;
  report.cost = out.solution.total;
  report.solver = "bar_lp";
  report.bound = check.pass ? BoundType::kExact : BoundType::kUpper;
  report.iterations = sol.iterations;
  report.certificate.numbers["objective"] = sol.objective;
  report.certificate.numbers["duality_gap"] = check.gap;
  report.certificate.numbers["primal_residual"] = check.primal_residual;
  report.certificate.numbers["dual_residual"] = check.dual_residual;
  report.certificate.numbers["bland_iterations"] = sol.bland_iterations;
  report.certificate.numbers["variables"] = static_cast<double>(columns);
  report.certificate.numbers["rows"] = lp.num_rows();
  report.certificate.numbers["buy_cost"] = out.solution.buy_cost;
  report.certificate.numbers["rent_cost"] = out.solution.rent_cost;
  if (!check.pass) report.certificate.labels["certificate"] = check.detail;
  EnforceExactInvariant(&report, BoundType::kUpper);
  report.runtime_seconds = Seconds(start);
  return out;
}

PhiEvaluation EvaluatePhi(const Network& network, int k, const std::vector<double>& gamma, int threads) {
  CheckK(k);
  const NodeIndex r = network.RequireSink();
  const int m = network.num_edges();
  if (static_cast<int>(gamma.size()) != m) throw StructuralError("gamma does not cover every edge");
  const auto& terminals = network.terminals();
  const auto& cost = network.costs();
  std::vector<MinCostFlowResult> flows(terminals.size());
  std::vector<double> distances(terminals.size(), 0.0);
  std::vector<std::vector<double>> prices(terminals.size());
  internal::ParallelFor(terminals.size(), threads, [&](std::size_t i) {
    flows[i] = MinCostUnitFlow(network, gamma, cost, terminals[i], r);
    std::vector<double>& price = prices[i];
    price.resize(m);
    for (EdgeIndex e = 0; e < m; ++e) {
      price[e] = std::min(cost[e], flows[i].free_price_forward[e] + flows[i].free_price_backward[e]);
    }
    distances[i] = DijkstraDistance(network, price, terminals[i], r);
  });

  PhiEvaluation out;
  out.subgradient.assign(m, 0.0);
  std::vector<double> price_sum(m, 0.0);
  for (EdgeIndex e = 0; e < m; ++e) {
    out.value += k * cost[e] * gamma[e];
    out.subgradient[e] = k * cost[e];
  }
  out.rents.resize(terminals.size());
  out.free_prices.assign(terminals.size(), std::vector<double>(m));
  for (std::size_t i = 0; i < terminals.size(); ++i) {
    out.rent += flows[i].rental_cost;
    out.rents[i] = flows[i].rental_cost;
    for (EdgeIndex e = 0; e < m; ++e) {
      out.free_prices[i][e] = flows[i].free_price_forward[e] + flows[i].free_price_backward[e];
    }
    out.lower_bound += distances[i];
    for (EdgeIndex e = 0; e < m; ++e) {
      out.subgradient[e] -= flows[i].free_price_forward[e] + flows[i].free_price_backward[e];
      price_sum[e] += prices[i][e];
    }
    out.routing.commodities.push_back(std::move(flows[i].flow));
  }
  out.value += out.rent;
  for (EdgeIndex e = 0; e < m; ++e) out.lower_bound += std::min(0.0, k * cost[e] - price_sum[e]);
  return out;
}

MprResult SolveMprDecomposition(const Network& network, int k, const MprDecompositionOptions& options) {
  CheckK(k);
  const auto start = Clock::now();
  const NodeIndex r = network.RequireSink();
  const int m = network.num_edges();
  const auto& terminals = network.terminals();
  const int t = static_cast<int>(terminals.size());
  std::vector<double> center(m, 0.0);
  if (options.warm_start) {
    if (static_cast<int>(options.warm_start->size()) != m) throw StructuralError("warm start does not cover every edge");
    for (EdgeIndex e = 0; e < m; ++e) center[e] = std::clamp((*options.warm_start)[e], 0.0, 1.0);
  }

  CutModel model(network, k);
  BarSolution best;
  best.total = kInfinity;
  double best_lower = 0.0;
  auto gap = [&] { return (best.total - best_lower) / std::max(1.0, std::abs(best.total)); };

  // Evaluates Phi, records the cuts and offers the flows as a solution.
  auto evaluate = [&](const std::vector<double>& gamma) {
    PhiEvaluation eval = EvaluatePhi(network, k, gamma, options.threads);
    for (int i = 0; i < t; ++i) {
      CutModel::Cut cut;
      cut.offset = eval.rents[i];
      for (EdgeIndex e = 0; e < m; ++e) {
        const double p = eval.free_prices[i][e];
        if (p == 0.0) continue;
        cut.offset += p * gamma[e];
        cut.slope.push_back({e, p});
      }
      model.Add(i, std::move(cut));
    }
    best_lower = std::max(best_lower, eval.lower_bound);
    if (eval.value < best.total - 1e-12 * std::max(1.0, eval.value)) {
      best = MakeBarSolution(network, k, gamma, std::move(eval.routing));
    }
    return eval.value;
  };

  // L(Lambda) = sum_i dist_i(Lambda_i) + sum_e min(0, k c(e) - sum_i Lambda_i(e))
  // for Lambda_i(e) in [0, c(e)].
  auto lagrangian = [&](const std::vector<std::vector<double>>& lambda) {
    double value = 0.0;
    std::vector<double> sum(m, 0.0);
    for (int i = 0; i < t; ++i) {
      value += DijkstraDistance(network, lambda[i], terminals[i], r);
      for (EdgeIndex e = 0; e < m; ++e) sum[e] += lambda[i][e];
    }
    for (EdgeIndex e = 0; e < m; ++e) value += std::min(0.0, k * network.cost(e) - sum[e]);
    return value;
  };

  const std::vector<double> zeros(m, 0.0);
  const std::vector<double> ones(m, 1.0);
  // Global model minimum and the Lagrangian at its multipliers: both lower
  // bounds.
  auto global_bound = [&] {
    CutModel::Solution global = model.Solve(zeros, ones);
    best_lower = std::max({best_lower, global.value, lagrangian(global.prices)});
    return global;
  };

  // Box-constrained cutting planes around the best point (serious steps
  // move the center, null steps only add cuts).
  double center_value = evaluate(center);
  double radius = 0.1;
  int iterations = 0;
  int serious_steps = 0;
  int global_solves = 0;
  constexpr int kGlobalInterval = 10;
  std::vector<double> lower(m);
  std::vector<double> upper(m);
  while (gap() > options.tolerance && iterations < options.max_iterations) {
    ++iterations;
    for (EdgeIndex e = 0; e < m; ++e) {
      lower[e] = std::max(0.0, center[e] - radius);
      upper[e] = std::min(1.0, center[e] + radius);
    }
    CutModel::Solution local = model.Solve(lower, upper);
    const double predicted = center_value - local.value;
    if (predicted <= 0.25 * options.tolerance * std::max(1.0, center_value) || iterations % kGlobalInterval == 0) {
      ++global_solves;
      CutModel::Solution global = global_bound();
      if (gap() <= options.tolerance) break;
      if (predicted <= 0.25 * options.tolerance * std::max(1.0, center_value)) {
        // Flat inside the box: step to the global model minimum instead.
        local = std::move(global);
        radius = std::min(1.0, 2 * radius);
      }
    }
    const double value = evaluate(local.gamma);
    const double decrease = center_value - value;
    if (decrease >= 0.1 * std::max(predicted, 0.0) && decrease > 0.0) {
      ++serious_steps;
      center = local.gamma;
      center_value = value;
      if (decrease >= 0.5 * predicted) radius = std::min(1.0, 2 * radius);
    } else if (value > center_value) {
      radius = std::max(1e-3, 0.7 * radius);
    }
    if (options.progress) options.progress(iterations, best.total, best_lower, model.size(), Seconds(start));
  }
  if (gap() > options.tolerance) global_bound();

  MprResult out;
  out.solution = std::move(best);
  SolveReport& report = out.report;
  report.model = RoutingModel::kMPR;
  report.cost = out.solution.total;
  report.bound = BoundType::kUpper;
  report.solver = "bar_decomposition";
  report.iterations = iterations;
  report.certificate.numbers["lower_bound"] = best_lower;
  report.certificate.numbers["relative_gap"] = gap();
  report.certificate.numbers["cuts"] = model.size();
  report.certificate.numbers["serious_steps"] = serious_steps;
  report.certificate.numbers["global_solves"] = global_solves;
  report.certificate.numbers["buy_cost"] = out.solution.buy_cost;
  report.certificate.numbers["rent_cost"] = out.solution.rent_cost;
  report.certificate.labels["converged"] = gap() <= options.tolerance ? "true" : "false";
  report.runtime_seconds = Seconds(start);
  return out;
}

}  // namespace robustnet
