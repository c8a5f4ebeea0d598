#include "robustnet/singlesink.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles/bar_oracle.h"
#include "robustnet/errors.h"
#include "robustnet/flow.h"
#include "robustnet/instances.h"
#include "robustnet/lp.h"
#include "test_graphs.h"

namespace robustnet {
namespace {

using testing_util::EdgeSpec;
using testing_util::MakeNetwork;
using testing_util::RandomConnectedEdges;
using testing_util::RandomTemplate;

std::vector<oracle::CostEdge> OracleEdges(const Network& net) {
  std::vector<oracle::CostEdge> out;
  for (EdgeIndex e = 0; e < net.num_edges(); ++e) out.push_back({net.edge(e).a, net.edge(e).b, net.cost(e)});
  return out;
}

Network RandomSingleSink(std::mt19937_64& rng, int n, int extra) {
  return MakeNetwork(n, RandomConnectedEdges(rng, n, extra, 4), 0);
}

double EqTwoCost(const Network& net, const RoutingTemplate& routing, int k) {
  return ReservationCost(net, TemplateCapacitySingleSink(net, routing, k)).get_d();
}

// FR LP with every cut S (sink excluded) written out, no separation.
double FullCutFrValue(const Network& net, int k) {
  const NodeIndex r = net.RequireSink();
  LinearProgram lp;
  for (EdgeIndex e = 0; e < net.num_edges(); ++e) lp.AddVariable(0.0, kInfinity, net.cost(e));
  std::vector<NodeIndex> others;
  for (NodeIndex v = 0; v < net.num_nodes(); ++v) {
    if (v != r) others.push_back(v);
  }
  for (unsigned mask = 1; mask < (1u << others.size()); ++mask) {
    std::vector<bool> in(net.num_nodes(), false);
    int terminals = 0;
    for (std::size_t i = 0; i < others.size(); ++i) {
      if (mask >> i & 1) {
        in[others[i]] = true;
        terminals += net.IsTerminal(others[i]) ? 1 : 0;
      }
    }
    std::vector<LpTerm> terms;
    for (EdgeIndex e = 0; e < net.num_edges(); ++e) {
      if (in[net.edge(e).a] != in[net.edge(e).b]) terms.push_back({e, 1.0});
    }
    lp.AddRow(std::move(terms), RowRelation::kGreaterEqual, std::min(terminals, k));
  }
  LpSolution sol = SolveLp(lp);
  EXPECT_EQ(sol.status, LpStatus::kOptimal);
  return sol.objective;
}

TEST(HandcraftedFrTest, CostsAtSixteenAndSixtyFour) {
  GapInstance g16 = BuildGapInstance(16, 0);
  EXPECT_EQ(HandcraftedFrReservation(g16).cost, 48);
  GapInstance g64 = BuildGapInstance(64, 2);
  FrReservation fr = HandcraftedFrReservation(g64);
  EXPECT_EQ(fr.cost, 192);
  EXPECT_EQ(fr.cost, g64.n * (1 + Rational(g64.d, 2)));
}

TEST(HandcraftedFrTest, ExactFeasibilityAtSixteen) {
  GapInstance g = BuildGapInstance(16, 1);
  FrFeasibility check = CheckFrFeasibility(g.network, HandcraftedFrReservation(g).reservation, g.k, {});
  EXPECT_EQ(check.verdict, FrVerdict::kFeasible);
  ASSERT_TRUE(check.min_slack.has_value());
  EXPECT_GE(*check.min_slack, 0);
}

TEST(HandcraftedFrTest, RejectsNonGapNetwork) {
  Network tri = MakeNetwork(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}}, 0);
  EXPECT_THROW(HandcraftedFrReservation(tri, 1), StructuralError);
}

TEST(SolveFrTest, StarNeedsOnePerPort) {
  for (int k : {1, 5}) {
    std::vector<EdgeSpec> edges;
    for (int v = 1; v <= 5; ++v) edges.push_back({0, v, 1});
    Network star = MakeNetwork(6, edges, 0);
    FrSolution sol = SolveFrSingleSink(star, k);
    EXPECT_NEAR(sol.report.cost, 5.0, 1e-9);
    EXPECT_EQ(sol.report.bound, BoundType::kExact);
    for (EdgeIndex e = 0; e < star.num_edges(); ++e) EXPECT_NEAR(sol.reservation.capacity[e].get_d(), 1.0, 1e-9);
  }
}

TEST(SolveFrTest, GapSixteenWithinHalfOfHandcrafted) {
  GapInstance g = BuildGapInstance(16, 0);
  FrSolution sol = SolveFrSingleSink(g.network, g.k);
  EXPECT_EQ(sol.report.bound, BoundType::kExact);
  EXPECT_GE(sol.report.cost, 24.0 - 1e-6);
  EXPECT_LE(sol.report.cost, 48.0 + 1e-6);
  // The optimum is itself feasible for every subset.
  FrFeasibility check = CheckFrFeasibility(g.network, sol.reservation, g.k, {});
  EXPECT_NE(check.verdict, FrVerdict::kInfeasible);
}

TEST(SolveFrTest, MatchesFullCutLpOnSmallGraphs) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 4 + trial % 4;
    Network net = RandomSingleSink(rng, n, 3);
    const int k = 1 + trial % (n - 1);
    FrSolution sol = SolveFrSingleSink(net, k);
    EXPECT_NEAR(sol.report.cost, FullCutFrValue(net, k), 1e-6) << "trial " << trial;
  }
}

TEST(MprLpTest, SingleTerminalTieGoesToRent) {
  Network net = MakeNetwork(2, {{0, 1, 1}}, 0);
  MprResult res = SolveMprBarLp(net, 1);
  EXPECT_NEAR(res.solution.total, 1.0, 1e-9);
  EXPECT_NEAR(res.solution.gamma[0], 0.0, 1e-12);
  EXPECT_NEAR(res.solution.rent_cost, 1.0, 1e-9);
}

TEST(MprLpTest, TwoTerminalsCostThree) {
  // sink 0, a = 1, b = 2; edges a-r and b-a.
  Network net = MakeNetwork(3, {{1, 0, 1}, {2, 1, 1}}, 0);
  MprResult res = SolveMprBarLp(net, 2);
  EXPECT_NEAR(res.solution.total, 3.0, 1e-9);
  EXPECT_NEAR(oracle::GridBarOptimum(3, OracleEdges(net), {1, 2}, 0, 2, 4), 3.0, 1e-9);
  EXPECT_EQ(res.report.bound, BoundType::kExact);
}

TEST(MprLpTest, AgreesWithGridAndFlowOracles) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + trial % 2;
    Network net = RandomSingleSink(rng, n, 2);
    const int k = 1 + trial % 2;
    MprResult res = SolveMprBarLp(net, k);
    std::vector<int> terminals(net.terminals().begin(), net.terminals().end());
    // The grid only upper-bounds the continuous optimum.
    const double grid = oracle::GridBarOptimum(n, OracleEdges(net), terminals, 0, k, 4);
    EXPECT_LE(res.solution.total, grid + 1e-9);
    // Phi at the LP's gamma, with the oracle's own min-cost flows.
    double phi = 0.0;
    for (EdgeIndex e = 0; e < net.num_edges(); ++e) phi += k * net.cost(e) * res.solution.gamma[e];
    for (int v : terminals) phi += oracle::MinRentUnitFlow(n, OracleEdges(net), res.solution.gamma, v, 0);
    EXPECT_NEAR(phi, res.solution.total, 1e-6);
  }
}

TEST(MprLpTest, CostEqualsCapacityCostOfItsTemplate) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 15; ++trial) {
    Network net = RandomSingleSink(rng, 5 + trial % 4, 4);
    const int k = 1 + trial % 3;
    MprResult res = SolveMprBarLp(net, k);
    EXPECT_NEAR(EqTwoCost(net, res.solution.routing, k), res.solution.total, 1e-6 * std::max(1.0, res.solution.total));
  }
}

TEST(MprLpTest, LargeKRentsShortestPaths) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 6;
    Network net = RandomSingleSink(rng, n, 4);
    // Floyd-Warshall oracle.
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, kInfinity));
    for (int v = 0; v < n; ++v) dist[v][v] = 0.0;
    for (EdgeIndex e = 0; e < net.num_edges(); ++e) {
      dist[net.edge(e).a][net.edge(e).b] = dist[net.edge(e).b][net.edge(e).a] = net.cost(e);
    }
    for (int w = 0; w < n; ++w) {
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) dist[a][b] = std::min(dist[a][b], dist[a][w] + dist[w][b]);
      }
    }
    double expected = 0.0;
    for (NodeIndex v : net.terminals()) expected += dist[v][0];
    MprResult res = SolveMprBarLp(net, n + 3);
    EXPECT_NEAR(res.solution.total, expected, 1e-9);
    for (double g : res.solution.gamma) EXPECT_NEAR(g, 0.0, 1e-12);
    MprResult dec = SolveMprDecomposition(net, n + 3);
    EXPECT_NEAR(dec.solution.total, expected, 1e-6);
  }
}

TEST(MprLpTest, RefusesAboveVariableGuard) {
  GapInstance g = BuildGapInstance(16, 0);
  MprLpOptions options;
  options.max_variables = 10;
  EXPECT_THROW(SolveMprBarLp(g.network, g.k, options), RefusedError);
}

TEST(MprDecompositionTest, WarmStartAtLpGammaReproducesOptimum) {
  GapInstance g = BuildGapInstance(16, 0);
  MprResult lp = SolveMprBarLp(g.network, g.k);
  PhiEvaluation eval = EvaluatePhi(g.network, g.k, lp.solution.gamma);
  EXPECT_NEAR(eval.value, lp.solution.total, 1e-6);
  MprDecompositionOptions options;
  options.warm_start = lp.solution.gamma;
  MprResult dec = SolveMprDecomposition(g.network, g.k, options);
  EXPECT_LE(dec.solution.total, lp.solution.total * 1.01);
}

TEST(MprDecompositionTest, WithinOnePercentOfLpOnGapSixteen) {
  for (std::uint64_t seed : {0, 1}) {
    GapInstance g = BuildGapInstance(16, seed);
    MprResult lp = SolveMprBarLp(g.network, g.k);
    MprResult dec = SolveMprDecomposition(g.network, g.k);
    EXPECT_EQ(dec.report.bound, BoundType::kUpper);
    EXPECT_GE(dec.solution.total, lp.solution.total - 1e-6);
    EXPECT_LE(dec.solution.total, lp.solution.total * 1.01);
    EXPECT_LE(dec.report.certificate.numbers.at("lower_bound"), lp.solution.total + 1e-6);
    BarCostBreakdown again = BarCost(g.network, g.k, dec.solution);
    EXPECT_NEAR(again.total, dec.solution.total, 1e-9 * dec.solution.total);
  }
}

TEST(MprDecompositionTest, AgreesWithLpOnRandomGraphs) {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 10; ++trial) {
    Network net = RandomSingleSink(rng, 6 + trial % 5, 6);
    const int k = 1 + trial % 3;
    MprResult lp = SolveMprBarLp(net, k);
    MprResult dec = SolveMprDecomposition(net, k);
    EXPECT_GE(dec.solution.total, lp.solution.total - 1e-6);
    EXPECT_LE(dec.solution.total, lp.solution.total * 1.01 + 1e-9) << "trial " << trial;
    EXPECT_LE(dec.report.certificate.numbers.at("lower_bound"), lp.solution.total + 1e-6) << "trial " << trial;
  }
}

TEST(MprDecompositionTest, BoundsBracketLpOnGapThirtyTwo) {
  GapInstance g = BuildGapInstance(32, 1);
  MprResult lp = SolveMprBarLp(g.network, g.k);
  MprDecompositionOptions options;
  options.tolerance = 1e-3;
  int calls = 0;
  options.progress = [&](int, double best, double lower, int, double) {
    ++calls;
    EXPECT_LE(lower, best);
  };
  MprResult dec = SolveMprDecomposition(g.network, g.k, options);
  const double lower = dec.report.certificate.numbers.at("lower_bound");
  EXPECT_LE(lower, lp.solution.total + 1e-6);
  EXPECT_GE(dec.solution.total, lp.solution.total - 1e-6);
  EXPECT_LE(dec.report.certificate.numbers.at("relative_gap"), 1e-3);
  EXPECT_EQ(dec.report.certificate.labels.at("converged"), "true");
  EXPECT_GT(calls, 0);
}

TEST(BarCostTest, NoPurchaseIsPureRent) {
  std::mt19937_64 rng(2);
  Network net = RandomSingleSink(rng, 6, 4);
  RoutingTemplate routing = RandomTemplate(net, rng);
  BarSolution sol = MakeBarSolution(net, 2, std::vector<double>(net.num_edges(), 0.0), routing);
  double rent = 0.0;
  for (const Commodity& c : routing.commodities) {
    for (EdgeIndex e = 0; e < net.num_edges(); ++e) rent += net.cost(e) * c.Load(e);
  }
  EXPECT_NEAR(sol.total, rent, 1e-9);
  EXPECT_NEAR(sol.buy_cost, 0.0, 1e-12);
}

TEST(BarCostTest, FullPurchaseCoversUnitFlows) {
  std::mt19937_64 rng(4);
  Network net = RandomSingleSink(rng, 6, 4);
  RoutingTemplate routing = RandomTemplate(net, rng);
  const int k = 3;
  BarSolution sol = MakeBarSolution(net, k, std::vector<double>(net.num_edges(), 1.0), routing);
  double all = 0.0;
  for (EdgeIndex e = 0; e < net.num_edges(); ++e) all += net.cost(e);
  EXPECT_NEAR(sol.total, k * all, 1e-9);
  EXPECT_NEAR(sol.rent_cost, 0.0, 1e-12);
}

TEST(BarCostTest, TamperedSolutionsThrow) {
  std::mt19937_64 rng(6);
  Network net = RandomSingleSink(rng, 5, 3);
  BarSolution sol = MakeBarSolution(net, 2, std::vector<double>(net.num_edges(), 0.0), RandomTemplate(net, rng));
  BarSolution negative = sol;
  negative.gamma[0] = -0.5;
  EXPECT_THROW(BarCost(net, 2, negative), StructuralError);
  BarSolution above = sol;
  above.gamma[1] = 1.5;
  EXPECT_THROW(BarCost(net, 2, above), StructuralError);
  BarSolution halved = sol;
  for (double& f : halved.routing.commodities[0].forward) f *= 0.5;
  for (double& f : halved.routing.commodities[0].backward) f *= 0.5;
  EXPECT_THROW(BarCost(net, 2, halved), StructuralError);
  BarSolution missing = sol;
  missing.routing.commodities.pop_back();
  EXPECT_THROW(BarCost(net, 2, missing), StructuralError);
}

TEST(OptimalGammaTest, DefinitionExamples) {
  // Terminals 1..3 load edge 0 (port of 1) with the given amounts.
  Network net = MakeNetwork(4, {{1, 0, 2}, {2, 0, 1}, {3, 0, 1}, {2, 1, 1}, {3, 1, 1}}, 0);
  auto routing_with = [&](double f2, double f3) {
    RoutingTemplate t;
    Commodity c1 = EmptyCommodity(net, 1, 0);
    AddPathFlow(net, {1, 0}, 1.0, &c1);
    Commodity c2 = EmptyCommodity(net, 2, 0);
    AddPathFlow(net, {2, 0}, 1.0 - f2, &c2);
    if (f2 > 0) AddPathFlow(net, {2, 1, 0}, f2, &c2);
    Commodity c3 = EmptyCommodity(net, 3, 0);
    AddPathFlow(net, {3, 0}, 1.0 - f3, &c3);
    if (f3 > 0) AddPathFlow(net, {3, 1, 0}, f3, &c3);
    t.commodities = {c1, c2, c3};
    return t;
  };
  RoutingTemplate alone = routing_with(0.0, 0.0);
  EXPECT_NEAR(OptimalGammaFromTemplate(net, alone, 2)[0], 0.0, 1e-15);
  RoutingTemplate mixed = routing_with(0.5, 0.4);
  std::vector<double> gamma = OptimalGammaFromTemplate(net, mixed, 2);
  EXPECT_NEAR(gamma[0], 0.5, 1e-15);
  // Edge 0 costs 2: buy 2 * 2 * 0.5, rent 2 * 0.5.
  BarSolution sol = MakeBarSolution(net, 2, gamma, mixed);
  EXPECT_NEAR(sol.total, EqTwoCost(net, mixed, 2), 1e-12);
}

TEST(OptimalGammaTest, BeatsRandomAlternativesPerEdge) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Network net = RandomSingleSink(rng, 7, 5);
    RoutingTemplate routing = RandomTemplate(net, rng);
    const int k = 1 + trial % 3;
    std::vector<double> gamma = OptimalGammaFromTemplate(net, routing, k);
    for (EdgeIndex e = 0; e < net.num_edges(); ++e) {
      auto edge_cost = [&](double g) {
        double rent = 0.0;
        for (const Commodity& c : routing.commodities) rent += std::max(0.0, c.Load(e) - g);
        return net.cost(e) * (k * g + rent);
      };
      const double best = edge_cost(gamma[e]);
      for (int s = 0; s < 100; ++s) EXPECT_LE(best, edge_cost(unit(rng)) + 1e-12);
    }
  }
}

TEST(OptimalGammaTest, EquivalenceOnRandomTemplates) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 9);  // at most 10 terminals
    Network net = RandomSingleSink(rng, n, static_cast<int>(rng() % 6));
    RoutingTemplate routing = RandomTemplate(net, rng);
    const int k = 1 + static_cast<int>(rng() % (n - 1));
    const double capacity_cost = EqTwoCost(net, routing, k);
    BarSolution sol = MakeBarSolution(net, k, OptimalGammaFromTemplate(net, routing, k), routing);
    EXPECT_NEAR(sol.total, capacity_cost, 1e-9 * std::max(1.0, capacity_cost));
    BarSolution lean = MakeBarSolution(net, k, RentPreferringGamma(net, routing, k), routing);
    EXPECT_NEAR(lean.total, capacity_cost, 1e-9 * std::max(1.0, capacity_cost));
    for (EdgeIndex e = 0; e < net.num_edges(); ++e) EXPECT_LE(lean.gamma[e], sol.gamma[e] + 1e-15);
  }
}

}  // namespace
}  // namespace robustnet
