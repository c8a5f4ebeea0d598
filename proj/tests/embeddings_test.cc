#include "robustnet/embeddings.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "robustnet/errors.h"
#include "robustnet/instances.h"
#include "robustnet/trees.h"
#include "test_graphs.h"

namespace robustnet {
namespace {

using testing_util::EdgeSpec;
using testing_util::MakeNetwork;
using testing_util::RandomConnectedEdges;

// Floyd-Warshall over doubles.
std::vector<std::vector<double>> FloydDistances(int n, const std::vector<EdgeSpec>& edges) {
  std::vector<std::vector<double>> d(n, std::vector<double>(n, INFINITY));
  for (int v = 0; v < n; ++v) d[v][v] = 0;
  for (const EdgeSpec& e : edges) {
    d[e.a][e.b] = std::min(d[e.a][e.b], e.cost.get_d());
    d[e.b][e.a] = d[e.a][e.b];
  }
  for (int z = 0; z < n; ++z) {
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y) d[x][y] = std::min(d[x][y], d[x][z] + d[z][y]);
    }
  }
  return d;
}

TEST(MetricTest, UnitPathAndRandomGraphs) {
  std::vector<EdgeSpec> path;
  for (int v = 0; v + 1 < 6; ++v) path.push_back({v, v + 1, 1});
  FiniteMetric m = MetricFromNetwork(MakeNetwork(6, path));
  for (int x = 0; x < 6; ++x) {
    for (int y = 0; y < 6; ++y) EXPECT_EQ(m.distance[x][y], std::abs(x - y));
  }
  EXPECT_NO_THROW(ValidateMetric(m));

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<EdgeSpec> edges = RandomConnectedEdges(rng, 8, 6, 9);
    FiniteMetric r = MetricFromNetwork(MakeNetwork(8, edges));
    const auto oracle = FloydDistances(8, edges);
    for (int x = 0; x < 8; ++x) {
      for (int y = 0; y < 8; ++y) EXPECT_EQ(r.distance[x][y].get_d(), oracle[x][y]);
    }
  }
  EXPECT_THROW(MetricFromNetwork(MakeNetwork(3, {{0, 1, 1}})), StructuralError);
}

TEST(MetricTest, RejectsBrokenTables) {
  FiniteMetric m{{"a", "b", "c"}, {{0, 1, 5}, {1, 0, 1}, {5, 1, 0}}};
  EXPECT_THROW(ValidateMetric(m), StructuralError);  // 5 > 1 + 1
  m.distance[0][2] = m.distance[2][0] = 2;
  EXPECT_NO_THROW(ValidateMetric(m));
  m.distance[0][1] = 2;
  EXPECT_THROW(ValidateMetric(m), StructuralError);
  m.distance[0][1] = 1;
  m.distance[1][1] = 1;
  EXPECT_THROW(ValidateMetric(m), StructuralError);
}

TEST(FrtTest, OneAndTwoPoints) {
  FiniteMetric one{{"x"}, {{0}}};
  DominatingTreeMetric t1 = FrtEmbed(one, 3);
  EXPECT_EQ(t1.Distance(0, 0), 0);
  FiniteMetric two{{"x", "y"}, {{0, 5}, {5, 0}}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    DominatingTreeMetric t = FrtEmbed(two, seed);
    EXPECT_GE(t.Distance(0, 1), 5);
    EXPECT_LE(t.Distance(0, 1), 20);
    EXPECT_EQ(t.Distance(0, 1), t.Distance(1, 0));
    EXPECT_GE(t.beta, 1.0);
    EXPECT_LT(t.beta, 2.0);
  }
}

TEST(FrtTest, HierarchyIsNestedPartition) {
  std::mt19937_64 rng(6);
  Network net = MakeNetwork(20, RandomConnectedEdges(rng, 20, 15, 7));
  FiniteMetric metric = MetricFromNetwork(net);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    DominatingTreeMetric t = FrtEmbed(metric, seed);
    std::vector<int> covered(t.nodes.size(), 0);
    for (std::size_t v = 1; v < t.nodes.size(); ++v) {
      const TreeMetricNode& node = t.nodes[v];
      const TreeMetricNode& parent = t.nodes[node.parent];
      EXPECT_EQ(node.level + 1, parent.level);
      covered[node.parent] += static_cast<int>(node.members.size());
      for (int x : node.members) {
        EXPECT_NE(std::find(parent.members.begin(), parent.members.end(), x), parent.members.end());
        // Cluster diameter below 2^(level+1) in scaled units.
        for (int y : node.members) EXPECT_LT(metric.distance[x][y] * t.scale, Rational(2L << node.level));
      }
    }
    for (std::size_t v = 0; v < t.nodes.size(); ++v) {
      if (covered[v] > 0) EXPECT_EQ(covered[v], static_cast<int>(t.nodes[v].members.size()));
    }
    for (int x = 0; x < metric.size(); ++x) {
      EXPECT_EQ(t.nodes[t.leaf[x]].level, 0);
      EXPECT_EQ(t.nodes[t.leaf[x]].members, std::vector<int>{x});
    }
  }
}

TEST(FrtTest, DominatesTheMetric) {
  std::mt19937_64 rng(7);
  long checks = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 8 + trial;
    FiniteMetric metric = MetricFromNetwork(MakeNetwork(n, RandomConnectedEdges(rng, n, n, 20)));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      DominatingTreeMetric t = FrtEmbed(metric, seed * 101 + trial);
      for (int x = 0; x < n; ++x) {
        for (int y = x + 1; y < n; ++y) {
          ASSERT_GE(t.Distance(x, y), metric.distance[x][y]);
          ++checks;
        }
      }
    }
  }
  EXPECT_GE(checks, 10000);
}

TEST(FrtTest, SameSeedSameTree) {
  GapInstance g = BuildGapInstance(16, 0);
  FiniteMetric metric = MetricFromNetwork(g.network);
  DominatingTreeMetric a = FrtEmbed(metric, 42), b = FrtEmbed(metric, 42);
  EXPECT_EQ(a.permutation, b.permutation);
  EXPECT_EQ(a.beta, b.beta);
  ASSERT_EQ(a.nodes.size(), b.nodes.size());
  for (std::size_t v = 0; v < a.nodes.size(); ++v) EXPECT_EQ(a.nodes[v].members, b.nodes[v].members);
}

TEST(FrtTest, ExpectedStretchOnExpander) {
  // Max over pairs of the sampled mean of d_T / d_G; measured 24.5 at seed 0.
  const int n = 64;
  FiniteMetric metric = MetricFromNetwork(RandomRegularGraph(n, 4, 0));
  std::vector<double> sum(n * n, 0.0);
  const int samples = 500;
  for (int s = 0; s < samples; ++s) {
    DominatingTreeMetric t = FrtEmbed(metric, SampleSeed(0, s));
    for (int x = 0; x < n; ++x) {
      for (int y = x + 1; y < n; ++y) sum[x * n + y] += Rational(t.Distance(x, y) / metric.distance[x][y]).get_d();
    }
  }
  double worst = 0;
  for (int x = 0; x < n; ++x) {
    for (int y = x + 1; y < n; ++y) worst = std::max(worst, sum[x * n + y] / samples);
  }
  EXPECT_GE(worst, 1.0);
  EXPECT_LE(worst, 8.0 * std::log2(n));
}

TEST(TreeCapacityTest, StarHoseCountsTerminalsBelow) {
  std::vector<EdgeSpec> star;
  for (int v = 1; v <= 6; ++v) star.push_back({0, v, 1 + v % 3});
  Network net = MakeNetwork(7, star, 0);
  FiniteMetric metric = MetricFromNetwork(net);
  for (int k : {1, 3, 6}) {
    SingleSinkHose hose = UnitSingleSinkHose(net, k);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      DominatingTreeMetric t = FrtEmbed(metric, seed);
      std::vector<Rational> u = TreeOptimalCapacity(net, t, hose);
      for (std::size_t v = 1; v < t.nodes.size(); ++v) {
        const auto& members = t.nodes[v].members;
        const bool has_sink = std::find(members.begin(), members.end(), 0) != members.end();
        const int terminals_below = static_cast<int>(members.size()) - (has_sink ? 1 : 0);
        const int separated = has_sink ? 6 - terminals_below : terminals_below;
        EXPECT_EQ(u[v], std::min(k, separated));
      }
    }
  }
}

TEST(TreeCapacityTest, EdgeSplittingFiveTerminals) {
  // Path 0 - 1 - ... - 5, sink 0: the edge above {3, 4, 5} carries 3 at k=3,
  // and 2 at k=2.
  Network net = MakeNetwork(6, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1}, {4, 5, 1}}, 0);
  std::vector<bool> side = {false, false, false, true, true, true};
  EXPECT_EQ(MaxCrossingDemand(net, UnitSingleSinkHose(net, 3), side), 3);
  EXPECT_EQ(MaxCrossingDemand(net, UnitSingleSinkHose(net, 2), side), 2);
}

TEST(TransferTest, CostIdentityAndValidRouting) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 10 + trial;
    Network net = MakeNetwork(n, RandomConnectedEdges(rng, n, n / 2, 6), 0);
    const int k = 1 + trial % 4;
    SingleSinkHose hose = UnitSingleSinkHose(net, k);
    DominatingTreeMetric t = FrtEmbed(MetricFromNetwork(net), trial);
    std::vector<Rational> u = TreeOptimalCapacity(net, t, hose);
    TransferResult res = TreeTemplateTransfer(net, t, u, hose);
    EXPECT_EQ(res.cost, res.contracted_tree_cost);
    EXPECT_EQ(res.cost, ReservationCost(net, res.reservation));
    EXPECT_TRUE(ValidateTemplate(net, res.routing).valid);
    EXPECT_EQ(static_cast<int>(res.routing.commodities.size()), n - 1);
    // The routed template fits inside the transferred reservation.
    CapacityReservation needed = TemplateCapacitySingleSink(net, res.routing, k);
    for (EdgeIndex e = 0; e < net.num_edges(); ++e) EXPECT_LE(needed.capacity[e], res.reservation.capacity[e]);
  }
}

TEST(TransferTest, OverlappingImagesAddUp) {
  // Triangle with a long side: the image of every tree edge is a shortest
  // network path, so reservations on shared edges sum.
  Network net = MakeNetwork(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 5}}, 0);
  SingleSinkHose hose = UnitSingleSinkHose(net, 2);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    DominatingTreeMetric t = FrtEmbed(MetricFromNetwork(net), seed);
    std::vector<Rational> u = TreeOptimalCapacity(net, t, hose);
    TransferResult res = TreeTemplateTransfer(net, t, u, hose);
    EXPECT_EQ(res.reservation.capacity[2], 0);
    Rational expected_01 = 0;
    for (std::size_t v = 1; v < t.nodes.size(); ++v) {
      const NodeIndex a = t.nodes[v].representative, b = t.nodes[t.nodes[v].parent].representative;
      if ((a == 0 && b != 0) || (b == 0 && a != 0)) expected_01 += u[v];
    }
    EXPECT_EQ(res.reservation.capacity[0], expected_01);
  }
}

TEST(TreeSamplingTest, MoreSamplesNeverWorse) {
  GapInstance g = BuildGapInstance(16, 0);
  SingleSinkHose hose = UnitSingleSinkHose(g.network, g.k);
  TreeSamplingOptions few;
  few.samples = 10;
  few.seed = 77;
  TreeSamplingOptions many = few;
  many.samples = 50;
  TreeSamplingResult a = SprUpperBoundViaTrees(g.network, hose, few);
  TreeSamplingResult b = SprUpperBoundViaTrees(g.network, hose, many);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.sample_costs[i], b.sample_costs[i]);
  EXPECT_LE(b.best.cost, a.best.cost);
  EXPECT_EQ(b.report.model, RoutingModel::kSPR);
  EXPECT_EQ(b.report.bound, BoundType::kUpper);
  EXPECT_EQ(b.best.cost, b.sample_costs[b.best_sample]);
  EXPECT_EQ(b.best_seed, SampleSeed(77, b.best_sample));
}

TEST(TreeSamplingTest, ThreadCountDoesNotChangeResults) {
  std::mt19937_64 rng(10);
  Network net = MakeNetwork(14, RandomConnectedEdges(rng, 14, 10, 5), 0);
  SingleSinkHose hose = UnitSingleSinkHose(net, 3);
  TreeSamplingOptions one;
  one.samples = 12;
  one.seed = 5;
  TreeSamplingOptions four = one;
  four.threads = 4;
  TreeSamplingResult a = SprUpperBoundViaTrees(net, hose, one);
  TreeSamplingResult b = SprUpperBoundViaTrees(net, hose, four);
  EXPECT_EQ(a.sample_costs, b.sample_costs);
  EXPECT_EQ(a.best_sample, b.best_sample);
}

TEST(TreeSamplingTest, NeverBelowTreeOptimumOnTreeNetworks) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    Network net = MakeNetwork(9, RandomConnectedEdges(rng, 9, 0, 4), 0);
    SingleSinkHose hose = UnitSingleSinkHose(net, 2);
    const Rational optimum = SolveTr(net, hose).cost.cost;
    TreeSamplingOptions options;
    options.samples = 5;
    TreeSamplingResult res = SprUpperBoundViaTrees(net, hose, options);
    EXPECT_GE(res.best.cost, optimum);
  }
  // A single edge: every tree gives the same reservation.
  Network edge = MakeNetwork(2, {{0, 1, 3}}, 0);
  TreeSamplingResult res = SprUpperBoundViaTrees(edge, UnitSingleSinkHose(edge, 1));
  EXPECT_EQ(res.best.cost, 3);
  EXPECT_DOUBLE_EQ(res.report.certificate.numbers.at("template_cost"), 3.0);
}

}  // namespace
}  // namespace robustnet
