#include "robustnet/io.h"

#include <gtest/gtest.h>

#include <filesystem>

#include "robustnet/errors.h"
#include "test_graphs.h"

namespace robustnet {
namespace {

using testing_util::MakeNetwork;

TEST(InstanceIoTest, GapRoundTripIsByteStable) {
  GapInstance g = BuildGapInstance(16, 3);
  const std::string text = InstanceToJson(MakeInstanceFile(g));
  InstanceFile back = InstanceFromJson(text);
  EXPECT_EQ(back.family, "expander_gap");
  EXPECT_EQ(back.network.num_nodes(), 17);
  ASSERT_TRUE(back.gap.has_value());
  EXPECT_EQ(back.gap->k, g.k);
  EXPECT_EQ(back.gap->beta, g.beta);
  EXPECT_EQ(back.gap->certificate.certified, g.certificate.certified);
  EXPECT_EQ(back.gap->certificate.min_ratio, g.certificate.min_ratio);
  EXPECT_EQ(InstanceToJson(back), text);
  EXPECT_EQ(InstanceToJson(MakeInstanceFile(BuildGapInstance(16, 3))), text);
  EXPECT_EQ(InstanceFingerprint(back), InstanceFingerprint(MakeInstanceFile(g)));
  EXPECT_NE(InstanceFingerprint(back), InstanceFingerprint(MakeInstanceFile(BuildGapInstance(16, 4))));
}

TEST(InstanceIoTest, GirthAndCustomUniverses) {
  GirthInstance g = BuildGirthInstance(64, 1);
  InstanceFile back = InstanceFromJson(InstanceToJson(MakeInstanceFile(g)));
  ASSERT_TRUE(back.girth.has_value());
  EXPECT_EQ(back.girth->girth, g.girth);
  EXPECT_EQ(std::get<ExplicitMatrices>(back.universe).matrices[0].entries.size(),
            static_cast<std::size_t>(g.network.num_edges()));

  Network net = MakeNetwork(4, {{0, 1, 2}, {1, 2, 3}, {2, 3, 1}});
  AsymmetricHose hose;
  hose.sources = {0, 1};
  hose.sinks = {3};
  hose.marginals = {Rational(1), MakeRational(1, 2), Rational(0), Rational(3, 2)};
  InstanceFile custom{"custom", net, hose, std::nullopt, std::nullopt};
  InstanceFile again = InstanceFromJson(InstanceToJson(custom));
  const auto& h = std::get<AsymmetricHose>(again.universe);
  EXPECT_EQ(h.marginals, hose.marginals);
  EXPECT_EQ(h.sinks, hose.sinks);
  EXPECT_EQ(again.network.cost(1), 3.0);
}

TEST(InstanceIoTest, RejectsBadFiles) {
  EXPECT_THROW(InstanceFromJson("{"), ArgumentError);
  EXPECT_THROW(InstanceFromJson(R"({"kind":"report","schema_version":1})"), ArgumentError);
  EXPECT_THROW(InstanceFromJson(R"({"kind":"instance","schema_version":9})"), ArgumentError);
  GapInstance g = BuildGapInstance(16, 0);
  std::string text = InstanceToJson(MakeInstanceFile(g));
  const std::string needle = "\"k\": " + std::to_string(g.k);
  ASSERT_NE(text.find(needle), std::string::npos);
  text.replace(text.find(needle), needle.size(), "\"k\": 2");
  EXPECT_THROW(InstanceFromJson(text), StructuralError);
}

TEST(SolutionIoTest, RoundTripsEverySolutionKind) {
  GapInstance g = BuildGapInstance(16, 0);
  InstanceFile file = MakeInstanceFile(g);
  SolutionFile s;
  s.instance_fingerprint = InstanceFingerprint(file);
  s.report.model = RoutingModel::kMPR;
  s.report.cost = 34.5;
  s.report.exact_cost = "69/2";
  s.report.certificate.numbers["duality_gap"] = 1e-12;
  s.report.certificate.labels["note"] = "x";
  s.report.seed = 9;
  s.reservation = HandcraftedFrReservation(g).reservation;
  s.bar = MakeBarSolution(g.network, g.k, std::vector<double>(g.network.num_edges(), 0.25),
                          SprTemplate(g.network, SolveSprHeuristic(g.network, g.k, SprStrategy::kShortestPathTree).solution));
  s.spr = SolveSprHeuristic(g.network, g.k, SprStrategy::kShortestPathTree).solution;
  s.tree = TreeTemplate{{0, 1, 2}};
  const std::string text = SolutionToJson(g.network, s);
  SolutionFile back = SolutionFromJson(g.network, text);
  EXPECT_EQ(SolutionToJson(g.network, back), text);
  EXPECT_EQ(back.report.exact_cost, s.report.exact_cost);
  EXPECT_EQ(back.report.seed, s.report.seed);
  EXPECT_EQ(back.reservation->capacity, s.reservation->capacity);
  EXPECT_EQ(back.bar->gamma, s.bar->gamma);
  EXPECT_EQ(back.bar->routing.commodities[3].forward, s.bar->routing.commodities[3].forward);
  EXPECT_EQ(back.spr->paths, s.spr->paths);
  EXPECT_EQ(back.tree->edges, s.tree->edges);
  // Reports travel on their own too.
  EXPECT_EQ(ReportFromJson(ReportToJson(s.report)).certificate.labels, s.report.certificate.labels);
}

TEST(SolutionIoTest, TreeAuditExport) {
  Network net = MakeNetwork(4, {{0, 1, 1}, {1, 2, 2}, {2, 3, 1}});
  FiniteMetric metric = MetricFromNetwork(net);
  const std::string text = TreeMetricToJson(metric, FrtEmbed(metric, 1));
  EXPECT_NE(text.find("\"representative\""), std::string::npos);
  EXPECT_EQ(text, TreeMetricToJson(metric, FrtEmbed(metric, 1)));
}

TEST(FileIoTest, WriteThenRead) {
  const auto dir = std::filesystem::temp_directory_path() / "robustnet_io_test";
  const std::string path = (dir / "sub" / "a.json").string();
  WriteTextFile(path, "hello\n");
  EXPECT_EQ(ReadTextFile(path), "hello\n");
  std::filesystem::remove_all(dir);
  EXPECT_THROW(ReadTextFile(path), ArgumentError);
}

}  // namespace
}  // namespace robustnet
