#include "robustnet/experiment.h"

#include <gtest/gtest.h>

#include <sstream>

#include "robustnet/errors.h"
#include "robustnet/instances.h"

namespace robustnet {
namespace {

ExperimentConfig Small() {
  ExperimentConfig config;
  config.sizes = {16};
  config.seeds = {0};
  config.tree_samples = 2;
  return config;
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\n') {
      out.back() += c;
    }
  }
  return out;
}

TEST(ExperimentConfigTest, RoundTrips) {
  ExperimentConfig config;
  config.family = "girth";
  config.sizes = {32, 64};
  config.seeds = {5, 7};
  config.models = {RoutingModel::kSPR, RoutingModel::kTR};
  config.mpr_tolerance = 0.005;
  config.tree_samples = 0;
  config.rental_certificate = false;
  const std::string text = ExperimentConfigToJson(config);
  const ExperimentConfig back = ParseExperimentConfig(text);
  EXPECT_EQ(back.family, "girth");
  EXPECT_EQ(back.sizes, config.sizes);
  EXPECT_EQ(back.seeds, config.seeds);
  EXPECT_EQ(back.models, config.models);
  EXPECT_EQ(back.mpr_tolerance, 0.005);
  EXPECT_FALSE(back.rental_certificate);
  EXPECT_EQ(ExperimentConfigToJson(back), text);
}

TEST(ExperimentConfigTest, MissingKeysKeepDefaults) {
  const ExperimentConfig config = ParseExperimentConfig(R"({"schema_version": 1, "sizes": [16]})");
  EXPECT_EQ(config.sizes, std::vector<int>{16});
  EXPECT_EQ(config.family, "expander_gap");
  EXPECT_EQ(config.d, 4);
  EXPECT_EQ(config.tree_samples, 50);
}

TEST(ExperimentConfigTest, RejectsBadInput) {
  EXPECT_THROW(ParseExperimentConfig(R"({"schema_version": 1, "size": [16]})"), ArgumentError);
  EXPECT_THROW(ParseExperimentConfig(R"({"sizes": [16]})"), ArgumentError);
  EXPECT_THROW(ParseExperimentConfig(R"({"schema_version": 2})"), ArgumentError);
  EXPECT_THROW(ParseExperimentConfig("[1, 2]"), ArgumentError);
  EXPECT_THROW(ParseExperimentConfig("{"), ArgumentError);
  EXPECT_THROW(ParseExperimentConfig(R"({"schema_version": 1, "sizes": "16"})"), ArgumentError);
  EXPECT_THROW(ParseExperimentConfig(R"({"schema_version": 1, "models": ["XR"]})"), ArgumentError);

  ExperimentConfig config = Small();
  config.sizes = {4};
  EXPECT_THROW(ValidateExperimentConfig(config), ArgumentError);
  config = Small();
  config.seeds.clear();
  EXPECT_THROW(ValidateExperimentConfig(config), ArgumentError);
  config = Small();
  config.family = "ring";
  EXPECT_THROW(ValidateExperimentConfig(config), ArgumentError);
  config = Small();
  config.d = 3;
  config.sizes = {17};  // odd degree needs an even node count
  EXPECT_THROW(ValidateExperimentConfig(config), ArgumentError);
  config = Small();
  config.threads = 0;
  EXPECT_THROW(ValidateExperimentConfig(config), ArgumentError);
  EXPECT_NO_THROW(ValidateExperimentConfig(Small()));
}

TEST(ExperimentCsvTest, QuotesFieldsThatNeedIt) {
  ExperimentRow row;
  row.n = 16;
  row.seed = 3;
  row.beta = "1/3";
  row.k = 2;
  row.fr.cost = 48;
  row.fr.bound = BoundType::kExact;
  row.mpr.error = "solver said \"no\", twice";
  row.flagged = true;
  const std::string line = ExperimentCsvLine(row);
  const auto fields = SplitCsv(line);
  const auto header = SplitCsv(ExperimentCsvHeader());
  ASSERT_EQ(fields.size(), header.size());
  EXPECT_EQ(fields[0], "16");
  EXPECT_EQ(fields[4], "48");
  EXPECT_EQ(fields[5], "exact");
  EXPECT_EQ(fields[6], "");
  EXPECT_EQ(fields.back(), "mpr: solver said \"no\", twice");
  EXPECT_NE(line.find("\"\"no\"\""), std::string::npos);
}

TEST(ExperimentCsvTest, PlotDataAveragesPerSize) {
  std::vector<ExperimentRow> rows(3);
  const double mprs[] = {30, 36, 90};
  const int sizes[] = {16, 16, 32};
  for (int i = 0; i < 3; ++i) {
    rows[i].n = sizes[i];
    rows[i].fr.cost = 3.0 * sizes[i];
    rows[i].mpr.cost = mprs[i];
  }
  const std::string plot = ExperimentPlotData(rows);
  EXPECT_NE(plot.find("mpr_over_fr,4,0.6875\n"), std::string::npos) << plot;
  EXPECT_NE(plot.find("mpr_over_fr,5,0.9375\n"), std::string::npos) << plot;
  EXPECT_EQ(plot.find("tr_over_spr"), std::string::npos);
}

TEST(ExperimentSummaryTest, RequiresStrictIncreaseOverEverySize) {
  ExperimentConfig config = Small();
  config.sizes = {16, 32};
  config.models = {RoutingModel::kFR, RoutingModel::kMPR};
  config.rental_certificate = false;
  std::vector<ExperimentRow> rows(2);
  rows[0].n = 16;
  rows[1].n = 32;
  rows[0].fr.cost = 48;
  rows[1].fr.cost = 96;
  rows[0].mpr.cost = 35;
  rows[1].mpr.cost = 80;
  auto find = [](const std::vector<SummaryCheck>& checks, const std::string& name) {
    for (const SummaryCheck& c : checks) {
      if (c.name == name) return c;
    }
    ADD_FAILURE() << name;
    return SummaryCheck{};
  };
  auto checks = SummarizeExperiment(config, rows);
  EXPECT_TRUE(find(checks, "mpr_over_fr_increasing").pass);
  EXPECT_TRUE(find(checks, "fr_over_n_constant").pass);
  EXPECT_TRUE(find(checks, "no_flagged_rows").pass);

  rows[1].mpr.cost = 70;
  EXPECT_FALSE(find(SummarizeExperiment(config, rows), "mpr_over_fr_increasing").pass);
  rows[1].mpr.cost.reset();
  EXPECT_FALSE(find(SummarizeExperiment(config, rows), "mpr_over_fr_increasing").pass);
  rows[1].fr.cost = 97;
  EXPECT_FALSE(find(SummarizeExperiment(config, rows), "fr_over_n_constant").pass);
}

TEST(ExperimentRunTest, GapRowIsConsistent) {
  const ExperimentConfig config = Small();
  const ExperimentRow row = RunExperimentRow(config, 16, 0);
  EXPECT_FALSE(row.flagged);
  const GapInstance g = BuildGapInstance(16, 0);
  EXPECT_EQ(row.k, g.k);
  ASSERT_TRUE(row.fr.cost && row.mpr.cost && row.spr.cost && row.tr.cost);
  EXPECT_DOUBLE_EQ(*row.fr.cost, 16 * (2 + 4) / 2.0);
  // The FR cell holds the handcrafted reservation, not the FR optimum.
  EXPECT_EQ(row.fr.bound, BoundType::kUpper);
  EXPECT_EQ(row.mpr.bound, BoundType::kExact);
  EXPECT_LE(*row.mpr.cost, *row.spr.cost + 1e-9);
  EXPECT_LE(*row.spr.cost, *row.tr.cost + 1e-9);
  ASSERT_TRUE(row.rental_ok.has_value());
  EXPECT_TRUE(*row.rental_ok);
  EXPECT_LE(row.rental_bound, *row.mpr.cost + 1e-9);
}

TEST(ExperimentRunTest, GirthRowIsConsistent) {
  ExperimentConfig config = Small();
  config.family = "girth";
  config.sizes = {32};
  config.tree_samples = 0;
  const ExperimentRow row = RunExperimentRow(config, 32, 0);
  EXPECT_FALSE(row.flagged);
  const GirthInstance g = BuildGirthInstance(32, 0);
  EXPECT_EQ(row.edges, g.network.num_edges());
  EXPECT_EQ(row.girth, g.girth.value_or(0));
  ASSERT_TRUE(row.fr.cost && row.spr.cost && row.tr.cost);
  EXPECT_DOUBLE_EQ(*row.spr.cost, *row.fr.cost);
  EXPECT_EQ(row.tr.bound, BoundType::kLower);
}

TEST(ExperimentRunTest, ThreadCountDoesNotChangeOutput) {
  ExperimentConfig config = Small();
  config.seeds = {0, 1, 2};
  config.models = {RoutingModel::kFR, RoutingModel::kMPR};
  auto csv = [&](int threads) {
    config.threads = threads;
    std::ostringstream out;
    std::vector<std::pair<int, std::uint64_t>> order;
    const ExperimentResult result = RunGapExperiment(config, [&](const ExperimentRow& row) {
      order.emplace_back(row.n, row.seed);
      out << ExperimentCsvLine(row);
    });
    EXPECT_EQ(order.size(), 3u);
    EXPECT_TRUE(std::is_sorted(order.begin(), order.end()));
    EXPECT_EQ(result.rows.size(), 3u);
    return out.str();
  };
  const std::string one = csv(1);
  EXPECT_EQ(csv(3), one);
  EXPECT_EQ(csv(1), one);
}

}  // namespace
}  // namespace robustnet
