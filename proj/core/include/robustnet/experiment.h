#ifndef ROBUSTNET_EXPERIMENT_H_
#define ROBUSTNET_EXPERIMENT_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "robustnet/report.h"
#include "robustnet/spr.h"
#include "robustnet/trees.h"

namespace robustnet {

inline constexpr int kExperimentSchemaVersion = 1;

// Gap experiments over a family of generated instances. JSON form:
//   {"schema_version": 1, "family": "expander_gap", "sizes": [16, 32],
//    "d": 4, "seeds": [0, 1, 2], "models": ["FR", "MPR", "SPR", "TR"],
//    "mpr_lp_max_n": 64, "mpr_tolerance": 0.01,
//    "spr_strategy": "local_search", "tree_samples": 50,
//    "tr_mode": "mst_heur", "rental_certificate": true}
// Missing keys keep their defaults; unknown keys are rejected.
struct ExperimentConfig {
  std::string family = "expander_gap";  // or "girth"
  std::vector<int> sizes = {16, 32, 64, 128};
  int d = 4;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  std::vector<RoutingModel> models = {RoutingModel::kFR, RoutingModel::kMPR, RoutingModel::kSPR, RoutingModel::kTR};
  // MPR uses the monolithic LP up to this size and the decomposition above.
  int mpr_lp_max_n = 64;
  double mpr_tolerance = 1e-2;
  SprStrategy spr_strategy = SprStrategy::kLocalSearch;
  int tree_samples = 50;  // 0 disables the tree pipeline
  TrMode tr_mode = TrMode::kMstHeuristic;
  bool rental_certificate = true;
  int threads = 1;
};

// Throws ArgumentError on sizes < 8, an empty seed list, an unknown family
// or strategy, or a gap size that is not a valid regular graph size.
void ValidateExperimentConfig(const ExperimentConfig& config);
ExperimentConfig ParseExperimentConfig(const std::string& json);
std::string ExperimentConfigToJson(const ExperimentConfig& config);

TrMode ParseTrMode(const std::string& text);
const char* ToString(TrMode mode);

struct ModelCell {
  std::optional<double> cost;
  BoundType bound = BoundType::kUpper;
  std::string solver;
  std::string error;  // nonempty when the solver failed
};

struct ExperimentRow {
  int n = 0;
  std::uint64_t seed = 0;
  std::string beta;  // gap family only
  int k = 0;         // gap family only
  ModelCell fr, mpr, spr, tr;
  std::optional<double> mpr_gap;  // decomposition relative gap
  std::optional<double> spr_tree_cost;  // best tree-pipeline cost
  // Rental certificate on the MPR solution (gap family).
  std::optional<bool> rental_ok;
  double rental_rent = 0.0;
  double rental_bound = 0.0;
  int girth = 0;  // girth family
  int edges = 0;
  bool flagged = false;

  std::optional<double> Ratio(const ModelCell& top, const ModelCell& bottom) const;
};

// One (n, seed) row. Solver failures are caught and flag the row.
ExperimentRow RunExperimentRow(const ExperimentConfig& config, int n, std::uint64_t seed);

struct SummaryCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;  // sorted by (n, seed)
  std::vector<SummaryCheck> checks;

  bool ok() const;
};

// Rows run on a pool of config.threads workers; `on_row` sees them in
// (n, seed) order regardless of completion order.
ExperimentResult RunGapExperiment(const ExperimentConfig& config,
                                  const std::function<void(const ExperimentRow&)>& on_row = {});

// Expander family: mean mpr/fr strictly increasing in n and fr/n = 1 + d/2.
// Girth family: mean tr/spr strictly increasing in n.
std::vector<SummaryCheck> SummarizeExperiment(const ExperimentConfig& config, const std::vector<ExperimentRow>& rows);

std::string ExperimentCsvHeader();
std::string ExperimentCsvLine(const ExperimentRow& row);
// (x = log2 n, y = mean ratio) per ratio series, as CSV.
std::string ExperimentPlotData(const std::vector<ExperimentRow>& rows);

}  // namespace robustnet

#endif  // ROBUSTNET_EXPERIMENT_H_
