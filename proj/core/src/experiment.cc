#include "robustnet/experiment.h"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "json.hpp"
#include "robustnet/embeddings.h"
#include "robustnet/errors.h"
#include "robustnet/flow.h"
#include "robustnet/instances.h"
#include "robustnet/singlesink.h"
#include "robustnet/rental.h"

namespace robustnet {
namespace {

using Json = nlohmann::json;

std::string Number(double x) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.10g", x);
  return buffer;
}

std::string Optional(const std::optional<double>& x) { return x ? Number(*x) : ""; }

// RFC 4180 quoting.
std::string Field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

bool Runs(const ExperimentConfig& config, RoutingModel model) {
  return std::find(config.models.begin(), config.models.end(), model) != config.models.end();
}

template <typename F>
void Guard(ExperimentRow* row, ModelCell* cell, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    cell->cost.reset();
    cell->error = e.what();
    row->flagged = true;
  }
}

void RunGapRow(const ExperimentConfig& config, int n, std::uint64_t seed, ExperimentRow* row) {
  GapOptions gap_options;
  gap_options.d = config.d;
  const GapInstance g = BuildGapInstance(n, seed, gap_options);
  row->beta = FormatRational(g.beta);
  row->k = g.k;
  row->edges = g.network.num_edges();
  if (Runs(config, RoutingModel::kFR)) {
    Guard(row, &row->fr, [&] {
      row->fr.cost = HandcraftedFrReservation(g).cost.get_d();
      row->fr.bound = BoundType::kUpper;
      row->fr.solver = "handcrafted";
    });
  }
  if (Runs(config, RoutingModel::kMPR)) {
    Guard(row, &row->mpr, [&] {
      MprResult res;
      if (n <= config.mpr_lp_max_n) {
        MprLpOptions options;
        options.max_variables = std::max(options.max_variables, MprLpVariableCount(g.network));
        res = SolveMprBarLp(g.network, g.k, options);
      } else {
        MprDecompositionOptions options;
        options.tolerance = config.mpr_tolerance;
        res = SolveMprDecomposition(g.network, g.k, options);
        row->mpr_gap = res.report.certificate.numbers.at("relative_gap");
      }
      row->mpr.cost = res.report.cost;
      row->mpr.bound = res.report.bound;
      row->mpr.solver = res.report.solver;
      if (config.rental_certificate) {
        const RentalCertificate cert = VerifyRentalCertificate(g, res.solution);
        row->rental_ok = cert.ok();
        row->rental_rent = cert.rent_cost;
        row->rental_bound = cert.lower_bound;
      }
    });
  }
  if (Runs(config, RoutingModel::kTR)) {
    Guard(row, &row->tr, [&] {
      TrOptions options;
      options.mode = config.tr_mode;
      TrResult res = SolveTr(g.network, g.universe, options);
      row->tr.cost = res.report.cost;
      row->tr.bound = res.report.bound;
      row->tr.solver = res.report.solver;
    });
  }
  if (Runs(config, RoutingModel::kSPR)) {
    Guard(row, &row->spr, [&] {
      SprResult heuristic = SolveSprHeuristic(g.network, g.k, config.spr_strategy, seed);
      row->spr.cost = heuristic.report.cost;
      row->spr.bound = BoundType::kUpper;
      row->spr.solver = ToString(config.spr_strategy);
      if (config.tree_samples > 0) {
        TreeSamplingOptions options;
        options.samples = config.tree_samples;
        options.seed = seed;
        const double trees = SprUpperBoundViaTrees(g.network, g.universe, options).report.cost;
        row->spr_tree_cost = trees;
        if (trees < *row->spr.cost) {
          row->spr.cost = trees;
          row->spr.solver = "frt_tree_transfer";
        }
      }
      // A tree template routes every terminal on one path.
      if (row->tr.cost && *row->tr.cost < *row->spr.cost) {
        row->spr.cost = row->tr.cost;
        row->spr.solver = "tr_tree";
      }
    });
  }
}

void RunGirthRow(const ExperimentConfig& config, int n, std::uint64_t seed, ExperimentRow* row) {
  const GirthInstance g = BuildGirthInstance(n, seed);
  row->girth = g.girth.value_or(0);
  row->edges = g.network.num_edges();
  // A single matrix routes every pair on a shortest path, so FR is exact.
  Rational fr = 0;
  const ShortestPaths paths(g.network);
  for (const DemandMatrix& m : g.universe.matrices) {
    for (const DemandEntry& d : m.entries) fr += d.value * paths.Distance(d.i, d.j);
  }
  if (Runs(config, RoutingModel::kFR)) {
    row->fr.cost = fr.get_d();
    row->fr.bound = BoundType::kExact;
    row->fr.solver = "shortest_paths";
  }
  // The identity template is single-path; at cost FR it is optimal for MPR
  // and SPR alike.
  std::optional<Rational> identity;
  auto identity_cell = [&](ModelCell* cell) {
    Guard(row, cell, [&] {
      if (!identity) {
        identity = ReservationCost(
            g.network, TemplateCapacityPolytope(g.network, EdgeIdentityTemplate(g.network, g.universe), g.universe));
      }
      cell->cost = identity->get_d();
      cell->bound = *identity == fr ? BoundType::kExact : BoundType::kUpper;
      cell->solver = "edge_identity";
    });
  };
  if (Runs(config, RoutingModel::kMPR)) identity_cell(&row->mpr);
  if (Runs(config, RoutingModel::kSPR)) identity_cell(&row->spr);
  if (Runs(config, RoutingModel::kTR)) {
    Guard(row, &row->tr, [&] {
      row->tr.cost = TrGirthLowerBound(g.network, g.universe).get_d();
      row->tr.bound = BoundType::kLower;
      row->tr.solver = "girth_bound";
    });
  }
}

// Mean of a ratio per n over the rows where it is defined.
std::map<int, std::pair<double, int>> MeanBySize(const std::vector<ExperimentRow>& rows,
                                                 const std::function<std::optional<double>(const ExperimentRow&)>& f) {
  std::map<int, std::pair<double, int>> out;
  for (const ExperimentRow& row : rows) {
    if (auto x = f(row)) {
      out[row.n].first += *x;
      out[row.n].second += 1;
    }
  }
  for (auto& [n, acc] : out) acc.first /= acc.second;
  return out;
}

SummaryCheck StrictlyIncreasing(const std::string& name, const std::map<int, std::pair<double, int>>& means,
                                std::size_t sizes) {
  SummaryCheck check{name, means.size() == sizes && sizes >= 2, ""};
  double previous = -INFINITY;
  for (const auto& [n, acc] : means) {
    check.detail += (check.detail.empty() ? "" : " ") + std::to_string(n) + ":" + Number(acc.first);
    if (!(acc.first > previous)) check.pass = false;
    previous = acc.first;
  }
  if (means.size() != sizes) check.detail += " (missing sizes)";
  return check;
}

}  // namespace

const char* ToString(TrMode mode) {
  switch (mode) {
    case TrMode::kExactSmall: return "exact_small";
    case TrMode::kMstHeuristic: return "mst_heur";
    case TrMode::kSptHeuristic: return "spt_heur";
  }
  return "?";
}

TrMode ParseTrMode(const std::string& text) {
  if (text == "exact_small" || text == "exact") return TrMode::kExactSmall;
  if (text == "mst_heur" || text == "mst") return TrMode::kMstHeuristic;
  if (text == "spt_heur" || text == "spt") return TrMode::kSptHeuristic;
  throw ArgumentError("unknown TR mode '" + text + "'");
}

void ValidateExperimentConfig(const ExperimentConfig& config) {
  if (config.family != "expander_gap" && config.family != "girth") {
    throw ArgumentError("unknown family '" + config.family + "'");
  }
  if (config.sizes.empty()) throw ArgumentError("size list is empty");
  for (int n : config.sizes) {
    if (n < 8) throw ArgumentError("size " + std::to_string(n) + " is below 8");
    if (config.family == "expander_gap" && (n * config.d % 2 != 0 || n <= config.d)) {
      throw ArgumentError("no " + std::to_string(config.d) + "-regular graph on " + std::to_string(n) + " nodes");
    }
  }
  if (config.seeds.empty()) throw ArgumentError("seed list is empty");
  if (config.d < 3) throw ArgumentError("degree must be at least 3");
  if (config.models.empty()) throw ArgumentError("model list is empty");
  if (!(config.mpr_tolerance > 0)) throw ArgumentError("mpr_tolerance must be positive");
  if (config.tree_samples < 0) throw ArgumentError("tree_samples must be nonnegative");
  if (config.threads < 1) throw ArgumentError("threads must be positive");
}

ExperimentConfig ParseExperimentConfig(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ArgumentError(std::string("malformed config: ") + e.what());
  }
  if (!j.is_object()) throw ArgumentError("config must be a JSON object");
  static const std::set<std::string> kKeys = {"schema_version", "family",   "sizes",        "d",
                                              "seeds",          "models",   "mpr_lp_max_n", "mpr_tolerance",
                                              "spr_strategy",   "tree_samples", "tr_mode",  "rental_certificate",
                                              "threads"};
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.count(key)) throw ArgumentError("unknown config key '" + key + "'");
  }
  if (!j.contains("schema_version") || j["schema_version"] != kExperimentSchemaVersion) {
    throw ArgumentError("config needs \"schema_version\": " + std::to_string(kExperimentSchemaVersion));
  }
  ExperimentConfig config;
  try {
    if (j.contains("family")) config.family = j["family"].get<std::string>();
    if (j.contains("sizes")) config.sizes = j["sizes"].get<std::vector<int>>();
    if (j.contains("d")) config.d = j["d"].get<int>();
    if (j.contains("seeds")) config.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("models")) {
      config.models.clear();
      for (const Json& m : j["models"]) config.models.push_back(ParseRoutingModel(m.get<std::string>()));
    }
    if (j.contains("mpr_lp_max_n")) config.mpr_lp_max_n = j["mpr_lp_max_n"].get<int>();
    if (j.contains("mpr_tolerance")) config.mpr_tolerance = j["mpr_tolerance"].get<double>();
    if (j.contains("spr_strategy")) config.spr_strategy = ParseSprStrategy(j["spr_strategy"].get<std::string>());
    if (j.contains("tree_samples")) config.tree_samples = j["tree_samples"].get<int>();
    if (j.contains("tr_mode")) config.tr_mode = ParseTrMode(j["tr_mode"].get<std::string>());
    if (j.contains("rental_certificate")) config.rental_certificate = j["rental_certificate"].get<bool>();
    if (j.contains("threads")) config.threads = j["threads"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("bad config value: ") + e.what());
  }
  ValidateExperimentConfig(config);
  return config;
}

std::string ExperimentConfigToJson(const ExperimentConfig& config) {
  Json models = Json::array();
  for (RoutingModel m : config.models) models.push_back(ToString(m));
  const Json j = {{"schema_version", kExperimentSchemaVersion},
                  {"family", config.family},
                  {"sizes", config.sizes},
                  {"d", config.d},
                  {"seeds", config.seeds},
                  {"models", models},
                  {"mpr_lp_max_n", config.mpr_lp_max_n},
                  {"mpr_tolerance", config.mpr_tolerance},
                  {"spr_strategy", ToString(config.spr_strategy)},
                  {"tree_samples", config.tree_samples},
                  {"tr_mode", ToString(config.tr_mode)},
                  {"rental_certificate", config.rental_certificate},
                  {"threads", config.threads}};
  return j.dump(1) + "\n";
}

std::optional<double> ExperimentRow::Ratio(const ModelCell& top, const ModelCell& bottom) const {
  if (!top.cost || !bottom.cost || *bottom.cost <= 0) return std::nullopt;
  return *top.cost / *bottom.cost;
}

ExperimentRow RunExperimentRow(const ExperimentConfig& config, int n, std::uint64_t seed) {
  ExperimentRow row;
  row.n = n;
  row.seed = seed;
  ModelCell generation;
  Guard(&row, &generation, [&] {
    if (config.family == "girth") {
      RunGirthRow(config, n, seed, &row);
    } else {
      RunGapRow(config, n, seed, &row);
    }
  });
  if (!generation.error.empty()) {
    for (ModelCell* cell : {&row.fr, &row.mpr, &row.spr, &row.tr}) {
      if (!cell->cost && cell->error.empty()) cell->error = "generation: " + generation.error;
    }
  }
  return row;
}

bool ExperimentResult::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const SummaryCheck& c) { return c.pass; });
}

ExperimentResult RunGapExperiment(const ExperimentConfig& config,
                                  const std::function<void(const ExperimentRow&)>& on_row) {
  ValidateExperimentConfig(config);
  std::vector<int> sizes = config.sizes;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  std::vector<std::uint64_t> seeds = config.seeds;
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  std::vector<std::pair<int, std::uint64_t>> jobs;
  for (int n : sizes) {
    for (std::uint64_t s : seeds) jobs.push_back({n, s});
  }

  std::vector<std::optional<ExperimentRow>> done(jobs.size());
  std::mutex mutex;
  std::condition_variable ready;
  std::size_t next = 0;
  auto work = [&] {
    for (;;) {
      std::size_t job;
      {
        std::lock_guard lock(mutex);
        if (next >= jobs.size()) return;
        job = next++;
      }
      ExperimentRow row = RunExperimentRow(config, jobs[job].first, jobs[job].second);
      {
        std::lock_guard lock(mutex);
        done[job] = std::move(row);
      }
      ready.notify_all();
    }
  };
  const int threads = std::max(1, std::min<int>(config.threads, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(work);

  ExperimentResult result;
  for (std::size_t job = 0; job < jobs.size(); ++job) {
    std::unique_lock lock(mutex);
    ready.wait(lock, [&] { return done[job].has_value(); });
    ExperimentRow row = *done[job];
    lock.unlock();
    if (on_row) on_row(row);
    result.rows.push_back(std::move(row));
  }
  for (std::thread& t : pool) t.join();
  result.checks = SummarizeExperiment(config, result.rows);
  return result;
}

std::vector<SummaryCheck> SummarizeExperiment(const ExperimentConfig& config, const std::vector<ExperimentRow>& rows) {
  std::set<int> sizes(config.sizes.begin(), config.sizes.end());
  std::vector<SummaryCheck> checks;
  const bool flagged = std::any_of(rows.begin(), rows.end(), [](const ExperimentRow& r) { return r.flagged; });
  checks.push_back({"no_flagged_rows", !flagged, flagged ? "some solver failed; see the flags column" : ""});
  if (config.family == "expander_gap") {
    if (Runs(config, RoutingModel::kFR) && Runs(config, RoutingModel::kMPR)) {
      checks.push_back(StrictlyIncreasing(
          "mpr_over_fr_increasing", MeanBySize(rows, [](const ExperimentRow& r) { return r.Ratio(r.mpr, r.fr); }),
          sizes.size()));
    }
    if (Runs(config, RoutingModel::kFR)) {
      SummaryCheck fr{"fr_over_n_constant", true, "1+d/2=" + Number(1 + config.d / 2.0)};
      for (const ExperimentRow& r : rows) {
        if (!r.fr.cost || std::abs(*r.fr.cost / r.n - (1 + config.d / 2.0)) > 1e-12) fr.pass = false;
      }
      checks.push_back(fr);
    }
    if (config.rental_certificate && Runs(config, RoutingModel::kMPR)) {
      SummaryCheck t3{"rental_certificates", true, ""};
      for (const ExperimentRow& r : rows) {
        if (!r.rental_ok || !*r.rental_ok) t3.pass = false;
      }
      checks.push_back(t3);
    }
  } else if (Runs(config, RoutingModel::kTR) && Runs(config, RoutingModel::kSPR)) {
    checks.push_back(StrictlyIncreasing(
        "tr_over_spr_increasing", MeanBySize(rows, [](const ExperimentRow& r) { return r.Ratio(r.tr, r.spr); }),
        sizes.size()));
  }
  return checks;
}

std::string ExperimentCsvHeader() {
  return "n,seed,beta,k,fr_cost,fr_bound,mpr_cost,mpr_bound,spr_cost,spr_bound,tr_cost,tr_bound,"
         "mpr_over_fr,spr_over_fr,tr_over_spr,mpr_gap,spr_tree_cost,rental,flags\n";
}

std::string ExperimentCsvLine(const ExperimentRow& row) {
  std::vector<std::string> fields = {std::to_string(row.n), std::to_string(row.seed), row.beta,
                                     row.k > 0 ? std::to_string(row.k) : ""};
  std::string flags;
  for (const auto& [name, cell] : {std::pair{"fr", &row.fr}, {"mpr", &row.mpr}, {"spr", &row.spr}, {"tr", &row.tr}}) {
    fields.push_back(Optional(cell->cost));
    fields.push_back(cell->cost ? ToString(cell->bound) : "");
    if (!cell->error.empty()) flags += std::string(flags.empty() ? "" : "; ") + name + ": " + cell->error;
  }
  fields.push_back(Optional(row.Ratio(row.mpr, row.fr)));
  fields.push_back(Optional(row.Ratio(row.spr, row.fr)));
  fields.push_back(Optional(row.Ratio(row.tr, row.spr)));
  fields.push_back(Optional(row.mpr_gap));
  fields.push_back(Optional(row.spr_tree_cost));
  fields.push_back(row.rental_ok ? (*row.rental_ok ? "pass" : "fail") : "");
  fields.push_back(flags);
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) line += (i ? "," : "") + Field(fields[i]);
  return line + "\n";
}

std::string ExperimentPlotData(const std::vector<ExperimentRow>& rows) {
  std::string out = "series,x_log2_n,y_mean_ratio\n";
  const std::pair<const char*, std::function<std::optional<double>(const ExperimentRow&)>> series[] = {
      {"mpr_over_fr", [](const ExperimentRow& r) { return r.Ratio(r.mpr, r.fr); }},
      {"spr_over_fr", [](const ExperimentRow& r) { return r.Ratio(r.spr, r.fr); }},
      {"tr_over_spr", [](const ExperimentRow& r) { return r.Ratio(r.tr, r.spr); }},
  };
  for (const auto& [name, f] : series) {
    for (const auto& [n, acc] : MeanBySize(rows, f)) {
      out += std::string(name) + "," + Number(std::log2(n)) + "," + Number(acc.first) + "\n";
    }
  }
  return out;
}

}  // namespace robustnet
