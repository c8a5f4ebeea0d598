// robustnet: generate instances, solve them, verify solutions and run the
// gap experiments.
//
// Exit codes: 0 success, 1 usage, 2 generation failure, 3 requested bound
// unattainable or refused by a size guard, 4 verification mismatch,
// 5 internal error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "robustnet/embeddings.h"
#include "robustnet/errors.h"
#include "robustnet/experiment.h"
#include "robustnet/flow.h"
#include "robustnet/instances.h"
#include "robustnet/io.h"
#include "robustnet/singlesink.h"
#include "robustnet/spr.h"
#include "robustnet/rental.h"
#include "robustnet/trees.h"

namespace robustnet {
namespace {

enum ExitCode { kOk = 0, kUsage = 1, kGeneration = 2, kUnattainable = 3, kMismatch = 4, kInternal = 5 };

struct Globals {
  std::optional<std::uint64_t> seed;
  double tol = 1e-3;
  int threads = 1;
  std::string output_dir = ".";
};

// Thrown for a requested bound the solver could not certify.
class Unattainable : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string Path(const Globals& g, const std::string& name) { return (std::filesystem::path(g.output_dir) / name).string(); }

std::string Stem(const std::string& path) { return std::filesystem::path(path).stem().string(); }

// -- generate -------------------------------------------------------------------

struct GenerateArgs {
  std::string family = "expander_gap";
  std::vector<int> sizes;
  int d = 4;
  std::vector<std::uint64_t> seeds;
  std::string config;
};

int Generate(const Globals& g, const GenerateArgs& args) {
  ExperimentConfig config;
  if (!args.config.empty()) config = ParseExperimentConfig(ReadTextFile(args.config));
  if (args.config.empty() || !args.sizes.empty()) {
    config.family = args.family;
    config.d = args.d;
    if (!args.sizes.empty()) config.sizes = args.sizes;
    config.seeds = !args.seeds.empty() ? args.seeds : std::vector<std::uint64_t>{g.seed.value_or(0)};
  }
  ValidateExperimentConfig(config);
  for (int n : config.sizes) {
    for (std::uint64_t seed : config.seeds) {
      InstanceFile file;
      std::string note;
      if (config.family == "girth") {
        GirthInstance inst = BuildGirthInstance(n, seed);
        file = MakeInstanceFile(inst);
        note = "girth " + (inst.girth ? std::to_string(*inst.girth) : std::string("inf")) + " (target " +
               std::to_string(inst.target_girth) + ")";
      } else {
        GapOptions options;
        options.d = config.d;
        GapInstance inst = BuildGapInstance(n, seed, options);
        file = MakeInstanceFile(inst);
        note = std::string("k ") + std::to_string(inst.k) + ", expansion " + ToString(inst.certificate.method) +
               (inst.certificate.certified ? " certified" : " recorded");
      }
      const std::string path = Path(g, config.family + "_n" + std::to_string(n) + "_s" + std::to_string(seed) + ".json");
      WriteTextFile(path, InstanceToJson(file));
      std::printf("%s: %d nodes, %d edges, %s\n", path.c_str(), file.network.num_nodes(), file.network.num_edges(),
                  note.c_str());
    }
  }
  return kOk;
}

// -- solve ----------------------------------------------------------------------

struct SolveArgs {
  std::string instance;
  std::string model;
  std::string strategy;
  std::string bound;
  int samples = 50;
};

std::optional<int> UnitK(const InstanceFile& file) { return UnitHoseParameter(file.network, file.universe); }

int RequireUnitK(const InstanceFile& file, const std::string& what) {
  auto k = UnitK(file);
  if (!k) throw RefusedError(what + " needs a unit single-sink hose instance");
  return *k;
}

// Sum of D_uv d(u, v) for a single explicit matrix.
std::optional<Rational> SingleMatrixFr(const InstanceFile& file) {
  const auto* m = std::get_if<ExplicitMatrices>(&file.universe);
  if (!m || m->matrices.size() != 1) return std::nullopt;
  const ShortestPaths paths(file.network);
  Rational total = 0;
  for (const DemandEntry& d : m->matrices[0].entries) total += d.value * paths.Distance(d.i, d.j);
  return total;
}

SolveReport ExactReport(RoutingModel model, const Rational& cost, const std::string& solver) {
  SolveReport r;
  r.model = model;
  r.cost = cost.get_d();
  r.exact_cost = FormatRational(cost);
  r.bound = BoundType::kExact;
  r.solver = solver;
  r.certificate.labels["exhaustive"] = "true";
  return r;
}

SolutionFile SolveModel(const Globals& g, const SolveArgs& args, const InstanceFile& file) {
  const RoutingModel model = ParseRoutingModel(args.model);
  const std::uint64_t seed = g.seed.value_or(0);
  const Network& net = file.network;
  SolutionFile out;
  std::string strategy = args.strategy;
  switch (model) {
    case RoutingModel::kFR: {
      if (auto fr = SingleMatrixFr(file); fr && (strategy.empty() || strategy == "shortest_paths")) {
        out.report = ExactReport(model, *fr, "shortest_paths");
        break;
      }
      const int k = RequireUnitK(file, "FR");
      if (strategy == "handcrafted") {
        FrReservation h = HandcraftedFrReservation(net, k);
        out.reservation = h.reservation;
        out.report.model = model;
        out.report.cost = h.cost.get_d();
        out.report.exact_cost = FormatRational(h.cost);
        out.report.bound = BoundType::kUpper;
        out.report.solver = "handcrafted";
      } else if (strategy.empty() || strategy == "lp") {
        FrSolveOptions options;
        options.seed = seed;
        FrSolution sol = SolveFrSingleSink(net, k, options);
        out.reservation = sol.reservation;
        out.report = sol.report;
      } else {
        throw ArgumentError("unknown FR strategy '" + strategy + "' (lp, handcrafted, shortest_paths)");
      }
      break;
    }
    case RoutingModel::kMPR: {
      if (strategy == "edge_identity" || (strategy.empty() && SingleMatrixFr(file))) {
        const auto* m = std::get_if<ExplicitMatrices>(&file.universe);
        if (!m) throw RefusedError("edge_identity needs explicit demand matrices");
        const Rational cost =
            ReservationCost(net, TemplateCapacityPolytope(net, EdgeIdentityTemplate(net, *m), file.universe));
        auto fr = SingleMatrixFr(file);
        out.report.model = model;
        out.report.cost = cost.get_d();
        out.report.exact_cost = FormatRational(cost);
        out.report.solver = "edge_identity";
        out.report.bound = BoundType::kUpper;
        if (fr && *fr == cost) {
          // Matches the FR lower bound.
          out.report.bound = BoundType::kExact;
          out.report.certificate.numbers["duality_gap"] = 0.0;
          out.report.certificate.numbers["fr_lower_bound"] = fr->get_d();
        }
        break;
      }
      const int k = RequireUnitK(file, "MPR");
      MprResult res;
      if (strategy == "decomposition") {
        MprDecompositionOptions options;
        options.tolerance = g.tol;
        options.threads = g.threads;
        res = SolveMprDecomposition(net, k, options);
      } else if (strategy.empty() || strategy == "lp") {
        res = SolveMprBarLp(net, k);
      } else {
        throw ArgumentError("unknown MPR strategy '" + strategy + "' (lp, decomposition, edge_identity)");
      }
      out.bar = res.solution;
      out.report = res.report;
      break;
    }
    case RoutingModel::kSPR: {
      if (strategy == "trees" || (strategy.empty() && !UnitK(file))) {
        TreeSamplingOptions options;
        options.samples = args.samples;
        options.seed = seed;
        options.threads = g.threads;
        TreeSamplingResult res = SprUpperBoundViaTrees(net, file.universe, options);
        out.reservation = res.best.reservation;
        out.report = res.report;
        break;
      }
      const int k = RequireUnitK(file, "SPR " + strategy);
      SprResult res = strategy == "exact" ? SolveSprExactSmall(net, k)
                                          : SolveSprHeuristic(net, k, ParseSprStrategy(strategy.empty() ? "local_search" : strategy), seed);
      out.spr = res.solution;
      out.report = res.report;
      break;
    }
    case RoutingModel::kTR: {
      if (strategy == "girth_bound") {
        out.report.model = model;
        const Rational bound = TrGirthLowerBound(net, file.universe);
        out.report.cost = bound.get_d();
        out.report.exact_cost = FormatRational(bound);
        out.report.bound = BoundType::kLower;
        out.report.solver = "girth_bound";
        break;
      }
      TrOptions options;
      if (!strategy.empty()) options.mode = ParseTrMode(strategy);
      TrResult res = SolveTr(net, file.universe, options);
      out.tree = res.tree;
      out.report = res.report;
      break;
    }
  }
  return out;
}

int Solve(const Globals& g, const SolveArgs& args) {
  const InstanceFile file = InstanceFromJson(ReadTextFile(args.instance));
  SolutionFile solution = SolveModel(g, args, file);
  solution.instance_fingerprint = InstanceFingerprint(file);
  const std::string stem = Stem(args.instance) + "." + args.model;
  const std::string report_path = Path(g, stem + ".report.json");
  WriteTextFile(report_path, ReportToJson(solution.report));
  WriteTextFile(Path(g, stem + ".solution.json"), SolutionToJson(file.network, solution));
  std::printf("%s %s cost %.10g (%s) via %s -> %s\n", ToString(solution.report.model).c_str(), Stem(args.instance).c_str(),
              solution.report.cost, ToString(solution.report.bound).c_str(), solution.report.solver.c_str(),
              report_path.c_str());
  std::fflush(stdout);
  if (!args.bound.empty() && ParseBoundType(args.bound) != solution.report.bound) {
    throw Unattainable("requested bound=" + args.bound + " but the solver produced bound=" +
                       ToString(solution.report.bound));
  }
  return kOk;
}

// -- verify ---------------------------------------------------------------------

struct Checks {
  int failed = 0;
  void Add(bool pass, const std::string& name, const std::string& detail) {
    std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    if (!pass) ++failed;
  }
  template <typename F>
  void Run(const std::string& name, F&& body) {
    try {
      body();
    } catch (const StructuralError& e) {
      Add(false, name, std::string("structural: ") + e.what());
    } catch (const RefusedError& e) {
      Add(false, name, std::string("refused: ") + e.what());
    }
  }
};

bool Close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

std::string Num(double x) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.10g", x);
  return buffer;
}

int Verify(const Globals& g, const std::string& instance_path, const std::string& solution_path) {
  const InstanceFile file = InstanceFromJson(ReadTextFile(instance_path));
  const Network& net = file.network;
  SolutionFile sol;
  try {
    sol = SolutionFromJson(net, ReadTextFile(solution_path));
  } catch (const StructuralError& e) {
    std::printf("FAIL instance: solution does not fit this instance (%s)\n", e.what());
    return kMismatch;
  }
  if (sol.instance_fingerprint != InstanceFingerprint(file)) {
    std::printf("FAIL instance: solution was made for instance %s, this is %s\n", sol.instance_fingerprint.c_str(),
                InstanceFingerprint(file).c_str());
    return kMismatch;
  }
  Checks checks;
  const SolveReport& report = sol.report;
  if (report.bound == BoundType::kExact) {
    checks.Add(report.certificate.HasOptimalityEvidence(1e-6), "exact_evidence",
               "bound=exact needs a duality gap or exhaustive label");
  }
  const std::optional<int> k = UnitK(file);
  if (sol.reservation) {
    checks.Run("reservation", [&] {
      const Rational cost = ReservationCost(net, *sol.reservation);
      checks.Add(Close(cost.get_d(), report.cost, 1e-9), "reservation_cost",
                 FormatRational(cost) + " against reported " + Num(report.cost));
      if (!k) return;
      FrCheckOptions options;
      const int free_nodes = net.num_nodes() - 1;
      if (free_nodes > 20) {
        options.mode = FrCheckMode::kCutCondition;
        FrFeasibility cut = CheckFrFeasibility(net, *sol.reservation, *k, options);
        if (cut.verdict == FrVerdict::kFeasibleCertified) {
          checks.Add(true, "fr_feasibility", "cut condition certifies every subset");
          return;
        }
        options.mode = FrCheckMode::kSampled;
        options.seed = g.seed.value_or(0);
        options.threads = g.threads;
      }
      FrFeasibility f = CheckFrFeasibility(net, *sol.reservation, *k, options);
      const bool pass = f.verdict != FrVerdict::kInfeasible;
      checks.Add(pass, "fr_feasibility",
                 std::string(ToString(f.verdict)) + " after " + std::to_string(f.checks) + " checks" +
                     (pass ? "" : ", cut capacity " + FormatRational(f.witness_capacity) + " < " +
                                      FormatRational(f.witness_requirement)));
    });
  }
  if (sol.bar) {
    checks.Run("bar", [&] {
      const BarSolution& bar = *sol.bar;
      const BarCostBreakdown cost = BarCost(net, bar.k, bar);
      checks.Add(Close(cost.total, report.cost, 1e-6), "bar_cost",
                 "recomputed " + Num(cost.total) + " against reported " + Num(report.cost));
      BarSolution optimal = bar;
      optimal.gamma = OptimalGammaFromTemplate(net, bar.routing, bar.k);
      const double bar_optimal = BarCost(net, bar.k, optimal).total;
      const double eq2 = ReservationCost(net, TemplateCapacitySingleSink(net, bar.routing, bar.k)).get_d();
      checks.Add(Close(bar_optimal, eq2, 1e-6), "template_equivalence",
                 "template capacity cost " + Num(eq2) + ", buy-and-rent with k-th largest gamma " + Num(bar_optimal));
      if (file.gap) {
        const RentalCertificate cert = VerifyRentalCertificate(*file.gap, bar);
        checks.Add(cert.ok(), "rental_certificate",
                   "rent " + Num(cert.rent_cost) + " >= bound " + Num(cert.lower_bound) + ", radius " +
                       std::to_string(cert.radius) + ", split error " + Num(cert.max_split_error));
      }
    });
  }
  if (sol.spr) {
    checks.Run("spr", [&] {
      const SprSolution again = MakeSprSolution(net, sol.spr->k, sol.spr->paths);
      checks.Add(again.cost == sol.spr->cost && Close(again.cost.get_d(), report.cost, 1e-9), "spr_cost",
                 "recomputed " + FormatRational(again.cost) + " against stored " + FormatRational(sol.spr->cost));
      const Rational templ = ReservationCost(net, TemplateCapacitySingleSink(net, SprTemplate(net, again), again.k));
      checks.Add(templ == again.cost, "spr_template", "template capacity cost " + FormatRational(templ));
    });
  }
  if (sol.tree) {
    checks.Run("tree", [&] {
      const TreeCost cost = TreeTemplateCost(net, file.universe, *sol.tree);
      checks.Add(Close(cost.cost.get_d(), report.cost, 1e-9), "tree_cost",
                 "recomputed " + FormatRational(cost.cost) + " against reported " + Num(report.cost));
    });
  }
  if (!sol.reservation && !sol.bar && !sol.spr && !sol.tree) std::printf("no solution object to verify\n");
  return checks.failed > 0 ? kMismatch : kOk;
}

// -- gap-experiment -----------------------------------------------------------------

struct ExperimentArgs {
  std::string config;
  std::string family;
  std::vector<int> sizes;
  std::vector<std::uint64_t> seeds;
  int d = 0;
  int tree_samples = -1;
  bool plot_data = false;
};

int Experiment(const Globals& g, const ExperimentArgs& args) {
  ExperimentConfig config;
  if (!args.config.empty()) config = ParseExperimentConfig(ReadTextFile(args.config));
  if (!args.family.empty()) config.family = args.family;
  if (!args.sizes.empty()) config.sizes = args.sizes;
  if (!args.seeds.empty()) config.seeds = args.seeds;
  if (args.d > 0) config.d = args.d;
  if (args.tree_samples >= 0) config.tree_samples = args.tree_samples;
  config.mpr_tolerance = g.tol;
  config.threads = g.threads;
  ValidateExperimentConfig(config);

  const std::string csv_path = Path(g, config.family + "_experiment.csv");
  std::filesystem::create_directories(g.output_dir);
  std::string csv = ExperimentCsvHeader();
  std::fputs(csv.c_str(), stdout);
  ExperimentResult result = RunGapExperiment(config, [&](const ExperimentRow& row) {
    const std::string line = ExperimentCsvLine(row);
    std::fputs(line.c_str(), stdout);
    std::fflush(stdout);
    csv += line;
  });
  WriteTextFile(csv_path, csv);
  if (args.plot_data) WriteTextFile(Path(g, config.family + "_plot.csv"), ExperimentPlotData(result.rows));
  for (const SummaryCheck& c : result.checks) {
    std::fprintf(stderr, "%s %s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
  }
  std::fprintf(stderr, "wrote %s\n", csv_path.c_str());
  return result.ok() ? kOk : kMismatch;
}

template <typename F>
int Guarded(F&& body) {
  try {
    return body();
  } catch (const GenerationError& e) {
    std::fprintf(stderr, "generation failed: %s\n", e.what());
    return kGeneration;
  } catch (const RefusedError& e) {
    std::fprintf(stderr, "refused: %s\n", e.what());
    return kUnattainable;
  } catch (const Unattainable& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kUnattainable;
  } catch (const InfeasibleError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kUnattainable;
  } catch (const ArgumentError& e) {
    std::fprintf(stderr, "bad input: %s\n", e.what());
    return kUsage;
  } catch (const StructuralError& e) {
    std::fprintf(stderr, "structural error: %s\n", e.what());
    return kMismatch;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kInternal;
  }
}

}  // namespace
}  // namespace robustnet

int main(int argc, char** argv) {
  using namespace robustnet;
  CLI::App app{"Robust network design workbench"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for generation, sampling and heuristics")->check(CLI::NonNegativeNumber);
  app.add_option("--tol", g.tol, "Relative gap for the MPR decomposition")->check(CLI::PositiveNumber);
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--output-dir", g.output_dir, "Directory for written files");

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "Write instance files");
  generate->add_option("--family", gen.family, "expander_gap or girth")
      ->check(CLI::IsMember({"expander_gap", "girth"}));
  generate->add_option("--n", gen.sizes, "Instance sizes")->delimiter(',');
  generate->add_option("--d", gen.d, "Expander degree");
  generate->add_option("--seeds", gen.seeds, "Seeds (default: --seed or 0)")->delimiter(',');
  generate->add_option("--config", gen.config, "Experiment config file")->check(CLI::ExistingFile);

  SolveArgs solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve one instance for one routing model");
  solve_cmd->add_option("--instance", solve.instance)->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--model", solve.model)->required()->check(CLI::IsMember({"FR", "MPR", "SPR", "TR", "fr", "mpr", "spr", "tr"}));
  solve_cmd->add_option("--strategy", solve.strategy,
                        "FR: lp|handcrafted|shortest_paths; MPR: lp|decomposition|edge_identity; "
                        "SPR: exact|spt|sample_augment|local_search|trees; TR: exact_small|mst_heur|spt_heur|girth_bound");
  solve_cmd->add_option("--bound", solve.bound, "Required bound type")->check(CLI::IsMember({"exact", "upper", "lower"}));
  solve_cmd->add_option("--samples", solve.samples, "Tree samples for SPR trees")->check(CLI::PositiveNumber);

  std::string verify_instance, verify_solution;
  CLI::App* verify = app.add_subcommand("verify", "Check a solution file against its instance");
  verify->add_option("--instance", verify_instance)->required()->check(CLI::ExistingFile);
  verify->add_option("--solution", verify_solution)->required()->check(CLI::ExistingFile);

  ExperimentArgs exp;
  CLI::App* experiment = app.add_subcommand("gap-experiment", "Run a gap experiment and write the CSV table");
  experiment->add_option("--config", exp.config, "Experiment config file")->check(CLI::ExistingFile);
  experiment->add_option("--family", exp.family)->check(CLI::IsMember({"expander_gap", "girth"}));
  experiment->add_option("--sizes", exp.sizes)->delimiter(',');
  experiment->add_option("--seeds", exp.seeds)->delimiter(',');
  experiment->add_option("--d", exp.d);
  experiment->add_option("--tree-samples", exp.tree_samples);
  experiment->add_flag("--plot-data", exp.plot_data, "Also write (log2 n, mean ratio) pairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (*generate) return Guarded([&] { return Generate(g, gen); });
  if (*solve_cmd) return Guarded([&] { return Solve(g, solve); });
  if (*verify) return Guarded([&] { return Verify(g, verify_instance, verify_solution); });
  return Guarded([&] { return Experiment(g, exp); });
}
