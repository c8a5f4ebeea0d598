#ifndef ROBUSTNET_IO_H_
#define ROBUSTNET_IO_H_

#include <optional>
#include <string>

#include "robustnet/embeddings.h"
#include "robustnet/instances.h"
#include "robustnet/model.h"
#include "robustnet/network.h"
#include "robustnet/report.h"
#include "robustnet/singlesink.h"
#include "robustnet/spr.h"
#include "robustnet/trees.h"

namespace robustnet {

// JSON files. Rationals are written as "p/q" strings (or integers as "p"),
// node references as node ids; per-edge arrays follow the network edge
// order. Output is canonical (sorted keys, fixed formatting), so equal
// inputs give equal bytes.
// Parsers throw ArgumentError on malformed JSON or missing fields and
// StructuralError when the content violates a model invariant.

inline constexpr int kFileSchemaVersion = 1;

struct InstanceFile {
  std::string family;  // "expander_gap", "girth" or "custom"
  Network network;
  DemandUniverse universe;
  std::optional<GapInstance> gap;
  std::optional<GirthInstance> girth;
};

InstanceFile MakeInstanceFile(const GapInstance& instance);
InstanceFile MakeInstanceFile(const GirthInstance& instance);

std::string InstanceToJson(const InstanceFile& instance);
InstanceFile InstanceFromJson(const std::string& text);

// FNV-1a over the canonical network and universe JSON, as 16 hex digits.
std::string InstanceFingerprint(const InstanceFile& instance);

std::string ReportToJson(const SolveReport& report);
SolveReport ReportFromJson(const std::string& text);

// A report plus whatever solution object produced it.
struct SolutionFile {
  std::string instance_fingerprint;
  SolveReport report;
  std::optional<CapacityReservation> reservation;
  std::optional<BarSolution> bar;
  std::optional<SprSolution> spr;
  std::optional<TreeTemplate> tree;
};

std::string SolutionToJson(const Network& network, const SolutionFile& solution);
// Node and edge references are resolved against `network`.
SolutionFile SolutionFromJson(const Network& network, const std::string& text);

// Per-level clusters of a sampled tree, for audit.
std::string TreeMetricToJson(const FiniteMetric& metric, const DominatingTreeMetric& tree);

std::string ReadTextFile(const std::string& path);
// Writes through a temporary file and a rename.
void WriteTextFile(const std::string& path, const std::string& text);

}  // namespace robustnet

#endif  // ROBUSTNET_IO_H_
