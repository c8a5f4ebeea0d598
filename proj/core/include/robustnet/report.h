#ifndef ROBUSTNET_REPORT_H_
#define ROBUSTNET_REPORT_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace robustnet {

enum class RoutingModel { kFR, kMPR, kSPR, kTR };
enum class BoundType { kExact, kUpper, kLower };

std::string ToString(RoutingModel model);
std::string ToString(BoundType bound);
RoutingModel ParseRoutingModel(const std::string& text);
BoundType ParseBoundType(const std::string& text);

// Model-specific evidence attached to a report. "duality_gap" or an
// "exhaustive" label is what allows a report to claim bound=exact.
struct Certificate {
  std::map<std::string, double> numbers;
  std::map<std::string, std::string> labels;

  bool HasOptimalityEvidence(double tolerance) const;
};

struct SolveReport {
  RoutingModel model = RoutingModel::kFR;
  double cost = 0.0;
  // Exact cost text ("p/q") when the value was computed in rationals.
  std::optional<std::string> exact_cost;
  BoundType bound = BoundType::kUpper;
  Certificate certificate;
  std::string solver;
  int iterations = 0;
  double runtime_seconds = 0.0;
  std::optional<std::uint64_t> seed;
};

// Downgrades bound=exact to `fallback` if the certificate does not carry
// optimality evidence. Returns true if the report stayed exact.
bool EnforceExactInvariant(SolveReport* report, BoundType fallback, double tolerance = 1e-6);

}  // namespace robustnet

#endif  // ROBUSTNET_REPORT_H_
