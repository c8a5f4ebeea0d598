#include "robustnet/report.h"

#include <cmath>

#include "robustnet/errors.h"

namespace robustnet {

std::string ToString(RoutingModel model) {
  switch (model) {
    case RoutingModel::kFR: return "FR";
    case RoutingModel::kMPR: return "MPR";
    case RoutingModel::kSPR: return "SPR";
    case RoutingModel::kTR: return "TR";
  }
  return "?";
}

std::string ToString(BoundType bound) {
  switch (bound) {
    case BoundType::kExact: return "exact";
    case BoundType::kUpper: return "upper";
    case BoundType::kLower: return "lower";
  }
  return "?";
}

RoutingModel ParseRoutingModel(const std::string& text) {
  if (text == "FR" || text == "fr") return RoutingModel::kFR;
  if (text == "MPR" || text == "mpr") return RoutingModel::kMPR;
  if (text == "SPR" || text == "spr") return RoutingModel::kSPR;
  if (text == "TR" || text == "tr") return RoutingModel::kTR;
  throw ArgumentError("unknown routing model '" + text + "'");
}

BoundType ParseBoundType(const std::string& text) {
  if (text == "exact") return BoundType::kExact;
  if (text == "upper") return BoundType::kUpper;
  if (text == "lower") return BoundType::kLower;
  throw ArgumentError("unknown bound type '" + text + "'");
}

bool Certificate::HasOptimalityEvidence(double tolerance) const {
  auto label = labels.find("exhaustive");
  if (label != labels.end() && label->second == "true") return true;
  auto gap = numbers.find("duality_gap");
  if (gap == numbers.end()) return false;
  double scale = 1.0;
  if (auto obj = numbers.find("objective"); obj != numbers.end()) scale += std::abs(obj->second);
  return gap->second <= tolerance * scale;
}

bool EnforceExactInvariant(SolveReport* report, BoundType fallback, double tolerance) {
  if (report->bound != BoundType::kExact) return false;
  if (report->certificate.HasOptimalityEvidence(tolerance)) return true;
  report->bound = fallback;
  return false;
}

}  // namespace robustnet
