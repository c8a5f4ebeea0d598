#ifndef ROBUSTNET_INSTANCES_H_
#define ROBUSTNET_INSTANCES_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "robustnet/model.h"
#include "robustnet/network.h"
#include "robustnet/rational.h"

namespace robustnet {

// Simple d-regular graph on nodes "0".."n-1" by random stub pairing that
// rejects loops and repeated pairs as they arise, restarting when stuck.
// Throws ArgumentError unless n*d is even, d >= 3 and n > d, and
// GenerationError after 10^4 restarts.
Network RandomRegularGraph(int n, int d, std::uint64_t seed);

enum class ExpansionMethod { kBruteForce, kSpectral };

const char* ToString(ExpansionMethod method);

struct ExpansionCertificate {
  ExpansionMethod method = ExpansionMethod::kBruteForce;
  double claimed_bound = 1.0;
  bool certified = false;
  // Brute force: exact minimum of |delta(S)|/|S| over 1 <= |S| <= n/2.
  std::optional<Rational> min_ratio;
  std::vector<NodeIndex> worst_subset;
  // Spectral: second-largest adjacency eigenvalue and (d - lambda2) / 2.
  std::optional<double> lambda2;
  std::optional<double> cheeger_bound;
  int iterations = 0;
  bool converged = true;
  // Smallest ratio found by a local search over S; an upper bound on the
  // true expansion, recorded alongside spectral certificates.
  std::optional<double> search_upper_bound;
  std::vector<NodeIndex> search_subset;
};

// Brute force is limited to 24 nodes (RefusedError beyond). Spectral mode
// needs a regular graph (ArgumentError otherwise).
ExpansionCertificate CertifyEdgeExpansion(const Network& graph, double bound, ExpansionMethod method);

// Second-largest adjacency eigenvalue of a d-regular graph by power
// iteration on A + dI with the all-ones vector deflated.
struct SpectralEstimate {
  double lambda2 = 0.0;
  int iterations = 0;
  bool converged = false;
};
SpectralEstimate SecondEigenvalue(const Network& graph, double tolerance = 1e-9, int max_iterations = 100000);

// Local search for a set with small |delta(S)|/|S|, |S| <= n/2.
double SearchLowExpansionSet(const Network& graph, std::uint64_t seed, std::vector<NodeIndex>* subset);

enum class ExpansionPolicy {
  // Require a certificate when one is attainable (brute force for n <= 24,
  // or a degree where the Cheeger bound can reach the target); otherwise
  // record the spectral evidence without rejecting the graph.
  kAuto,
  kRequire,
  kRecord,
};

struct GapOptions {
  int d = 4;
  ExpansionPolicy policy = ExpansionPolicy::kAuto;
  int max_attempts = 50;
};

struct GapInstance {
  Network network;  // expander nodes "0".."n-1" plus the sink "r"
  SingleSinkHose universe;
  int n = 0;
  int d = 0;
  int k = 0;
  Rational beta;       // k / n
  Rational port_cost;  // n / k
  std::uint64_t seed = 0;        // requested seed
  std::uint64_t graph_seed = 0;  // seed of the accepted expander draw
  int attempts = 0;
  ExpansionCertificate certificate;
};

// k = max(1, round(n / ceil(log2 n))), beta = k/n.
int GapParameterK(int n);

GapInstance BuildGapInstance(int n, std::uint64_t seed, const GapOptions& options = {});

// Ports are the edges joining the sink; everything else is an expander edge.
bool IsPortEdge(const GapInstance& instance, EdgeIndex e);

struct GirthInstance {
  Network network;
  ExplicitMatrices universe;  // one matrix with D_uv = 1 on every edge
  int n = 0;
  int target_girth = 0;
  std::optional<int> girth;
  std::uint64_t seed = 0;
  int attempts = 0;
  int deleted_edges = 0;
};

// target g = max(4, floor(log2(n) / 2)).
int GirthTarget(int n);

// Random connected graph with 2n edges (a random spanning tree plus uniform
// extra edges), short cycles broken by deleting their closing edge.
// Requires n >= 32 and retries up to 20 times until m >= 1.25 n.
GirthInstance BuildGirthInstance(int n, std::uint64_t seed);

// Length of the shortest cycle, nullopt for forests.
std::optional<int> Girth(const Network& graph);

}  // namespace robustnet

#endif  // ROBUSTNET_INSTANCES_H_
