#include "robustnet/instances.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <set>

#include "robustnet/errors.h"
#include "seeding.h"

namespace robustnet {
namespace {

using internal::DeriveSeed;

Network BuildSimpleGraph(int n, std::vector<std::pair<int, int>> edges) {
  for (auto& [a, b] : edges) {
    if (a > b) std::swap(a, b);
  }
  std::sort(edges.begin(), edges.end());
  NetworkBuilder builder;
  for (int v = 0; v < n; ++v) builder.AddNode(NumericId(v));
  for (auto [a, b] : edges) builder.AddEdge(a, b, Rational(1));
  return builder.Build();
}

// Pairs stubs one at a time; nullopt when the partial pairing cannot be
// completed.
std::optional<std::vector<std::pair<int, int>>> PairStubs(int n, int d, std::mt19937_64& rng) {
  std::vector<int> stubs;
  stubs.reserve(static_cast<std::size_t>(n) * d);
  for (int v = 0; v < n; ++v) {
    for (int i = 0; i < d; ++i) stubs.push_back(v);
  }
  std::vector<std::set<int>> adjacent(n);
  std::vector<std::pair<int, int>> edges;
  auto suitable = [&](int x, int y) { return x != y && !adjacent[x].count(y); };
  auto take = [&](std::size_t i, std::size_t j) {
    int x = stubs[i];
    int y = stubs[j];
    adjacent[x].insert(y);
    adjacent[y].insert(x);
    edges.push_back({x, y});
    if (i < j) std::swap(i, j);
    stubs[i] = stubs.back();
    stubs.pop_back();
    stubs[j] = stubs.back();
    stubs.pop_back();
  };
  while (!stubs.empty()) {
    bool paired = false;
    for (int tries = 0; tries < 50 && !paired; ++tries) {
      std::uniform_int_distribution<std::size_t> pick(0, stubs.size() - 1);
      std::size_t i = pick(rng);
      std::size_t j = pick(rng);
      if (i != j && suitable(stubs[i], stubs[j])) {
        take(i, j);
        paired = true;
      }
    }
    if (paired) continue;
    std::vector<std::pair<std::size_t, std::size_t>> options;
    for (std::size_t i = 0; i < stubs.size(); ++i) {
      for (std::size_t j = i + 1; j < stubs.size(); ++j) {
        if (suitable(stubs[i], stubs[j])) options.push_back({i, j});
      }
    }
    if (options.empty()) return std::nullopt;
    auto [i, j] = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
    take(i, j);
  }
  return edges;
}

bool IsRegular(const Network& graph, int* degree) {
  if (graph.num_nodes() == 0) return false;
  int d = graph.degree(0);
  for (NodeIndex v = 1; v < graph.num_nodes(); ++v) {
    if (graph.degree(v) != d) return false;
  }
  *degree = d;
  return true;
}

}  // namespace

Network RandomRegularGraph(int n, int d, std::uint64_t seed) {
  if (d < 3) throw ArgumentError("regular graph degree must be at least 3");
  if (n <= d) throw ArgumentError("regular graph needs n > d");
  if ((static_cast<long>(n) * d) % 2 != 0) throw ArgumentError("n * d must be even");
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    auto edges = PairStubs(n, d, rng);
    if (edges) return BuildSimpleGraph(n, std::move(*edges));
  }
  throw GenerationError("random regular graph: 10^4 pairing attempts exhausted");
}

const char* ToString(ExpansionMethod method) {
  return method == ExpansionMethod::kBruteForce ? "brute_force" : "spectral";
}

SpectralEstimate SecondEigenvalue(const Network& graph, double tolerance, int max_iterations) {
  int d = 0;
  if (!IsRegular(graph, &d)) throw ArgumentError("spectral certificate needs a regular graph");
  const int n = graph.num_nodes();
  std::vector<double> x(n);
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (double& v : x) v = unit(rng);
  auto deflate_normalize = [&](std::vector<double>& v) {
    double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double norm = 0.0;
    for (double& value : v) {
      value -= mean;
      norm += value * value;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) return false;
    for (double& value : v) value /= norm;
    return true;
  };
  SpectralEstimate out;
  if (!deflate_normalize(x)) return out;
  std::vector<double> y(n);
  double previous = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    for (NodeIndex v = 0; v < n; ++v) {
      double sum = d * x[v];
      for (const Incidence& inc : graph.incident(v)) sum += x[inc.neighbor];
      y[v] = sum;
    }
    double theta = 0.0;
    for (int v = 0; v < n; ++v) theta += x[v] * y[v];
    out.iterations = it;
    out.lambda2 = theta - d;
    if (it > 1 && std::abs(theta - previous) <= tolerance * std::max(1.0, std::abs(theta))) {
      out.converged = true;
      break;
    }
    previous = theta;
    x.swap(y);
    if (!deflate_normalize(x)) {
      out.converged = true;
      break;
    }
  }
  return out;
}

double SearchLowExpansionSet(const Network& graph, std::uint64_t seed, std::vector<NodeIndex>* subset) {
  const int n = graph.num_nodes();
  const int limit = n / 2;
  double best = std::numeric_limits<double>::infinity();
  if (limit < 1) return best;
  std::mt19937_64 rng(seed);
  std::vector<char> in(n);
  std::vector<int> inside_neighbors(n);
  for (int start = 0; start < 4 * n; ++start) {
    // Seed with a BFS ball of random size around a random root.
    std::fill(in.begin(), in.end(), 0);
    int root = std::uniform_int_distribution<int>(0, n - 1)(rng);
    int target = std::uniform_int_distribution<int>(1, limit)(rng);
    std::deque<int> queue{root};
    std::vector<char> seen(n, 0);
    seen[root] = 1;
    int size = 0;
    while (!queue.empty() && size < target) {
      int v = queue.front();
      queue.pop_front();
      in[v] = 1;
      ++size;
      for (const Incidence& inc : graph.incident(v)) {
        if (!seen[inc.neighbor]) {
          seen[inc.neighbor] = 1;
          queue.push_back(inc.neighbor);
        }
      }
    }
    long cut = 0;
    for (int v = 0; v < n; ++v) {
      inside_neighbors[v] = 0;
      for (const Incidence& inc : graph.incident(v)) inside_neighbors[v] += in[inc.neighbor];
    }
    for (int v = 0; v < n; ++v) {
      if (in[v]) cut += graph.degree(v) - inside_neighbors[v];
    }
    // First-improvement single-node moves.
    bool improved = true;
    while (improved) {
      improved = false;
      for (int v = 0; v < n; ++v) {
        int new_size = size + (in[v] ? -1 : 1);
        if (new_size < 1 || new_size > limit) continue;
        long delta = in[v] ? 2L * inside_neighbors[v] - graph.degree(v) : graph.degree(v) - 2L * inside_neighbors[v];
        if (static_cast<double>(cut + delta) / new_size < static_cast<double>(cut) / size - 1e-12) {
          int sign = in[v] ? -1 : 1;
          in[v] = !in[v];
          for (const Incidence& inc : graph.incident(v)) inside_neighbors[inc.neighbor] += sign;
          cut += delta;
          size = new_size;
          improved = true;
        }
      }
    }
    double ratio = static_cast<double>(cut) / size;
    if (ratio < best) {
      best = ratio;
      if (subset) {
        subset->clear();
        for (int v = 0; v < n; ++v) {
          if (in[v]) subset->push_back(v);
        }
      }
    }
  }
  return best;
}

ExpansionCertificate CertifyEdgeExpansion(const Network& graph, double bound, ExpansionMethod method) {
  ExpansionCertificate cert;
  cert.method = method;
  cert.claimed_bound = bound;
  const int n = graph.num_nodes();
  if (method == ExpansionMethod::kBruteForce) {
    if (n > 24) throw RefusedError("brute-force expansion is limited to 24 nodes (got " + std::to_string(n) + ")");
    long best_cut = 1;
    long best_size = 0;
    std::uint64_t best_mask = 0;
    std::vector<char> in(n, 0);
    long cut = 0;
    int size = 0;
    std::uint64_t mask = 0;
    for (std::uint64_t step = 1; step < (std::uint64_t{1} << n); ++step) {
      int v = __builtin_ctzll(step);
      int inside = 0;
      for (const Incidence& inc : graph.incident(v)) inside += in[inc.neighbor];
      if (in[v]) {
        cut += 2L * inside - graph.degree(v);
        --size;
      } else {
        cut += graph.degree(v) - 2L * inside;
        ++size;
      }
      in[v] = !in[v];
      mask ^= std::uint64_t{1} << v;
      if (size < 1 || 2 * size > n) continue;
      if (best_size == 0 || cut * best_size < best_cut * size) {
        best_cut = cut;
        best_size = size;
        best_mask = mask;
      }
    }
    if (best_size == 0) {
      cert.certified = true;  // fewer than two nodes: no admissible S
      return cert;
    }
    Rational ratio(best_cut, best_size);
    ratio.canonicalize();
    cert.min_ratio = ratio;
    for (int v = 0; v < n; ++v) {
      if (best_mask >> v & 1) cert.worst_subset.push_back(v);
    }
    cert.certified = ratio >= RationalFromDouble(bound);
    return cert;
  }
  int d = 0;
  if (!IsRegular(graph, &d)) throw ArgumentError("spectral certificate needs a regular graph");
  SpectralEstimate estimate = SecondEigenvalue(graph);
  cert.lambda2 = estimate.lambda2;
  cert.cheeger_bound = (d - estimate.lambda2) / 2.0;
  cert.iterations = estimate.iterations;
  cert.converged = estimate.converged;
  cert.certified = estimate.converged && *cert.cheeger_bound >= bound;
  cert.search_upper_bound = SearchLowExpansionSet(graph, 0x0e8a, &cert.search_subset);
  return cert;
}

int GapParameterK(int n) {
  if (n < 2) throw ArgumentError("gap instance needs n >= 2");
  int log_n = 0;
  while ((1L << log_n) < n) ++log_n;
  return std::max(1, static_cast<int>(std::lround(static_cast<double>(n) / log_n)));
}

GapInstance BuildGapInstance(int n, std::uint64_t seed, const GapOptions& options) {
  const int d = options.d;
  if (options.max_attempts < 1) throw ArgumentError("gap instance needs at least one attempt");
  GapInstance out;
  out.n = n;
  out.d = d;
  out.k = GapParameterK(n);
  out.beta = MakeRational(out.k, n);
  out.port_cost = MakeRational(n, out.k);
  out.seed = seed;

  const bool brute = n <= 24;
  bool require = options.policy == ExpansionPolicy::kRequire;
  if (options.policy == ExpansionPolicy::kAuto) {
    // Alon-Boppana: lambda2 >= 2 sqrt(d-1) - o(1), so the Cheeger bound
    // (d - lambda2) / 2 cannot reach 1 for small d.
    require = brute || (d - 2.0 * std::sqrt(d - 1.0)) / 2.0 >= 1.0;
  }
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    std::uint64_t graph_seed = DeriveSeed(seed, attempt);
    Network expander = RandomRegularGraph(n, d, graph_seed);
    ExpansionCertificate cert =
        CertifyEdgeExpansion(expander, 1.0, brute ? ExpansionMethod::kBruteForce : ExpansionMethod::kSpectral);
    out.attempts = attempt + 1;
    if (require && !cert.certified) continue;
    NetworkBuilder builder;
    for (int v = 0; v < n; ++v) builder.AddNode(NumericId(v));
    builder.AddNode("r");
    for (const Edge& e : expander.edges()) builder.AddEdge(e.a, e.b, Rational(1));
    for (int v = 0; v < n; ++v) builder.AddEdge(v, n, out.port_cost);
    builder.SetSink("r");
    out.network = builder.Build();
    out.universe = UnitSingleSinkHose(out.network, out.k);
    out.graph_seed = graph_seed;
    out.certificate = std::move(cert);
    return out;
  }
  throw GenerationError("gap instance: expansion certification failed after " +
                        std::to_string(options.max_attempts) + " attempts");
}

bool IsPortEdge(const GapInstance& instance, EdgeIndex e) {
  const NodeIndex r = instance.network.RequireSink();
  return instance.network.edge(e).a == r || instance.network.edge(e).b == r;
}

int GirthTarget(int n) {
  int log_n = 0;
  while ((2L << log_n) <= n) ++log_n;  // floor(log2 n)
  return std::max(4, log_n / 2);
}

std::optional<int> Girth(const Network& graph) {
  const int n = graph.num_nodes();
  int best = std::numeric_limits<int>::max();
  std::vector<int> dist(n);
  std::vector<EdgeIndex> via(n);
  for (NodeIndex root = 0; root < n; ++root) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[root] = 0;
    via[root] = -1;
    std::deque<int> queue{root};
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      if (2 * dist[u] >= best) break;
      for (const Incidence& inc : graph.incident(u)) {
        if (inc.edge == via[u]) continue;
        if (dist[inc.neighbor] < 0) {
          dist[inc.neighbor] = dist[u] + 1;
          via[inc.neighbor] = inc.edge;
          queue.push_back(inc.neighbor);
        } else {
          best = std::min(best, dist[u] + dist[inc.neighbor] + 1);
        }
      }
    }
  }
  if (best == std::numeric_limits<int>::max()) return std::nullopt;
  return best;
}

namespace {

// Deletes closing edges of cycles shorter than g until none remain.
int BreakShortCycles(int n, int g, std::vector<std::set<int>>& adj, std::mt19937_64& rng) {
  int deleted = 0;
  std::vector<int> roots(n);
  std::iota(roots.begin(), roots.end(), 0);
  std::shuffle(roots.begin(), roots.end(), rng);
  std::vector<int> dist(n);
  std::vector<int> parent(n);
  for (int root : roots) {
    bool again = true;
    while (again) {
      again = false;
      std::fill(dist.begin(), dist.end(), -1);
      dist[root] = 0;
      parent[root] = -1;
      std::deque<int> queue{root};
      while (!queue.empty() && !again) {
        int u = queue.front();
        queue.pop_front();
        for (int w : adj[u]) {
          if (w == parent[u]) continue;
          if (dist[w] < 0) {
            dist[w] = dist[u] + 1;
            parent[w] = u;
            queue.push_back(w);
          } else if (dist[u] + dist[w] + 1 < g) {
            adj[u].erase(w);
            adj[w].erase(u);
            ++deleted;
            again = true;
            break;
          }
        }
      }
    }
  }
  return deleted;
}

}  // namespace

GirthInstance BuildGirthInstance(int n, std::uint64_t seed) {
  if (n < 32) throw ArgumentError("girth instance needs n >= 32");
  GirthInstance out;
  out.n = n;
  out.target_girth = GirthTarget(n);
  out.seed = seed;
  const long target_edges = 2L * n;
  for (int attempt = 0; attempt < 20; ++attempt) {
    std::mt19937_64 rng(DeriveSeed(seed, attempt));
    std::vector<std::set<int>> adj(n);
    // A random spanning tree first: deleting an edge that closes a cycle
    // never disconnects the graph, so the result stays connected.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (int i = 1; i < n; ++i) {
      int parent = order[std::uniform_int_distribution<int>(0, i - 1)(rng)];
      adj[order[i]].insert(parent);
      adj[parent].insert(order[i]);
    }
    std::uniform_int_distribution<int> node(0, n - 1);
    long edges = n - 1;
    while (edges < target_edges) {
      int a = node(rng);
      int b = node(rng);
      if (a == b || adj[a].count(b)) continue;
      adj[a].insert(b);
      adj[b].insert(a);
      ++edges;
    }
    int deleted = BreakShortCycles(n, out.target_girth, adj, rng);
    std::vector<std::pair<int, int>> edge_list;
    for (int a = 0; a < n; ++a) {
      for (int b : adj[a]) {
        if (a < b) edge_list.push_back({a, b});
      }
    }
    out.attempts = attempt + 1;
    if (4L * static_cast<long>(edge_list.size()) < 5L * n) continue;
    out.network = BuildSimpleGraph(n, edge_list);
    out.deleted_edges = deleted;
    out.girth = Girth(out.network);
    if (out.girth && *out.girth < out.target_girth) throw GenerationError("girth construction left a short cycle");
    std::vector<DemandEntry> entries;
    for (const Edge& e : out.network.edges()) entries.push_back({e.a, e.b, Rational(1)});
    out.universe.matrices.push_back(MakeDemandMatrix(std::move(entries)));
    return out;
  }
  throw GenerationError("girth instance: fewer than 1.25 n edges after 20 attempts");
}

}  // namespace robustnet
