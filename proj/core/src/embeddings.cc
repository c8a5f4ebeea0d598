#include "robustnet/embeddings.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <thread>

#include "robustnet/errors.h"
#include "robustnet/flow.h"

namespace robustnet {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double Uniform53(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void CheckPointsAreNodes(const Network& network, const DominatingTreeMetric& tree) {
  if (static_cast<int>(tree.leaf.size()) != network.num_nodes()) {
    throw StructuralError("tree metric points do not match the network nodes");
  }
}

// Tree nodes from a leaf up to (and including) the root.
std::vector<int> Ancestors(const DominatingTreeMetric& tree, int point) {
  std::vector<int> chain;
  for (int v = tree.leaf[point]; v >= 0; v = tree.nodes[v].parent) chain.push_back(v);
  return chain;
}

TransferResult Transfer(const Network& network, const ShortestPaths& paths, const DominatingTreeMetric& tree,
                        const std::vector<Rational>& capacity,
                        const std::vector<std::pair<NodeIndex, NodeIndex>>& pairs) {
  TransferResult out;
  out.reservation = ZeroReservation(network);
  out.contracted_tree_cost = 0;
  out.tree_cost = 0;
  for (int c = 1; c < static_cast<int>(tree.nodes.size()); ++c) {
    const TreeMetricNode& node = tree.nodes[c];
    if (capacity[c] == 0) continue;
    out.tree_cost += capacity[c] * node.length;
    const NodeIndex a = node.representative;
    const NodeIndex b = tree.nodes[node.parent].representative;
    if (a == b) continue;
    out.contracted_tree_cost += capacity[c] * paths.Distance(a, b);
    for (EdgeIndex e : paths.PathEdges(a, b)) out.reservation.capacity[e] += capacity[c];
  }
  out.cost = ReservationCost(network, out.reservation);

  for (const auto& [s, t] : pairs) {
    // Tree path s -> lca -> t, as representatives.
    const std::vector<int> up = Ancestors(tree, s);
    const std::vector<int> down = Ancestors(tree, t);
    std::size_t i = up.size(), j = down.size();
    while (i > 0 && j > 0 && up[i - 1] == down[j - 1]) {
      --i;
      --j;
    }
    std::vector<NodeIndex> reps;
    for (std::size_t x = 0; x <= i && x < up.size(); ++x) reps.push_back(tree.nodes[up[x]].representative);
    for (std::size_t x = j; x-- > 0;) reps.push_back(tree.nodes[down[x]].representative);
    std::vector<NodeIndex> walk{s};
    for (NodeIndex r : reps) {
      if (r == walk.back()) continue;
      const std::vector<NodeIndex> leg = paths.PathNodes(walk.back(), r);
      walk.insert(walk.end(), leg.begin() + 1, leg.end());
    }
    Commodity c = EmptyCommodity(network, s, t);
    AddPathFlow(network, EraseLoops(walk), 1.0, &c);
    out.routing.commodities.push_back(std::move(c));
  }
  return out;
}

}  // namespace

void ValidateMetric(const FiniteMetric& metric) {
  const int n = metric.size();
  if (static_cast<int>(metric.distance.size()) != n) throw StructuralError("distance table has the wrong size");
  for (int x = 0; x < n; ++x) {
    if (static_cast<int>(metric.distance[x].size()) != n) throw StructuralError("distance table has the wrong size");
    if (metric.distance[x][x] != 0) throw StructuralError("nonzero self distance at " + metric.ids[x]);
    for (int y = 0; y < n; ++y) {
      if (metric.distance[x][y] < 0) throw StructuralError("negative distance");
      if (metric.distance[x][y] != metric.distance[y][x]) throw StructuralError("asymmetric distance");
    }
  }
  for (int z = 0; z < n; ++z) {
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y) {
        if (metric.distance[x][y] > metric.distance[x][z] + metric.distance[z][y]) {
          throw StructuralError("triangle inequality fails at " + metric.ids[x] + "," + metric.ids[y] + " via " +
                                metric.ids[z]);
        }
      }
    }
  }
}

FiniteMetric MetricFromNetwork(const Network& network) {
  if (!network.IsConnected()) throw StructuralError("metric needs a connected network");
  const ShortestPaths paths(network);
  FiniteMetric metric;
  metric.ids = network.node_ids();
  const int n = network.num_nodes();
  metric.distance.assign(n, std::vector<Rational>(n));
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) metric.distance[x][y] = paths.Distance(x, y);
  }
  return metric;
}

Rational DominatingTreeMetric::Distance(int x, int y) const {
  int a = leaf[x], b = leaf[y];
  Rational total = 0;
  // Leaves sit on level 0 and levels grow by one per step, so climb in step.
  while (a != b) {
    total += nodes[a].length + nodes[b].length;
    a = nodes[a].parent;
    b = nodes[b].parent;
  }
  return total;
}

DominatingTreeMetric FrtEmbed(const FiniteMetric& metric, std::uint64_t seed) {
  const int n = metric.size();
  if (n == 0) throw StructuralError("empty metric");
  std::mt19937_64 rng(seed);
  DominatingTreeMetric tree;
  tree.seed = seed;
  tree.permutation.resize(n);
  for (int i = 0; i < n; ++i) tree.permutation[i] = i;
  for (int i = n - 1; i > 0; --i) std::swap(tree.permutation[i], tree.permutation[rng() % (i + 1)]);
  tree.beta = std::exp2(Uniform53(rng));

  Rational min_positive = -1;
  Rational diameter = 0;
  for (int x = 0; x < n; ++x) {
    for (int y = x + 1; y < n; ++y) {
      const Rational& d = metric.distance[x][y];
      if (d > 0 && (min_positive < 0 || d < min_positive)) min_positive = d;
      diameter = std::max(diameter, d);
    }
  }
  tree.scale = min_positive > 0 ? Rational(1 / min_positive) : Rational(1);
  const Rational scaled_diameter = diameter * tree.scale;
  // Root level L with 2^(L-1) >= scaled diameter, L >= 1.
  int top = 1;
  while (Rational(1L << (top - 1)) < scaled_diameter) ++top;

  auto smallest_id = [&](const std::vector<int>& members) {
    return *std::min_element(members.begin(), members.end(),
                             [&](int x, int y) { return metric.ids[x] < metric.ids[y]; });
  };

  TreeMetricNode root;
  root.level = top;
  root.members.resize(n);
  for (int i = 0; i < n; ++i) root.members[i] = i;
  root.representative = smallest_id(root.members);
  root.center = tree.permutation[0];
  tree.nodes.push_back(root);

  const Rational beta = RationalFromDouble(tree.beta);
  std::vector<int> frontier{0};
  for (int level = top - 1; level >= 0; --level) {
    // Radius beta 2^(level-1), compared against scaled distances.
    const Rational radius = level >= 1 ? Rational(beta * Rational(1L << (level - 1))) : Rational(beta / 2);
    const Rational length = Rational(1L << (level + 1)) / tree.scale;
    std::vector<int> next;
    for (int parent : frontier) {
      std::map<int, std::vector<int>> by_rank;  // permutation rank of the center -> members
      for (int x : tree.nodes[parent].members) {
        for (int rank = 0; rank < n; ++rank) {
          if (metric.distance[x][tree.permutation[rank]] * tree.scale <= radius) {
            by_rank[rank].push_back(x);
            break;
          }
        }
      }
      for (auto& [rank, members] : by_rank) {
        TreeMetricNode child;
        child.parent = parent;
        child.length = length;
        child.level = level;
        child.center = tree.permutation[rank];
        child.representative = smallest_id(members);
        child.members = std::move(members);
        next.push_back(static_cast<int>(tree.nodes.size()));
        tree.nodes.push_back(std::move(child));
      }
    }
    frontier = std::move(next);
  }
  tree.leaf.assign(n, -1);
  for (int v : frontier) {
    // Level-0 radius is below the smallest positive distance, but points at
    // distance 0 share a leaf.
    for (int x : tree.nodes[v].members) tree.leaf[x] = v;
  }
  return tree;
}

std::vector<Rational> TreeOptimalCapacity(const Network& network, const DominatingTreeMetric& tree,
                                          const DemandUniverse& universe) {
  ValidateUniverse(network, universe);
  CheckPointsAreNodes(network, tree);
  std::vector<Rational> capacity(tree.nodes.size(), Rational(0));
  std::vector<bool> side(network.num_nodes());
  for (int c = 1; c < static_cast<int>(tree.nodes.size()); ++c) {
    std::fill(side.begin(), side.end(), false);
    for (int x : tree.nodes[c].members) side[x] = true;
    capacity[c] = MaxCrossingDemand(network, universe, side);
  }
  return capacity;
}

TransferResult TreeTemplateTransfer(const Network& network, const DominatingTreeMetric& tree,
                                    const std::vector<Rational>& capacity, const DemandUniverse& universe) {
  CheckPointsAreNodes(network, tree);
  if (capacity.size() != tree.nodes.size()) throw StructuralError("capacity does not cover every tree node");
  const ShortestPaths paths(network);
  return Transfer(network, paths, tree, capacity, DemandPairs(network, universe));
}

std::uint64_t SampleSeed(std::uint64_t base, int i) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(i) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

TreeSamplingResult SprUpperBoundViaTrees(const Network& network, const DemandUniverse& universe,
                                         const TreeSamplingOptions& options) {
  const auto start = Clock::now();
  if (options.samples < 1) throw ArgumentError("need at least one tree sample");
  ValidateUniverse(network, universe);
  const FiniteMetric metric = MetricFromNetwork(network);
  const ShortestPaths paths(network);
  const auto pairs = DemandPairs(network, universe);

  std::vector<TransferResult> results(options.samples);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < options.samples; i = next++) {
      const DominatingTreeMetric tree = FrtEmbed(metric, SampleSeed(options.seed, i));
      results[i] = Transfer(network, paths, tree, TreeOptimalCapacity(network, tree, universe), pairs);
    }
  };
  const int threads = std::max(1, std::min(options.threads, options.samples));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();

  TreeSamplingResult out;
  out.best_sample = 0;
  for (int i = 0; i < options.samples; ++i) {
    out.sample_costs.push_back(results[i].cost);
    if (results[i].cost < results[out.best_sample].cost) out.best_sample = i;
  }
  out.best_seed = SampleSeed(options.seed, out.best_sample);
  out.best = std::move(results[out.best_sample]);

  SolveReport& report = out.report;
  report.model = RoutingModel::kSPR;
  report.bound = BoundType::kUpper;
  report.solver = "frt_tree_transfer";
  report.cost = out.best.cost.get_d();
  report.exact_cost = FormatRational(out.best.cost);
  report.seed = options.seed;
  report.iterations = options.samples;
  report.certificate.numbers["samples"] = options.samples;
  report.certificate.numbers["best_sample"] = out.best_sample;
  report.certificate.numbers["tree_cost"] = out.best.tree_cost.get_d();
  report.certificate.numbers["contracted_tree_cost"] = out.best.contracted_tree_cost.get_d();
  if (std::optional<int> k = UnitHoseParameter(network, universe)) {
    const Rational routed = ReservationCost(network, TemplateCapacitySingleSink(network, out.best.routing, *k));
    report.certificate.numbers["template_cost"] = routed.get_d();
  }
  if (options.fr_lower_bound && *options.fr_lower_bound > 0) {
    report.certificate.numbers["fr_lower_bound"] = *options.fr_lower_bound;
    report.certificate.numbers["ratio_to_fr"] = report.cost / *options.fr_lower_bound;
  }
  report.runtime_seconds = Seconds(start);
  return out;
}

}  // namespace robustnet
