#include "robustnet/io.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "robustnet/errors.h"

namespace robustnet {
namespace {

using Json = nlohmann::json;

Json Q(const Rational& value) { return FormatRational(value); }

Rational ReadQ(const Json& value) {
  if (value.is_string()) return ParseRational(value.get<std::string>());
  if (value.is_number_integer()) return Rational(value.get<long>());
  throw ArgumentError("expected a rational string, got " + value.dump());
}

const Json& Field(const Json& object, const char* key) {
  if (!object.is_object()) throw ArgumentError(std::string("expected an object holding '") + key + "'");
  auto it = object.find(key);
  if (it == object.end()) throw ArgumentError(std::string("missing field '") + key + "'");
  return *it;
}

template <typename T>
T Get(const Json& object, const char* key) {
  try {
    return Field(object, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("field '") + key + "': " + e.what());
  }
}

Json Parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ArgumentError(std::string("malformed JSON: ") + e.what());
  }
}

void CheckSchema(const Json& j, const char* kind) {
  if (Get<std::string>(j, "kind") != kind) {
    throw ArgumentError(std::string("expected a '") + kind + "' file, got '" + Get<std::string>(j, "kind") + "'");
  }
  const int version = Get<int>(j, "schema_version");
  if (version != kFileSchemaVersion) throw ArgumentError("unsupported schema_version " + std::to_string(version));
}

std::string Dump(const Json& j) { return j.dump(1) + "\n"; }

NodeIndex Node(const Network& network, const Json& id) {
  const std::string text = id.get<std::string>();
  auto v = network.FindIndex(text);
  if (!v) throw StructuralError("unknown node '" + text + "'");
  return *v;
}

// -- network and universes --------------------------------------------------

Json NetworkJson(const Network& network) {
  Json edges = Json::array();
  for (const Edge& e : network.edges()) {
    edges.push_back({network.id(e.a), network.id(e.b), Q(e.cost)});
  }
  Json terminals = Json::array();
  for (NodeIndex v : network.terminals()) terminals.push_back(network.id(v));
  Json j = {{"nodes", network.node_ids()}, {"edges", edges}, {"terminals", terminals}};
  j["sink"] = network.sink() ? Json(network.id(*network.sink())) : Json(nullptr);
  return j;
}

Network NetworkFrom(const Json& j) {
  NetworkBuilder builder;
  for (const Json& id : Field(j, "nodes")) builder.AddNode(id.get<std::string>());
  for (const Json& e : Field(j, "edges")) {
    if (!e.is_array() || e.size() != 3) throw ArgumentError("edge entries are [a, b, cost]");
    builder.AddEdge(e[0].get<std::string>(), e[1].get<std::string>(), ReadQ(e[2]));
  }
  if (!Field(j, "sink").is_null()) builder.SetSink(Get<std::string>(j, "sink"));
  builder.SetTerminals(Get<std::vector<std::string>>(j, "terminals"));
  return builder.Build();
}

Json Marginals(const Network& network, const std::vector<Rational>& marginals) {
  Json out = Json::object();
  for (NodeIndex v = 0; v < static_cast<NodeIndex>(marginals.size()); ++v) {
    if (marginals[v] != 0) out[network.id(v)] = Q(marginals[v]);
  }
  return out;
}

std::vector<Rational> MarginalsFrom(const Network& network, const Json& j) {
  std::vector<Rational> out(network.num_nodes(), Rational(0));
  for (const auto& [id, value] : j.items()) out[Node(network, id)] = ReadQ(value);
  return out;
}

Json UniverseJson(const Network& network, const DemandUniverse& universe) {
  if (const auto* hose = std::get_if<SingleSinkHose>(&universe)) {
    return {{"type", "single_sink_hose"},
            {"sink", network.id(hose->sink)},
            {"marginals", Marginals(network, hose->marginals)},
            {"sink_marginal", Q(hose->sink_marginal)}};
  }
  if (const auto* hose = std::get_if<AsymmetricHose>(&universe)) {
    Json sources = Json::array(), sinks = Json::array();
    for (NodeIndex v : hose->sources) sources.push_back(network.id(v));
    for (NodeIndex v : hose->sinks) sinks.push_back(network.id(v));
    return {{"type", "asymmetric_hose"},
            {"sources", sources},
            {"sinks", sinks},
            {"marginals", Marginals(network, hose->marginals)}};
  }
  const auto& matrices = std::get<ExplicitMatrices>(universe);
  Json list = Json::array();
  for (const DemandMatrix& m : matrices.matrices) {
    Json entries = Json::array();
    for (const DemandEntry& d : m.entries) entries.push_back({network.id(d.i), network.id(d.j), Q(d.value)});
    list.push_back(entries);
  }
  return {{"type", "explicit"}, {"matrices", list}};
}

DemandUniverse UniverseFrom(const Network& network, const Json& j) {
  const std::string type = Get<std::string>(j, "type");
  DemandUniverse universe;
  if (type == "single_sink_hose") {
    SingleSinkHose hose;
    hose.sink = Node(network, Field(j, "sink"));
    hose.marginals = MarginalsFrom(network, Field(j, "marginals"));
    hose.sink_marginal = ReadQ(Field(j, "sink_marginal"));
    universe = hose;
  } else if (type == "asymmetric_hose") {
    AsymmetricHose hose;
    for (const Json& id : Field(j, "sources")) hose.sources.push_back(Node(network, id));
    for (const Json& id : Field(j, "sinks")) hose.sinks.push_back(Node(network, id));
    hose.marginals = MarginalsFrom(network, Field(j, "marginals"));
    universe = hose;
  } else if (type == "explicit") {
    ExplicitMatrices matrices;
    for (const Json& m : Field(j, "matrices")) {
      std::vector<DemandEntry> entries;
      for (const Json& d : m) {
        if (!d.is_array() || d.size() != 3) throw ArgumentError("demand entries are [i, j, value]");
        entries.push_back({Node(network, d[0]), Node(network, d[1]), ReadQ(d[2])});
      }
      matrices.matrices.push_back(MakeDemandMatrix(std::move(entries)));
    }
    universe = matrices;
  } else {
    throw ArgumentError("unknown universe type '" + type + "'");
  }
  ValidateUniverse(network, universe);
  return universe;
}

// -- instance metadata --------------------------------------------------------

template <typename T>
Json Optional(const std::optional<T>& value) {
  return value ? Json(*value) : Json(nullptr);
}

template <typename T>
std::optional<T> OptionalFrom(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

Json Ids(const Network& network, const std::vector<NodeIndex>& nodes) {
  Json out = Json::array();
  for (NodeIndex v : nodes) out.push_back(network.id(v));
  return out;
}

std::vector<NodeIndex> IdsFrom(const Network& network, const Json& j) {
  std::vector<NodeIndex> out;
  for (const Json& id : j) out.push_back(Node(network, id));
  return out;
}

Json CertificateJson(const Network& network, const ExpansionCertificate& c) {
  Json j = {{"method", ToString(c.method)},
            {"claimed_bound", c.claimed_bound},
            {"certified", c.certified},
            {"worst_subset", Ids(network, c.worst_subset)},
            {"lambda2", Optional(c.lambda2)},
            {"cheeger_bound", Optional(c.cheeger_bound)},
            {"iterations", c.iterations},
            {"converged", c.converged},
            {"search_upper_bound", Optional(c.search_upper_bound)},
            {"search_subset", Ids(network, c.search_subset)}};
  j["min_ratio"] = c.min_ratio ? Q(*c.min_ratio) : Json(nullptr);
  return j;
}

ExpansionCertificate CertificateFrom(const Network& network, const Json& j) {
  ExpansionCertificate c;
  const std::string method = Get<std::string>(j, "method");
  if (method == ToString(ExpansionMethod::kBruteForce)) {
    c.method = ExpansionMethod::kBruteForce;
  } else if (method == ToString(ExpansionMethod::kSpectral)) {
    c.method = ExpansionMethod::kSpectral;
  } else {
    throw ArgumentError("unknown expansion method '" + method + "'");
  }
  c.claimed_bound = Get<double>(j, "claimed_bound");
  c.certified = Get<bool>(j, "certified");
  if (!Field(j, "min_ratio").is_null()) c.min_ratio = ReadQ(Field(j, "min_ratio"));
  c.worst_subset = IdsFrom(network, Field(j, "worst_subset"));
  c.lambda2 = OptionalFrom<double>(j, "lambda2");
  c.cheeger_bound = OptionalFrom<double>(j, "cheeger_bound");
  c.iterations = Get<int>(j, "iterations");
  c.converged = Get<bool>(j, "converged");
  c.search_upper_bound = OptionalFrom<double>(j, "search_upper_bound");
  c.search_subset = IdsFrom(network, Field(j, "search_subset"));
  return c;
}

Json GapJson(const GapInstance& g) {
  return {{"n", g.n},
          {"d", g.d},
          {"k", g.k},
          {"beta", Q(g.beta)},
          {"port_cost", Q(g.port_cost)},
          {"seed", g.seed},
          {"graph_seed", g.graph_seed},
          {"attempts", g.attempts},
          {"certificate", CertificateJson(g.network, g.certificate)}};
}

GapInstance GapFrom(const Network& network, const DemandUniverse& universe, const Json& j) {
  GapInstance g;
  g.network = network;
  if (!std::holds_alternative<SingleSinkHose>(universe)) throw StructuralError("gap instance needs a single-sink hose");
  g.universe = std::get<SingleSinkHose>(universe);
  g.n = Get<int>(j, "n");
  g.d = Get<int>(j, "d");
  g.k = Get<int>(j, "k");
  g.beta = ReadQ(Field(j, "beta"));
  g.port_cost = ReadQ(Field(j, "port_cost"));
  g.seed = Get<std::uint64_t>(j, "seed");
  g.graph_seed = Get<std::uint64_t>(j, "graph_seed");
  g.attempts = Get<int>(j, "attempts");
  g.certificate = CertificateFrom(network, Field(j, "certificate"));
  if (network.num_terminals() != g.n || UnitHoseParameter(network, universe) != std::optional<int>(g.k)) {
    throw StructuralError("gap parameters do not match the network and universe");
  }
  return g;
}

Json GirthJson(const GirthInstance& g) {
  return {{"n", g.n},
          {"target_girth", g.target_girth},
          {"girth", Optional(g.girth)},
          {"seed", g.seed},
          {"attempts", g.attempts},
          {"deleted_edges", g.deleted_edges}};
}

GirthInstance GirthFrom(const Network& network, const DemandUniverse& universe, const Json& j) {
  GirthInstance g;
  g.network = network;
  if (!std::holds_alternative<ExplicitMatrices>(universe)) throw StructuralError("girth instance needs explicit demand");
  g.universe = std::get<ExplicitMatrices>(universe);
  g.n = Get<int>(j, "n");
  g.target_girth = Get<int>(j, "target_girth");
  g.girth = OptionalFrom<int>(j, "girth");
  g.seed = Get<std::uint64_t>(j, "seed");
  g.attempts = Get<int>(j, "attempts");
  g.deleted_edges = Get<int>(j, "deleted_edges");
  return g;
}

// -- solutions ----------------------------------------------------------------

Json ReportJson(const SolveReport& r) {
  Json j = {{"model", ToString(r.model)},
            {"cost", r.cost},
            {"bound", ToString(r.bound)},
            {"certificate", {{"numbers", r.certificate.numbers}, {"labels", r.certificate.labels}}},
            {"solver", r.solver},
            {"iterations", r.iterations},
            {"runtime_seconds", r.runtime_seconds}};
  j["exact_cost"] = Optional(r.exact_cost);
  j["seed"] = Optional(r.seed);
  return j;
}

SolveReport ReportFrom(const Json& j) {
  SolveReport r;
  r.model = ParseRoutingModel(Get<std::string>(j, "model"));
  r.cost = Get<double>(j, "cost");
  r.bound = ParseBoundType(Get<std::string>(j, "bound"));
  const Json& cert = Field(j, "certificate");
  r.certificate.numbers = Get<std::map<std::string, double>>(cert, "numbers");
  r.certificate.labels = Get<std::map<std::string, std::string>>(cert, "labels");
  r.solver = Get<std::string>(j, "solver");
  r.iterations = Get<int>(j, "iterations");
  r.runtime_seconds = Get<double>(j, "runtime_seconds");
  r.exact_cost = OptionalFrom<std::string>(j, "exact_cost");
  r.seed = OptionalFrom<std::uint64_t>(j, "seed");
  return r;
}

Json RoutingJson(const Network& network, const RoutingTemplate& routing) {
  Json out = Json::array();
  for (const Commodity& c : routing.commodities) {
    Json flow = Json::array();
    for (EdgeIndex e = 0; e < network.num_edges(); ++e) {
      if (c.forward[e] != 0 || c.backward[e] != 0) flow.push_back({e, c.forward[e], c.backward[e]});
    }
    out.push_back({{"source", network.id(c.source)}, {"target", network.id(c.target)}, {"flow", flow}});
  }
  return out;
}

RoutingTemplate RoutingFrom(const Network& network, const Json& j) {
  RoutingTemplate routing;
  for (const Json& c : j) {
    Commodity commodity = EmptyCommodity(network, Node(network, Field(c, "source")), Node(network, Field(c, "target")));
    for (const Json& f : Field(c, "flow")) {
      if (!f.is_array() || f.size() != 3) throw ArgumentError("flow entries are [edge, forward, backward]");
      const EdgeIndex e = f[0].get<EdgeIndex>();
      if (e < 0 || e >= network.num_edges()) throw StructuralError("flow on unknown edge " + std::to_string(e));
      commodity.forward[e] = f[1].get<double>();
      commodity.backward[e] = f[2].get<double>();
    }
    routing.commodities.push_back(std::move(commodity));
  }
  return routing;
}

void CheckEdgeArray(const Network& network, const Json& j, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != network.num_edges()) {
    throw StructuralError(std::string(what) + " does not cover every edge");
  }
}

std::uint64_t Fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

InstanceFile MakeInstanceFile(const GapInstance& instance) {
  return InstanceFile{"expander_gap", instance.network, instance.universe, instance, std::nullopt};
}

InstanceFile MakeInstanceFile(const GirthInstance& instance) {
  return InstanceFile{"girth", instance.network, instance.universe, std::nullopt, instance};
}

std::string InstanceToJson(const InstanceFile& instance) {
  Json j = {{"kind", "instance"},
            {"schema_version", kFileSchemaVersion},
            {"family", instance.family},
            {"network", NetworkJson(instance.network)},
            {"universe", UniverseJson(instance.network, instance.universe)}};
  if (instance.gap) j["gap"] = GapJson(*instance.gap);
  if (instance.girth) j["girth"] = GirthJson(*instance.girth);
  return Dump(j);
}

InstanceFile InstanceFromJson(const std::string& text) {
  const Json j = Parse(text);
  CheckSchema(j, "instance");
  InstanceFile out;
  out.family = Get<std::string>(j, "family");
  out.network = NetworkFrom(Field(j, "network"));
  out.universe = UniverseFrom(out.network, Field(j, "universe"));
  if (out.family == "expander_gap") {
    out.gap = GapFrom(out.network, out.universe, Field(j, "gap"));
  } else if (out.family == "girth") {
    out.girth = GirthFrom(out.network, out.universe, Field(j, "girth"));
  } else if (out.family != "custom") {
    throw ArgumentError("unknown instance family '" + out.family + "'");
  }
  return out;
}

std::string InstanceFingerprint(const InstanceFile& instance) {
  const Json j = {{"network", NetworkJson(instance.network)},
                  {"universe", UniverseJson(instance.network, instance.universe)}};
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(Fnv1a(j.dump())));
  return buffer;
}

std::string ReportToJson(const SolveReport& report) {
  Json j = ReportJson(report);
  j["kind"] = "report";
  j["schema_version"] = kFileSchemaVersion;
  return Dump(j);
}

SolveReport ReportFromJson(const std::string& text) {
  const Json j = Parse(text);
  CheckSchema(j, "report");
  return ReportFrom(j);
}

std::string SolutionToJson(const Network& network, const SolutionFile& solution) {
  Json j = {{"kind", "solution"},
            {"schema_version", kFileSchemaVersion},
            {"instance_fingerprint", solution.instance_fingerprint},
            {"report", ReportJson(solution.report)}};
  if (solution.reservation) {
    Json u = Json::array();
    for (const Rational& c : solution.reservation->capacity) u.push_back(Q(c));
    j["reservation"] = u;
  }
  if (solution.bar) {
    j["bar"] = {{"k", solution.bar->k},
                {"gamma", solution.bar->gamma},
                {"routing", RoutingJson(network, solution.bar->routing)},
                {"buy_cost", solution.bar->buy_cost},
                {"rent_cost", solution.bar->rent_cost},
                {"total", solution.bar->total}};
  }
  if (solution.spr) {
    Json paths = Json::array();
    for (const auto& path : solution.spr->paths) paths.push_back(Ids(network, path));
    j["spr"] = {{"k", solution.spr->k}, {"paths", paths}, {"cost", Q(solution.spr->cost)}};
  }
  if (solution.tree) {
    Json edges = Json::array();
    for (EdgeIndex e : solution.tree->edges) edges.push_back(network.EdgeKey(e));
    j["tree"] = edges;
  }
  return Dump(j);
}

SolutionFile SolutionFromJson(const Network& network, const std::string& text) {
  const Json j = Parse(text);
  CheckSchema(j, "solution");
  SolutionFile out;
  out.instance_fingerprint = Get<std::string>(j, "instance_fingerprint");
  out.report = ReportFrom(Field(j, "report"));
  if (j.contains("reservation")) {
    CheckEdgeArray(network, j["reservation"], "reservation");
    CapacityReservation u;
    for (const Json& c : j["reservation"]) u.capacity.push_back(ReadQ(c));
    out.reservation = std::move(u);
  }
  if (j.contains("bar")) {
    const Json& b = j["bar"];
    BarSolution bar;
    bar.k = Get<int>(b, "k");
    CheckEdgeArray(network, Field(b, "gamma"), "gamma");
    bar.gamma = Get<std::vector<double>>(b, "gamma");
    bar.routing = RoutingFrom(network, Field(b, "routing"));
    bar.buy_cost = Get<double>(b, "buy_cost");
    bar.rent_cost = Get<double>(b, "rent_cost");
    bar.total = Get<double>(b, "total");
    out.bar = std::move(bar);
  }
  if (j.contains("spr")) {
    const Json& s = j["spr"];
    SprSolution spr;
    spr.k = Get<int>(s, "k");
    for (const Json& path : Field(s, "paths")) spr.paths.push_back(IdsFrom(network, path));
    spr.cost = ReadQ(Field(s, "cost"));
    out.spr = std::move(spr);
  }
  if (j.contains("tree")) {
    TreeTemplate tree;
    for (const Json& key : j["tree"]) {
      auto e = network.FindEdgeByKey(key.get<std::string>());
      if (!e) throw StructuralError("unknown edge '" + key.get<std::string>() + "'");
      tree.edges.push_back(*e);
    }
    out.tree = std::move(tree);
  }
  return out;
}

std::string TreeMetricToJson(const FiniteMetric& metric, const DominatingTreeMetric& tree) {
  Json nodes = Json::array();
  for (const TreeMetricNode& node : tree.nodes) {
    Json members = Json::array();
    for (int x : node.members) members.push_back(metric.ids[x]);
    nodes.push_back({{"parent", node.parent},
                     {"length", Q(node.length)},
                     {"level", node.level},
                     {"center", metric.ids[node.center]},
                     {"representative", metric.ids[node.representative]},
                     {"members", members}});
  }
  Json permutation = Json::array();
  for (int x : tree.permutation) permutation.push_back(metric.ids[x]);
  return Dump({{"kind", "tree_metric"},
               {"schema_version", kFileSchemaVersion},
               {"seed", tree.seed},
               {"beta", tree.beta},
               {"scale", Q(tree.scale)},
               {"permutation", permutation},
               {"nodes", nodes}});
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteTextFile(const std::string& path, const std::string& text) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string temp = path + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw ArgumentError("cannot write '" + path + "'");
    out << text;
    if (!out.flush()) throw ArgumentError("write failed for '" + path + "'");
  }
  std::filesystem::rename(temp, target);
}

}  // namespace robustnet
