#include "netrel/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "netrel/errors.hpp"

namespace netrel {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorKind::Parse, what); }

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed,
                    std::string_view where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) parse_error("unknown field '" + key + "' in " + std::string(where));
  }
}

const json& require(const json& obj, const char* key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) parse_error("missing field '" + std::string(key) + "' in " + std::string(where));
  return *it;
}

std::vector<std::string> string_list(const json& j, std::string_view what) {
  if (!j.is_array()) parse_error(std::string(what) + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) parse_error(std::string(what) + " must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    parse_error(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

NetworkFile parse_network(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) parse_error("network file must be a JSON object");
  reject_unknown(doc, {"name", "failure_mode", "nodes", "edges", "terminals", "reliable_nodes", "classes"},
                 "network");

  NetworkDescription d;
  try {
    if (auto it = doc.find("name"); it != doc.end()) d.name = it->get<std::string>();
    const auto mode = require(doc, "failure_mode", "network").get<std::string>();
    if (mode == "edge")
      d.failure_mode = FailureMode::Edge;
    else if (mode == "node")
      d.failure_mode = FailureMode::Node;
    else
      parse_error("failure_mode must be \"edge\" or \"node\"");
    d.nodes = string_list(require(doc, "nodes", "network"), "nodes");
    const auto& edges = require(doc, "edges", "network");
    if (!edges.is_array()) parse_error("edges must be an array of [u, v] pairs");
    for (const auto& e : edges) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
        parse_error("edges must be an array of [u, v] pairs");
      d.edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
    d.terminals = string_list(require(doc, "terminals", "network"), "terminals");
    if (auto it = doc.find("reliable_nodes"); it != doc.end())
      d.reliable_nodes = string_list(*it, "reliable_nodes");
  } catch (const json::type_error& e) {
    parse_error(std::string("wrong field type: ") + e.what());
  }

  const auto& classes = require(doc, "classes", "network");
  if (!classes.is_object()) parse_error("classes must be an object keyed by class id");
  std::map<int, LifetimeDistribution> dists;
  for (const auto& [key, value] : classes.items()) {
    int id = 0;
    auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
    if (ec != std::errc{} || ptr != key.data() + key.size())
      parse_error("class id '" + key + "' is not an integer");
    if (!value.is_object()) parse_error("class " + key + " must be an object");
    reject_unknown(value, {"members", "distribution"}, "class " + key);
    d.classes.push_back({id, string_list(require(value, "members", "class " + key), "members")});
    auto dit = value.find("distribution");
    if (dit == value.end())
      throw Error(ErrorKind::MissingDistribution, "class " + key + " has no distribution");
    if (!dit->is_object()) parse_error("distribution of class " + key + " must be an object");
    reject_unknown(*dit, {"kind", "params"}, "distribution of class " + key);
    const auto& kind = require(*dit, "kind", "distribution");
    const auto& params = require(*dit, "params", "distribution");
    if (!kind.is_string() || !params.is_array()) parse_error("distribution needs kind and params");
    std::vector<double> p;
    for (const auto& v : params) {
      if (!v.is_number()) parse_error("distribution params must be numbers");
      p.push_back(v.get<double>());
    }
    if (!dists.emplace(id, LifetimeDistribution::from_params(kind.get<std::string>(), p)).second)
      parse_error("duplicate class id " + key);
  }

  NetworkFile file{Network::build(std::move(d)), {}};
  for (auto& [id, dist] : dists) file.distributions.push_back(dist);
  return file;
}

NetworkFile load_network(const std::filesystem::path& path) {
  return parse_network(read_text_file(path));
}

std::string dump_network(const NetworkFile& file) {
  const auto& d = file.network.description();
  json doc;
  doc["name"] = d.name;
  doc["failure_mode"] = std::string(to_string(d.failure_mode));
  doc["nodes"] = d.nodes;
  json edges = json::array();
  for (const auto& [a, b] : d.edges) edges.push_back({a, b});
  doc["edges"] = edges;
  doc["terminals"] = d.terminals;
  doc["reliable_nodes"] = d.reliable_nodes;
  std::vector<const ClassMembers*> sorted;
  for (const auto& c : d.classes) sorted.push_back(&c);
  std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->id < b->id; });
  json classes = json::object();
  for (std::size_t s = 0; s < sorted.size(); ++s) {
    json c;
    c["members"] = sorted[s]->members;
    if (s < file.distributions.size()) {
      const auto& dist = file.distributions[s];
      c["distribution"] = {{"kind", std::string(to_string(dist.kind()))}, {"params", dist.params()}};
    }
    classes[std::to_string(sorted[s]->id)] = c;
  }
  doc["classes"] = classes;
  return doc.dump(2) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::Io, "error reading " + path.string());
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "error writing " + path.string());
}

std::string format_number(double x, bool force_point) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // drop the sign of -0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, ptr);
  if (force_point && s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string hex64(std::uint64_t x) {
  char buf[19] = "0x";
  auto [ptr, ec] = std::to_chars(buf + 2, buf + sizeof buf, x, 16);
  std::string digits(buf + 2, ptr);
  return "0x" + std::string(16 - digits.size(), '0') + digits;
}

std::uint64_t parse_hex64(std::string_view s) {
  if (s.substr(0, 2) == "0x") s.remove_prefix(2);
  std::uint64_t x = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x, 16);
  if (ec != std::errc{} || ptr != s.data() + s.size()) parse_error("bad hex value");
  return x;
}

namespace {

std::string header(const RunInfo& info) {
  std::string h = "# netrel " + std::string(kVersion) + "\n";
  h += "# command: " + info.command + "\n";
  if (info.has_seed) h += "# seed: " + std::to_string(info.seed) + "\n";
  h += "# config_hash: " + hex64(info.config_hash) + "\n";
  for (const auto& [k, v] : info.extra) h += "# " + k + ": " + v + "\n";
  return h;
}

json info_json(const RunInfo& info) {
  json j;
  j["version"] = std::string(kVersion);
  j["command"] = info.command;
  if (info.has_seed) j["seed"] = info.seed;
  j["config_hash"] = hex64(info.config_hash);
  for (const auto& [k, v] : info.extra) j[k] = v;
  return j;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

std::string reliability_csv(const ReliabilityCurve& curve, const RunInfo& info,
                            const std::vector<double>* re) {
  std::string out = header(info);
  out += re ? "t,R,RE\n" : "t,R\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    out += format_number(curve.grid[i], false) + "," + format_number(curve.values[i]);
    if (re) out += "," + format_number((*re)[i]);
    out += "\n";
  }
  return out;
}

namespace {

const char* flag_of(const SignatureTable& table, const SignatureTable::Entry& e) {
  if (table.provenance() == Provenance::Exact) return "exact";
  return e.filled ? "envelope" : "sampled";
}

}  // namespace

std::string signature_csv(const SignatureTable& table, const RunInfo& info) {
  std::string out = header(info);
  for (std::size_t s = 0; s < table.class_sizes().size(); ++s) out += "l_" + std::to_string(s + 1) + ",";
  out += "n_surv,n_fail,phi_hat,flag\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto key = table.key_of(i);
    for (auto l : key.counts) out += std::to_string(l) + ",";
    const auto& e = table.entry(i);
    out += std::to_string(e.n_surv) + "," + std::to_string(e.n_fail) + "," + format_number(e.phi) +
           "," + flag_of(table, e) + "\n";
  }
  return out;
}

std::string reliability_json(const ReliabilityCurve& curve, const RunInfo& info,
                             const std::vector<double>* re) {
  json j;
  j["info"] = info_json(info);
  j["t"] = curve.grid;
  j["R"] = curve.values;
  if (re) {
    json r = json::array();
    for (double x : *re) r.push_back(number_or_null(x));
    j["RE"] = r;
  }
  return j.dump(1) + "\n";
}

std::string signature_json(const SignatureTable& table, const RunInfo& info) {
  json j;
  j["info"] = info_json(info);
  j["provenance"] = table.provenance() == Provenance::Exact ? "exact" : "estimated";
  j["class_sizes"] = std::vector<std::size_t>(table.class_sizes().begin(), table.class_sizes().end());
  json entries = json::array();
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& e = table.entry(i);
    entries.push_back({{"key", table.key_of(i).counts},
                       {"n_surv", e.n_surv},
                       {"n_fail", e.n_fail},
                       {"phi_hat", e.phi},
                       {"flag", flag_of(table, e)}});
  }
  j["entries"] = entries;
  return j.dump(1) + "\n";
}

SignatureTable parse_signature_json(std::string_view text) {
  const json j = parse_json(text);
  try {
    const auto prov = j.at("provenance").get<std::string>();
    SignatureTable table(j.at("class_sizes").get<std::vector<std::size_t>>(),
                         prov == "exact" ? Provenance::Exact : Provenance::Estimated);
    for (const auto& e : j.at("entries")) {
      const auto idx = table.index_of({e.at("key").get<std::vector<std::size_t>>()});
      table.add(idx, true, e.at("n_surv").get<std::uint64_t>());
      table.add(idx, false, e.at("n_fail").get<std::uint64_t>());
    }
    table.finalize();
    for (const auto& e : j.at("entries")) {
      const auto idx = table.index_of({e.at("key").get<std::vector<std::size_t>>()});
      if (table.entry(idx).phi != e.at("phi_hat").get<double>())
        parse_error("signature entry phi_hat disagrees with its counts");
    }
    return table;
  } catch (const json::exception& e) {
    parse_error(std::string("bad signature JSON: ") + e.what());
  }
}

ReliabilityCurve parse_reliability_json(std::string_view text) {
  const json j = parse_json(text);
  try {
    ReliabilityCurve c;
    c.grid = j.at("t").get<std::vector<double>>();
    c.values = j.at("R").get<std::vector<double>>();
    if (c.grid.size() != c.values.size()) parse_error("t and R lengths differ");
    return c;
  } catch (const json::exception& e) {
    parse_error(std::string("bad reliability JSON: ") + e.what());
  }
}

std::string forest_json(const Forest& forest, const Network& net) {
  json j;
  j["format"] = "netrel-forest";
  j["version"] = 1;
  j["dimension"] = forest.dimension();
  j["ntree"] = forest.ntree();
  j["mtry"] = forest.mtry();
  j["seed"] = forest.seed();
  j["network"] = {{"name", net.name()},
                  {"fingerprint", hex64(net.fingerprint())},
                  {"components", net.component_count()}};
  json trees = json::array();
  for (const auto& t : forest.trees()) {
    std::vector<std::int32_t> feature;
    std::vector<std::uint32_t> left, right;
    std::vector<int> label;
    for (const auto& n : t.nodes()) {
      feature.push_back(n.feature);
      left.push_back(n.left);
      right.push_back(n.right);
      label.push_back(n.label);
    }
    trees.push_back({{"feature", feature}, {"left", left}, {"right", right}, {"label", label}});
  }
  j["trees"] = trees;
  return j.dump() + "\n";
}

Forest parse_forest_json(std::string_view text, const Network& net) {
  const json j = parse_json(text);
  try {
    if (j.at("format").get<std::string>() != "netrel-forest") parse_error("not a forest model file");
    if (j.at("version").get<int>() != 1) parse_error("unsupported model file version");
    const auto dim = j.at("dimension").get<std::size_t>();
    const auto fp = parse_hex64(j.at("network").at("fingerprint").get<std::string>());
    if (dim != net.component_count())
      throw Error(ErrorKind::ModelMismatch, "model dimension " + std::to_string(dim) +
                                                " does not match network M = " +
                                                std::to_string(net.component_count()));
    if (fp != net.fingerprint())
      throw Error(ErrorKind::ModelMismatch,
                  "model was trained on a different network (fingerprint " + hex64(fp) + ", expected " +
                      hex64(net.fingerprint()) + ")");
    std::vector<DecisionTree> trees;
    for (const auto& t : j.at("trees")) {
      const auto feature = t.at("feature").get<std::vector<std::int32_t>>();
      const auto left = t.at("left").get<std::vector<std::uint32_t>>();
      const auto right = t.at("right").get<std::vector<std::uint32_t>>();
      const auto label = t.at("label").get<std::vector<int>>();
      if (left.size() != feature.size() || right.size() != feature.size() ||
          label.size() != feature.size())
        parse_error("tree arrays differ in length");
      std::vector<DecisionTree::Node> nodes(feature.size());
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (feature[i] >= static_cast<std::int32_t>(dim)) parse_error("tree feature out of range");
        nodes[i] = {feature[i], left[i], right[i], static_cast<std::uint8_t>(label[i] != 0)};
      }
      trees.emplace_back(std::move(nodes));
    }
    if (trees.size() != j.at("ntree").get<std::size_t>()) parse_error("tree count mismatch");
    return Forest(dim, j.at("mtry").get<std::size_t>(), j.at("seed").get<std::uint64_t>(),
                  std::move(trees));
  } catch (const json::exception& e) {
    parse_error(std::string("bad model file: ") + e.what());
  }
}

std::string audit_json(const AuditLog& a) {
  json j;
  j["method"] = a.method;
  j["n_mcs"] = a.n_mcs;
  j["n_ini"] = a.n_ini;
  j["n_add"] = a.n_add;
  j["delta"] = a.delta;
  j["ntree"] = a.ntree;
  j["mtry"] = a.mtry;
  j["seed"] = a.seed;
  json its = json::array();
  for (const auto& r : a.iterations) {
    its.push_back({{"iteration", r.iteration},
                   {"train_size", r.train_size},
                   {"labeled_samples", r.labeled_samples},
                   {"pool_samples", r.pool_samples},
                   {"n_rho", r.n_rho},
                   {"ratio", r.ratio},
                   {"passed", r.passed},
                   {"batch", r.batch}});
  }
  j["iterations"] = its;
  j["kst_runs"] = a.kst_runs;
  j["labeled_fraction"] = a.n_mcs ? static_cast<double>(a.kst_runs) / static_cast<double>(a.n_mcs) : 0.0;
  j["stop_reason"] = a.stop_reason;
  return j.dump(1) + "\n";
}

}  // namespace netrel
