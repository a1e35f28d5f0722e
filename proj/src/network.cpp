#include "netrel/network.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <map>
#include <set>
#include <unordered_map>

#include "netrel/errors.hpp"
#include "netrel/hash.hpp"

namespace netrel {

std::string_view to_string(FailureMode mode) {
  return mode == FailureMode::Node ? "node" : "edge";
}

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(std::size_t size, bool value)
    : size_(size), words_((size + 63) / 64, value ? ~std::uint64_t{0} : 0) {
  if (value && size % 64 != 0) words_.back() &= (std::uint64_t{1} << (size % 64)) - 1;
}

StateVector StateVector::from_string(std::string_view bits) {
  StateVector x(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1')
      x.set(i);
    else if (bits[i] != '0')
      throw Error(ErrorKind::Parse, "state vector must contain only '0' and '1'");
  }
  return x;
}

std::size_t StateVector::count() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::size_t StateVector::hash() const noexcept {
  std::uint64_t h = mix64(size_);
  for (auto w : words_) h = mix64(h ^ w);
  return static_cast<std::size_t>(h);
}

std::string StateVector::to_string() const {
  std::string s(size_, '0');
  for (std::size_t i = 0; i < size_; ++i)
    if (test(i)) s[i] = '1';
  return s;
}

// ---------------------------------------------------------------------------
// Network

namespace {

std::optional<std::size_t> parse_edge_id(std::string_view id) {
  if (id.size() < 2 || id[0] != 'e') return std::nullopt;
  std::size_t k = 0;
  auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), k);
  if (ec != std::errc{} || ptr != id.data() + id.size() || k == 0) return std::nullopt;
  return k - 1;
}

}  // namespace

Network Network::build(NetworkDescription description) {
  Network net;
  net.desc_ = std::move(description);
  const auto& d = net.desc_;

  std::unordered_map<std::string, std::size_t> node_index;
  for (std::size_t i = 0; i < d.nodes.size(); ++i) {
    if (!node_index.emplace(d.nodes[i], i).second)
      net.issues_.push_back("duplicate node id: " + d.nodes[i]);
  }
  auto resolve = [&](const std::string& id, std::string_view what) {
    auto it = node_index.find(id);
    if (it == node_index.end())
      throw Error(ErrorKind::InvalidNetwork,
                  std::string(what) + " references unknown node '" + id + "'");
    return it->second;
  };

  net.adjacency_.assign(d.nodes.size(), {});
  for (const auto& [a, b] : d.edges) {
    const Edge e{resolve(a, "edge"), resolve(b, "edge")};
    const std::size_t idx = net.edges_.size();
    net.edges_.push_back(e);
    net.adjacency_[e.u].emplace_back(e.v, idx);
    if (e.u != e.v) net.adjacency_[e.v].emplace_back(e.u, idx);
  }
  for (const auto& t : d.terminals) net.terminals_.push_back(resolve(t, "terminal"));
  std::set<std::size_t> reliable;
  for (const auto& r : d.reliable_nodes) reliable.insert(resolve(r, "reliable_nodes"));

  // Classes, ordered by external id.
  std::vector<const ClassMembers*> classes;
  for (const auto& c : d.classes) classes.push_back(&c);
  std::stable_sort(classes.begin(), classes.end(),
                   [](auto* a, auto* b) { return a->id < b->id; });
  for (std::size_t s = 0; s < classes.size(); ++s) {
    if (s > 0 && classes[s]->id == classes[s - 1]->id)
      net.issues_.push_back("duplicate class id: " + std::to_string(classes[s]->id));
    net.class_ids_.push_back(classes[s]->id);
  }

  const std::set<std::size_t> terminal_set(net.terminals_.begin(), net.terminals_.end());
  const bool node_mode = d.failure_mode == FailureMode::Node;
  const std::size_t elements = node_mode ? d.nodes.size() : net.edges_.size();
  std::vector<int> element_class(elements, -1);
  for (std::size_t s = 0; s < classes.size(); ++s) {
    for (const auto& member : classes[s]->members) {
      std::size_t element;
      if (node_mode) {
        element = resolve(member, "class member");
      } else {
        auto k = parse_edge_id(member);
        if (!k || *k >= net.edges_.size())
          throw Error(ErrorKind::InvalidNetwork,
                      "class member '" + member + "' is not an edge id e1..e" +
                          std::to_string(net.edges_.size()));
        element = *k;
      }
      if (element_class[element] != -1) {
        net.issues_.push_back("component listed in more than one class: " + member);
        continue;
      }
      element_class[element] = static_cast<int>(s);
    }
  }

  net.class_sizes_.assign(classes.size(), 0);
  net.node_component_.assign(d.nodes.size(), npos);
  for (std::size_t e = 0; e < elements; ++e) {
    if (node_mode) {
      if (element_class[e] == -1) continue;  // unassigned nodes are reliable
      if (terminal_set.count(e)) {
        net.issues_.push_back("terminal must be reliable: " + d.nodes[e]);
        continue;
      }
      if (reliable.count(e)) {
        net.issues_.push_back("node declared reliable but assigned a class: " + d.nodes[e]);
        continue;
      }
      net.node_component_[e] = net.component_index_.size();
    } else if (element_class[e] == -1) {
      net.issues_.push_back("edge without class: e" + std::to_string(e + 1));
    }
    net.component_index_.push_back(e);
    net.component_class_.push_back(element_class[e]);
    if (element_class[e] >= 0) ++net.class_sizes_[static_cast<std::size_t>(element_class[e])];
  }

  std::uint64_t h = fnv1a(to_string(d.failure_mode));
  h = hash_combine(h, d.nodes.size());
  for (const auto& e : net.edges_) h = hash_combine(hash_combine(h, e.u), e.v);
  for (auto t : net.terminals_) h = hash_combine(h, t);
  for (std::size_t c = 0; c < net.component_index_.size(); ++c) {
    h = hash_combine(h, net.component_index_[c]);
    const int cls = net.component_class_[c];
    h = hash_combine(h, cls >= 0 ? static_cast<std::uint64_t>(net.class_ids_[cls]) : 0u);
  }
  net.fingerprint_ = h;
  return net;
}

std::optional<std::size_t> Network::find_node(std::string_view id) const {
  for (std::size_t i = 0; i < desc_.nodes.size(); ++i)
    if (desc_.nodes[i] == id) return i;
  return std::nullopt;
}

std::string Network::component_id(std::size_t component) const {
  const std::size_t element = component_index_.at(component);
  if (failure_mode() == FailureMode::Node) return desc_.nodes[element];
  return "e" + std::to_string(element + 1);
}

std::optional<std::size_t> Network::find_component(std::string_view id) const {
  if (failure_mode() == FailureMode::Node) {
    auto node = find_node(id);
    if (!node || node_component_[*node] == npos) return std::nullopt;
    return node_component_[*node];
  }
  auto k = parse_edge_id(id);
  if (!k || *k >= edges_.size()) return std::nullopt;
  return *k;
}

// ---------------------------------------------------------------------------
// Connectivity

namespace {

// Nodes reachable from `start` through working edges and nodes.
std::vector<std::uint8_t> reach(const Network& net, std::size_t start,
                                std::span<const std::uint8_t> edge_works,
                                std::span<const std::uint8_t> node_works) {
  std::vector<std::uint8_t> seen(net.node_count(), 0);
  std::vector<std::size_t> stack{start};
  seen[start] = 1;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (const auto& [w, e] : net.adjacency()[v]) {
      if (seen[w]) continue;
      if (!edge_works.empty() && !edge_works[e]) continue;
      if (!node_works.empty() && !node_works[w]) continue;
      seen[w] = 1;
      stack.push_back(w);
    }
  }
  return seen;
}

}  // namespace

bool terminals_connected(const Network& net, std::span<const std::uint8_t> edge_works,
                         std::span<const std::uint8_t> node_works) {
  const auto terms = net.terminals();
  if (terms.empty()) return false;
  const auto seen = reach(net, terms[0], edge_works, node_works);
  return std::all_of(terms.begin(), terms.end(), [&](auto t) { return seen[t] != 0; });
}

bool structure_function(const Network& net, const StateVector& x) {
  if (x.size() != net.component_count())
    throw Error(ErrorKind::LengthMismatch, "state vector length " + std::to_string(x.size()) +
                                               " does not match M = " +
                                               std::to_string(net.component_count()));
  if (net.failure_mode() == FailureMode::Edge) {
    std::vector<std::uint8_t> edge_works(net.edge_count());
    for (std::size_t c = 0; c < x.size(); ++c) edge_works[net.component_element(c)] = x.test(c);
    return terminals_connected(net, edge_works, {});
  }
  std::vector<std::uint8_t> node_works(net.node_count(), 1);
  for (std::size_t c = 0; c < x.size(); ++c) node_works[net.component_element(c)] = x.test(c);
  return terminals_connected(net, {}, node_works);
}

// ---------------------------------------------------------------------------
// Validation

ValidationReport validate(const Network& net) {
  ValidationReport report;
  auto& v = report.violations;
  v.assign(net.structural_issues().begin(), net.structural_issues().end());

  std::set<std::pair<std::size_t, std::size_t>> seen_edges;
  for (std::size_t e = 0; e < net.edge_count(); ++e) {
    const auto [a, b] = net.edges()[e];
    const auto& na = net.node_name(a);
    const auto& nb = net.node_name(b);
    if (a == b) {
      v.push_back("self-loop at node " + na + " (e" + std::to_string(e + 1) + ")");
      continue;
    }
    if (!seen_edges.emplace(std::min(a, b), std::max(a, b)).second)
      v.push_back("duplicate edge " + na + "-" + nb + " (e" + std::to_string(e + 1) + ")");
  }

  const auto terms = net.terminals();
  if (terms.size() < 2) v.push_back("at least two terminals are required");
  if (std::set<std::size_t>(terms.begin(), terms.end()).size() != terms.size())
    v.push_back("terminals must be distinct");

  const auto ids = net.class_ids();
  for (std::size_t s = 0; s < ids.size(); ++s) {
    if (ids[s] != static_cast<int>(s) + 1) {
      v.push_back("class ids must be contiguous 1..S");
      break;
    }
  }
  if (net.component_count() == 0) v.push_back("network has no unreliable components");

  if (net.node_count() > 0) {
    const auto seen = reach(net, 0, {}, {});
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
      v.push_back("not connected: the all-working graph has more than one component");
  }
  return report;
}

void require_valid(const Network& net) {
  const auto report = validate(net);
  if (report.ok()) return;
  std::string msg = "invalid network '" + net.name() + "':";
  for (const auto& s : report.violations) msg += " " + s + ";";
  throw Error(ErrorKind::InvalidNetwork, msg);
}

CombinationKey combination_of(const Network& net, const StateVector& x) {
  if (x.size() != net.component_count())
    throw Error(ErrorKind::LengthMismatch, "state vector length " + std::to_string(x.size()) +
                                               " does not match M = " +
                                               std::to_string(net.component_count()));
  CombinationKey key{std::vector<std::size_t>(net.class_count(), 0)};
  for (std::size_t c = 0; c < x.size(); ++c) {
    const int s = net.component_class(c);
    if (s >= 0 && x.test(c)) ++key.counts[static_cast<std::size_t>(s)];
  }
  return key;
}

// ---------------------------------------------------------------------------
// Variants

Mask::Mask(std::size_t original_size, std::vector<std::size_t> kept)
    : original_size_(original_size), kept_(std::move(kept)) {
  for (auto k : kept_)
    if (k >= original_size_)
      throw Error(ErrorKind::DimensionMismatch, "mask position out of range");
}

Mask Mask::identity(std::size_t size) {
  std::vector<std::size_t> kept(size);
  for (std::size_t i = 0; i < size; ++i) kept[i] = i;
  return Mask(size, std::move(kept));
}

std::vector<std::size_t> Mask::removed() const {
  std::vector<std::uint8_t> keep(original_size_, 0);
  for (auto k : kept_) keep[k] = 1;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < original_size_; ++i)
    if (!keep[i]) out.push_back(i);
  return out;
}

StateVector Mask::embed(const StateVector& variant) const {
  if (variant.size() != kept_.size())
    throw Error(ErrorKind::DimensionMismatch,
                "variant vector length " + std::to_string(variant.size()) +
                    " does not match mask size " + std::to_string(kept_.size()));
  StateVector out(original_size_);
  for (std::size_t i = 0; i < kept_.size(); ++i)
    if (variant.test(i)) out.set(kept_[i]);
  return out;
}

Variant derive_variant(const Network& net, std::span<const std::size_t> removed) {
  const std::size_t m = net.component_count();
  std::vector<std::uint8_t> drop(m, 0);
  for (auto c : removed) {
    if (c >= m)
      throw Error(ErrorKind::InvalidRemoval, "component index " + std::to_string(c) +
                                                 " is not an unreliable component");
    drop[c] = 1;
  }

  const auto& d = net.description();
  NetworkDescription vd;
  vd.name = d.name + "-variant";
  vd.failure_mode = d.failure_mode;
  vd.terminals = d.terminals;
  vd.reliable_nodes = d.reliable_nodes;

  std::vector<std::size_t> kept;
  for (std::size_t c = 0; c < m; ++c)
    if (!drop[c]) kept.push_back(c);

  std::vector<int> element_class;  // external class id per kept element
  if (net.failure_mode() == FailureMode::Edge) {
    vd.nodes = d.nodes;
    std::map<int, std::vector<std::string>> members;
    for (const auto& c : d.classes) members[c.id];
    for (std::size_t c = 0; c < m; ++c) {
      if (drop[c]) continue;
      const std::size_t e = net.component_element(c);
      vd.edges.push_back(d.edges[e]);
      const int cls = net.component_class(c);
      if (cls >= 0)
        members[net.class_ids()[cls]].push_back("e" + std::to_string(vd.edges.size()));
    }
    for (auto& [id, list] : members) vd.classes.push_back({id, std::move(list)});
  } else {
    std::vector<std::uint8_t> node_gone(net.node_count(), 0);
    for (std::size_t c = 0; c < m; ++c)
      if (drop[c]) node_gone[net.component_element(c)] = 1;
    for (std::size_t v = 0; v < net.node_count(); ++v)
      if (!node_gone[v]) vd.nodes.push_back(d.nodes[v]);
    for (std::size_t e = 0; e < net.edge_count(); ++e) {
      const auto [a, b] = net.edges()[e];
      if (!node_gone[a] && !node_gone[b]) vd.edges.push_back(d.edges[e]);
    }
    for (const auto& c : d.classes) {
      ClassMembers cm{c.id, {}};
      for (const auto& member : c.members) {
        auto node = net.find_node(member);
        if (node && !node_gone[*node]) cm.members.push_back(member);
      }
      vd.classes.push_back(std::move(cm));
    }
  }

  Network variant = Network::build(std::move(vd));
  if (!terminals_connected(variant, {}, {}))
    throw Error(ErrorKind::VariantDisconnected,
                "removal disconnects the terminals of the all-working network");
  if (variant.node_count() > 0) {
    const auto r = validate(variant);
    for (const auto& s : r.violations)
      if (s.rfind("not connected", 0) == 0)
        throw Error(ErrorKind::VariantDisconnected,
                    "removal leaves the all-working network disconnected");
  }
  if (variant.component_count() != kept.size())
    throw Error(ErrorKind::InvalidRemoval, "variant component ordering mismatch");
  return {std::move(variant), Mask(m, std::move(kept))};
}

Variant derive_variant(const Network& net, std::span<const std::string> removed_ids) {
  std::vector<std::size_t> removed;
  for (const auto& id : removed_ids) {
    auto c = net.find_component(id);
    if (!c) {
      const bool terminal = std::any_of(
          net.terminals().begin(), net.terminals().end(),
          [&](auto t) { return net.node_name(t) == id; });
      throw Error(ErrorKind::InvalidRemoval,
                  terminal ? "cannot remove terminal '" + id + "'"
                           : "'" + id + "' is not an unreliable component");
    }
    removed.push_back(*c);
  }
  return derive_variant(net, removed);
}

}  // namespace netrel
