#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

namespace oracle {

using namespace netrel;

Graph graph_of(const Network& net) {
  Graph g;
  g.nodes = net.node_count();
  for (const auto& e : net.edges()) g.edges.emplace_back(e.u, e.v);
  g.s = net.terminals()[0];
  g.t = net.terminals()[1];
  return g;
}

namespace {

std::size_t find(std::vector<std::size_t>& p, std::size_t x) {
  while (p[x] != x) x = p[x] = p[p[x]];
  return x;
}

}  // namespace

bool connected(const Graph& g, const std::vector<std::uint8_t>& works,
               const std::vector<std::uint8_t>& node_ok) {
  std::vector<std::size_t> p(g.nodes);
  std::iota(p.begin(), p.end(), 0);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (!works[e]) continue;
    const auto [a, b] = g.edges[e];
    if (!node_ok.empty() && (!node_ok[a] || !node_ok[b])) continue;
    p[find(p, a)] = find(p, b);
  }
  return find(p, g.s) == find(p, g.t);
}

bool phi(const Network& net, const std::vector<std::uint8_t>& x) {
  const Graph g = graph_of(net);
  if (net.failure_mode() == FailureMode::Edge) {
    std::vector<std::uint8_t> works(net.edge_count(), 1);
    for (std::size_t c = 0; c < x.size(); ++c) works[net.component_element(c)] = x[c];
    return connected(g, works);
  }
  std::vector<std::uint8_t> node_ok(net.node_count(), 1);
  for (std::size_t c = 0; c < x.size(); ++c) node_ok[net.component_element(c)] = x[c];
  return connected(g, std::vector<std::uint8_t>(net.edge_count(), 1), node_ok);
}

double widest_path(const Graph& g, const std::vector<double>& w) {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(g.nodes);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    adj[g.edges[e].first].emplace_back(g.edges[e].second, e);
    adj[g.edges[e].second].emplace_back(g.edges[e].first, e);
  }
  double best = -INFINITY;
  std::vector<std::uint8_t> on_path(g.nodes, 0);
  std::function<void(std::size_t, double)> dfs = [&](std::size_t v, double bottleneck) {
    if (v == g.t) {
      best = std::max(best, bottleneck);
      return;
    }
    if (bottleneck <= best) return;  // cannot improve
    on_path[v] = 1;
    for (const auto& [u, e] : adj[v])
      if (!on_path[u]) dfs(u, std::min(bottleneck, w[e]));
    on_path[v] = 0;
  };
  dfs(g.s, INFINITY);
  return best;
}

std::map<std::vector<std::size_t>, std::pair<std::uint64_t, std::uint64_t>> signature_counts(
    const Network& net) {
  const std::size_t m = net.component_count();
  std::map<std::vector<std::size_t>, std::pair<std::uint64_t, std::uint64_t>> out;
  std::vector<std::uint8_t> x(m);
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << m); ++bits) {
    std::vector<std::size_t> key(net.class_count(), 0);
    for (std::size_t c = 0; c < m; ++c) {
      x[c] = (bits >> c) & 1u;
      if (x[c]) ++key[static_cast<std::size_t>(net.component_class(c))];
    }
    auto& slot = out[key];
    slot.first += phi(net, x);
    slot.second += 1;
  }
  return out;
}

double reliability_by_states(const Network& net, const std::vector<LifetimeDistribution>& dists,
                             double t) {
  const std::size_t m = net.component_count();
  std::vector<double> p(m);
  for (std::size_t c = 0; c < m; ++c)
    p[c] = 1.0 - dists[static_cast<std::size_t>(net.component_class(c))].cdf(t);
  std::vector<std::uint8_t> x(m);
  double r = 0.0;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << m); ++bits) {
    double prob = 1.0;
    for (std::size_t c = 0; c < m; ++c) {
      x[c] = (bits >> c) & 1u;
      prob *= x[c] ? p[c] : 1.0 - p[c];
    }
    if (prob > 0.0 && phi(net, x)) r += prob;
  }
  return r;
}

NetworkFile make_file(NetworkDescription d, std::vector<LifetimeDistribution> dists) {
  return {Network::build(std::move(d)), std::move(dists)};
}

NetworkFile bridge(LifetimeDistribution dist) {
  NetworkDescription d;
  d.name = "bridge";
  d.nodes = {"s", "a", "b", "t"};
  d.edges = {{"s", "a"}, {"s", "b"}, {"a", "b"}, {"a", "t"}, {"b", "t"}};
  d.terminals = {"s", "t"};
  d.classes = {{1, {"e1", "e2", "e3", "e4", "e5"}}};
  return make_file(d, {dist});
}

NetworkFile series2(LifetimeDistribution dist) {
  NetworkDescription d;
  d.name = "series2";
  d.nodes = {"s", "a", "t"};
  d.edges = {{"s", "a"}, {"a", "t"}};
  d.terminals = {"s", "t"};
  d.classes = {{1, {"e1", "e2"}}};
  return make_file(d, {dist});
}

NetworkFile diamond(LifetimeDistribution dist) {
  NetworkDescription d;
  d.name = "diamond";
  d.nodes = {"s", "a", "b", "t"};
  d.edges = {{"s", "a"}, {"a", "t"}, {"s", "b"}, {"b", "t"}};
  d.terminals = {"s", "t"};
  d.classes = {{1, {"e1", "e2", "e3", "e4"}}};
  return make_file(d, {dist});
}

NetworkFile grid3x3() {
  NetworkDescription d;
  d.name = "grid3x3";
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) d.nodes.push_back("v" + std::to_string(3 * r + c + 1));
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 2; ++c)
      d.edges.emplace_back("v" + std::to_string(3 * r + c + 1), "v" + std::to_string(3 * r + c + 2));
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c)
      d.edges.emplace_back("v" + std::to_string(3 * r + c + 1), "v" + std::to_string(3 * r + c + 4));
  d.terminals = {"v1", "v9"};
  ClassMembers horizontal{1, {}}, vertical{2, {}};
  for (int e = 1; e <= 6; ++e) horizontal.members.push_back("e" + std::to_string(e));
  for (int e = 7; e <= 12; ++e) vertical.members.push_back("e" + std::to_string(e));
  d.classes = {horizontal, vertical};
  return make_file(d, {LifetimeDistribution::exponential(1.0),
                       LifetimeDistribution::weibull(1.2, 1.5)});
}

NetworkFile random_network(std::mt19937_64& rng, const RandomSpec& spec) {
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  auto real = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  const bool node_mode = spec.mode == FailureMode::Node;
  std::size_t n = uniform(spec.min_nodes, spec.max_nodes);
  if (!node_mode) n = std::min(n, spec.max_components + 1);
  NetworkDescription d;
  d.name = "random";
  d.failure_mode = spec.mode;
  for (std::size_t v = 0; v < n; ++v) d.nodes.push_back("n" + std::to_string(v));

  std::set<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t a = perm[i], b = perm[uniform(0, i - 1)];
    edges.emplace(std::min(a, b), std::max(a, b));
  }
  const std::size_t max_edges = node_mode ? n * (n - 1) / 2 : spec.max_components;
  const std::size_t target = std::min(max_edges, edges.size() + uniform(1, n));
  for (int tries = 0; edges.size() < target && tries < 1000; ++tries) {
    const std::size_t a = uniform(0, n - 1), b = uniform(0, n - 1);
    if (a != b) edges.emplace(std::min(a, b), std::max(a, b));
  }
  std::vector<std::pair<std::size_t, std::size_t>> list(edges.begin(), edges.end());
  std::shuffle(list.begin(), list.end(), rng);
  for (const auto& [a, b] : list) d.edges.emplace_back(d.nodes[a], d.nodes[b]);

  const std::size_t s = uniform(0, n - 1);
  std::size_t t = uniform(0, n - 2);
  if (t >= s) ++t;
  d.terminals = {d.nodes[s], d.nodes[t]};

  std::vector<std::string> components;
  if (node_mode) {
    for (std::size_t v = 0; v < n; ++v)
      if (v != s && v != t) components.push_back(d.nodes[v]);
    std::shuffle(components.begin(), components.end(), rng);
    if (components.size() > spec.max_components) components.resize(spec.max_components);
  } else {
    for (std::size_t e = 0; e < d.edges.size(); ++e) components.push_back("e" + std::to_string(e + 1));
  }
  const std::size_t classes = std::min(uniform(1, spec.max_classes), components.size());
  std::vector<std::size_t> assign(components.size());
  for (std::size_t i = 0; i < assign.size(); ++i)
    assign[i] = i < classes ? i : uniform(0, classes - 1);
  std::shuffle(assign.begin(), assign.end(), rng);
  for (std::size_t k = 0; k < classes; ++k) d.classes.push_back({static_cast<int>(k + 1), {}});
  for (std::size_t i = 0; i < components.size(); ++i) d.classes[assign[i]].members.push_back(components[i]);

  std::vector<LifetimeDistribution> dists;
  for (std::size_t k = 0; k < classes; ++k) {
    switch (uniform(0, 3)) {
      case 0: dists.push_back(LifetimeDistribution::exponential(real(0.5, 2.0))); break;
      case 1: dists.push_back(LifetimeDistribution::weibull(real(0.8, 2.0), real(0.8, 3.0))); break;
      case 2: dists.push_back(LifetimeDistribution::lognormal(real(-0.5, 0.5), real(0.3, 1.0))); break;
      default: dists.push_back(LifetimeDistribution::gamma(real(0.5, 1.5), real(1.0, 3.0))); break;
    }
  }
  return make_file(d, dists);
}

}  // namespace oracle
