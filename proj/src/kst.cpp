#include "netrel/kst.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "netrel/errors.hpp"

namespace netrel {

SortedSample sort_sample(std::span<const double> times) {
  SortedSample s;
  s.order.resize(times.size());
  std::iota(s.order.begin(), s.order.end(), 0u);
  std::stable_sort(s.order.begin(), s.order.end(),
                   [&](auto a, auto b) { return times[a] < times[b]; });
  s.sorted_times.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) s.sorted_times[i] = times[s.order[i]];
  return s;
}

StateVector StateChain::vector(std::size_t i) const {
  const std::size_t m = sorted.order.size();
  StateVector x(m, true);
  for (std::size_t k = 0; k < i && k < m; ++k) x.set(sorted.order[k], false);
  return x;
}

std::vector<StateVector> StateChain::vectors() const {
  std::vector<StateVector> out;
  out.reserve(length());
  StateVector x(sorted.order.size(), true);
  out.push_back(x);
  for (auto c : sorted.order) {
    x.set(c, false);
    out.push_back(x);
  }
  return out;
}

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t v) {
  while (parent[v] != v) {
    parent[v] = parent[parent[v]];
    v = parent[v];
  }
  return v;
}

}  // namespace

std::span<const std::size_t> KstWorkspace::max_spanning_tree(const Network& net,
                                                             std::span<const double> weights) {
  const std::size_t ne = net.edge_count();
  const std::size_t nv = net.node_count();
  if (weights.size() != ne)
    throw Error(ErrorKind::LengthMismatch, "expected one weight per edge");

  edge_order_.resize(ne);
  std::iota(edge_order_.begin(), edge_order_.end(), std::size_t{0});
  std::sort(edge_order_.begin(), edge_order_.end(), [&](auto a, auto b) {
    return weights[a] > weights[b] || (weights[a] == weights[b] && a < b);
  });

  parent_.resize(nv);
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  tree_.clear();
  const auto edges = net.edges();
  for (auto e : edge_order_) {
    const std::size_t ru = find_root(parent_, edges[e].u);
    const std::size_t rv = find_root(parent_, edges[e].v);
    if (ru == rv) continue;  // would close a cycle
    parent_[ru] = rv;
    tree_.push_back(e);
    if (tree_.size() + 1 == nv) break;
  }
  if (nv > 0 && tree_.size() + 1 != nv)
    throw Error(ErrorKind::DisconnectedGraph, "graph is not connected; no spanning tree");
  return tree_;
}

std::span<const std::size_t> KstWorkspace::prune_to_terminals(
    const Network& net, std::span<const std::size_t> tree) {
  const std::size_t nv = net.node_count();
  const auto edges = net.edges();
  degree_.assign(nv, 0);
  head_.assign(nv, npos);
  next_.resize(2 * tree.size());
  alive_.assign(tree.size(), 1);
  terminal_.assign(nv, 0);
  for (auto t : net.terminals()) terminal_[t] = 1;

  // Linked adjacency over tree slots; slot 2k and 2k+1 are the two ends of
  // tree[k].
  for (std::size_t k = 0; k < tree.size(); ++k) {
    const auto [u, v] = edges[tree[k]];
    next_[2 * k] = head_[u];
    head_[u] = 2 * k;
    next_[2 * k + 1] = head_[v];
    head_[v] = 2 * k + 1;
    ++degree_[u];
    ++degree_[v];
  }
  stack_.clear();
  for (std::size_t v = 0; v < nv; ++v)
    if (degree_[v] == 1 && !terminal_[v]) stack_.push_back(v);
  while (!stack_.empty()) {
    const std::size_t v = stack_.back();
    stack_.pop_back();
    if (degree_[v] != 1) continue;
    for (std::size_t slot = head_[v]; slot != npos; slot = next_[slot]) {
      const std::size_t k = slot / 2;
      if (!alive_[k]) continue;
      alive_[k] = 0;
      --degree_[v];
      const auto [a, b] = edges[tree[k]];
      const std::size_t w = a == v ? b : a;
      if (--degree_[w] == 1 && !terminal_[w]) stack_.push_back(w);
      break;
    }
  }
  pruned_.clear();
  for (std::size_t k = 0; k < tree.size(); ++k)
    if (alive_[k]) pruned_.push_back(tree[k]);
  return pruned_;
}

std::size_t KstWorkspace::bottleneck_edge(const Network& net, std::span<const double> weights) {
  const auto tree = max_spanning_tree(net, weights);
  const auto pruned = prune_to_terminals(net, tree);
  std::size_t best = npos;
  for (auto e : pruned) {
    if (best == npos || weights[e] < weights[best] || (weights[e] == weights[best] && e < best))
      best = e;
  }
  return best;
}

std::size_t KstWorkspace::chain_rank(const Network& net, std::span<const double> sample,
                                     std::vector<std::uint32_t>& order) {
  const std::size_t m = net.component_count();
  if (sample.size() != m)
    throw Error(ErrorKind::LengthMismatch, "lifetime sample length does not match M");
  order.resize(m);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return sample[a] < sample[b]; });
  rank_.resize(m);
  for (std::size_t i = 0; i < m; ++i) rank_[order[i]] = i + 1;

  // The spanning tree runs on chain ranks rather than raw lifetimes: the
  // order is identical for distinct lifetimes and stays consistent with the
  // tie-broken chain when lifetimes repeat.
  const std::size_t never = m + 1;
  rank_weights_.resize(net.edge_count());
  if (net.failure_mode() == FailureMode::Edge) {
    for (std::size_t c = 0; c < m; ++c)
      rank_weights_[net.component_element(c)] = static_cast<double>(rank_[c]);
  } else {
    // Edge dies with its first-failing endpoint; reliable endpoints never fail.
    const auto edges = net.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const std::size_t cu = net.node_component(edges[e].u);
      const std::size_t cv = net.node_component(edges[e].v);
      const std::size_t ru = cu == npos ? never : rank_[cu];
      const std::size_t rv = cv == npos ? never : rank_[cv];
      rank_weights_[e] = static_cast<double>(std::min(ru, rv));
    }
  }
  const std::size_t e = bottleneck_edge(net, rank_weights_);
  if (e == npos) return never;
  return static_cast<std::size_t>(rank_weights_[e]);
}

StateChain KstWorkspace::build_chain(const Network& net, std::span<const double> sample) {
  StateChain chain;
  chain.k_rank = chain_rank(net, sample, chain.sorted.order);
  const std::size_t m = sample.size();
  chain.sorted.sorted_times.resize(m);
  for (std::size_t i = 0; i < m; ++i) chain.sorted.sorted_times[i] = sample[chain.sorted.order[i]];
  chain.k_lifetime = chain.k_rank <= m ? chain.sorted.sorted_times[chain.k_rank - 1]
                                       : std::numeric_limits<double>::infinity();
  chain.phi.resize(m + 1);
  for (std::size_t i = 0; i <= m; ++i) chain.phi[i] = i < chain.k_rank ? 1 : 0;
  return chain;
}

std::vector<std::size_t> max_spanning_tree(const Network& net, std::span<const double> weights) {
  KstWorkspace ws;
  const auto t = ws.max_spanning_tree(net, weights);
  return {t.begin(), t.end()};
}

std::vector<std::size_t> prune_to_terminals(const Network& net,
                                            std::span<const std::size_t> tree) {
  KstWorkspace ws;
  const auto t = ws.prune_to_terminals(net, tree);
  return {t.begin(), t.end()};
}

KTerminalLifetime k_lifetime(const Network& net, std::span<const double> weights) {
  KstWorkspace ws;
  KTerminalLifetime out;
  out.edge = ws.bottleneck_edge(net, weights);
  if (out.edge == npos) return out;
  out.time = weights[out.edge];
  // Position in ascending (weight, index) order.
  out.rank = 1;
  for (std::size_t e = 0; e < weights.size(); ++e)
    if (weights[e] < out.time || (weights[e] == out.time && e < out.edge)) ++out.rank;
  return out;
}

StateChain build_chain(const Network& net, std::span<const double> sample) {
  KstWorkspace ws;
  return ws.build_chain(net, sample);
}

}  // namespace netrel
