#include <algorithm>
#include <random>
#include <cmath>

#include "doctest.h"
#include "netrel/errors.hpp"
#include "netrel/kst.hpp"
#include "support/oracles.hpp"

using namespace netrel;

TEST_CASE("pruning the bridge tree drops the hanging edge") {
  const auto f = oracle::bridge();
  const std::size_t tree[] = {0, 3, 4};
  const auto pruned = prune_to_terminals(f.network, tree);
  std::vector<std::size_t> got(pruned.begin(), pruned.end());
  std::sort(got.begin(), got.end());
  CHECK(got == std::vector<std::size_t>{0, 3});
}

TEST_CASE("pruning a path between two leaf terminals keeps it whole") {
  const auto f = oracle::series2();
  const std::size_t tree[] = {0, 1};
  CHECK(prune_to_terminals(f.network, tree).size() == 2);
}

TEST_CASE("star with a terminal at the centre keeps one spoke") {
  NetworkDescription d;
  d.nodes = {"c", "x", "y", "t"};
  d.edges = {{"c", "x"}, {"c", "y"}, {"c", "t"}};
  d.terminals = {"c", "t"};
  d.classes = {{1, {"e1", "e2", "e3"}}};
  const auto net = Network::build(d);
  const std::size_t tree[] = {0, 1, 2};
  const auto pruned = prune_to_terminals(net, tree);
  REQUIRE(pruned.size() == 1);
  CHECK(pruned[0] == 2);
}

TEST_CASE("maximum spanning tree and k-terminal lifetime on the bridge") {
  const auto f = oracle::bridge();
  const std::vector<double> w = {5, 1, 2, 4, 3};
  auto tree = max_spanning_tree(f.network, w);
  std::sort(tree.begin(), tree.end());
  CHECK(tree == std::vector<std::size_t>{0, 3, 4});
  const auto k = k_lifetime(f.network, w);
  CHECK(k.time == 4.0);
  CHECK(k.edge == 3);
  CHECK(k.rank == 4);
  CHECK(k.time == oracle::widest_path(oracle::graph_of(f.network), w));
}

TEST_CASE("series system fails at its first failure") {
  const auto f = oracle::series2();
  const std::vector<double> w = {2, 7};
  const auto k = k_lifetime(f.network, w);
  CHECK(k.time == 2.0);
  CHECK(k.rank == 1);
}

TEST_CASE("disconnected graph is rejected") {
  NetworkDescription d;
  d.nodes = {"s", "a", "t", "z"};
  d.edges = {{"s", "a"}, {"a", "t"}};
  d.terminals = {"s", "t"};
  d.classes = {{1, {"e1", "e2"}}};
  const auto net = Network::build(d);
  const std::vector<double> w = {1, 2};
  CHECK_THROWS_AS(max_spanning_tree(net, w), Error);
}

TEST_CASE("nine-edge failure order: fifth failure disconnects") {
  // e8 is the only link into t's side once e4, e5, e9 and e7 are gone.
  NetworkDescription d;
  d.nodes = {"s", "a", "b", "c", "t"};
  d.edges = {{"s", "a"}, {"s", "b"}, {"a", "b"}, {"a", "c"}, {"b", "c"},
             {"s", "c"}, {"a", "t"}, {"c", "t"}, {"b", "t"}};
  d.terminals = {"s", "t"};
  d.classes = {{1, {"e1", "e2", "e3", "e4", "e5", "e6", "e7", "e8", "e9"}}};
  const auto net = Network::build(d);
  // t4 < t5 < t9 < t7 < t8 < t1 < t2 < t3 < t6
  std::vector<double> t(9);
  const int order[] = {4, 5, 9, 7, 8, 1, 2, 3, 6};
  for (int i = 0; i < 9; ++i) t[order[i] - 1] = i + 1.0;
  const auto chain = build_chain(net, t);
  CHECK(chain.k_lifetime == t[7]);
  CHECK(chain.k_rank == 5);
  CHECK(chain.phi == std::vector<std::uint8_t>{1, 1, 1, 1, 1, 0, 0, 0, 0, 0});
  CHECK(chain.vector(1).to_string() == "111011111");
}

TEST_CASE("three-edge series chain") {
  NetworkDescription d;
  d.nodes = {"s", "a", "b", "t"};
  d.edges = {{"s", "a"}, {"a", "b"}, {"b", "t"}};
  d.terminals = {"s", "t"};
  d.classes = {{1, {"e1", "e2", "e3"}}};
  const auto net = Network::build(d);
  const std::vector<double> t = {2.5, 0.7, 1.4};
  const auto chain = build_chain(net, t);
  const auto v = chain.vectors();
  CHECK(v[0].to_string() == "111");
  CHECK(v[1].to_string() == "101");
  CHECK(v[2].to_string() == "100");
  CHECK(v[3].to_string() == "000");
  CHECK(chain.phi == std::vector<std::uint8_t>{1, 0, 0, 0});
  CHECK(chain.k_lifetime == 0.7);
}

TEST_CASE("tied lifetimes follow the index tie-break consistently") {
  const auto f = oracle::bridge();
  const std::vector<double> t = {1, 1, 1, 1, 1};
  const auto chain = build_chain(f.network, t);
  CHECK(chain.sorted.order == std::vector<std::uint32_t>{0, 1, 2, 3, 4});
  for (std::size_t i = 0; i < chain.length(); ++i) {
    const auto x = chain.vector(i);
    std::vector<std::uint8_t> b(5);
    for (std::size_t c = 0; c < 5; ++c) b[c] = x.test(c);
    CHECK((chain.phi[i] != 0) == oracle::phi(f.network, b));
  }
}

TEST_CASE("node failure with a reliable path never disconnects") {
  NetworkDescription d;
  d.failure_mode = FailureMode::Node;
  d.nodes = {"s", "a", "r", "t"};
  d.edges = {{"s", "a"}, {"a", "t"}, {"s", "r"}, {"r", "t"}};
  d.terminals = {"s", "t"};
  d.classes = {{1, {"a"}}};
  const auto net = Network::build(d);
  const std::vector<double> t = {0.3};
  const auto chain = build_chain(net, t);
  CHECK(chain.k_rank == 2);
  CHECK(std::isinf(chain.k_lifetime));
  CHECK(chain.phi == std::vector<std::uint8_t>{1, 1});
}

TEST_CASE("random graphs: bottleneck identity, pruned-tree shape, chain labels") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int graphs = 0;
  while (graphs < 300) {
    oracle::RandomSpec spec;
    spec.max_components = 14;
    spec.mode = graphs % 3 == 0 ? FailureMode::Node : FailureMode::Edge;
    const auto f = oracle::random_network(rng, spec);
    if (!validate(f.network).ok()) continue;
    ++graphs;
    const auto& net = f.network;
    std::vector<double> w(net.edge_count());
    for (auto& x : w) x = unif(rng);
    CHECK(k_lifetime(net, w).time == oracle::widest_path(oracle::graph_of(net), w));

    const auto tree = max_spanning_tree(net, w);
    CHECK(tree.size() == net.node_count() - 1);
    const auto pruned = prune_to_terminals(net, tree);
    std::vector<int> degree(net.node_count(), 0);
    std::vector<std::uint8_t> works(net.edge_count(), 0);
    for (auto e : pruned) {
      ++degree[net.edges()[e].u];
      ++degree[net.edges()[e].v];
      works[e] = 1;
    }
    CHECK(oracle::connected(oracle::graph_of(net), works));
    for (std::size_t v = 0; v < net.node_count(); ++v)
      if (degree[v] == 1) CHECK((v == net.terminals()[0] || v == net.terminals()[1]));

    // Removing components in order, the first disconnecting removal sits at k_rank.
    const auto pool = sample_pool(net, f.distributions, 5, graphs, 1);
    for (std::size_t j = 0; j < pool.size(); ++j) {
      const auto chain = build_chain(net, pool.sample(j));
      std::vector<std::uint8_t> x(net.component_count(), 1);
      std::size_t first = net.component_count() + 1;
      for (std::size_t i = 0; i < net.component_count(); ++i) {
        x[chain.sorted.order[i]] = 0;
        if (!oracle::phi(net, x)) {
          first = i + 1;
          break;
        }
      }
      CHECK(first == chain.k_rank);
    }
  }
}

TEST_CASE("equal weights on a triangle keep the two lowest-indexed edges") {
  NetworkDescription d;
  d.nodes = {"s", "a", "t"};
  d.edges = {{"s", "a"}, {"a", "t"}, {"s", "t"}};
  d.terminals = {"s", "t"};
  d.classes = {{1, {"e1", "e2", "e3"}}};
  const auto net = Network::build(d);
  const std::vector<double> w = {1, 1, 1};
  auto tree = max_spanning_tree(net, w);
  std::sort(tree.begin(), tree.end());
  CHECK(tree == std::vector<std::size_t>{0, 1});
  const auto path = max_spanning_tree(oracle::series2().network, std::vector<double>{3, 1});
  CHECK(path.size() == 2);
}
