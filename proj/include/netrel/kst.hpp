#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "netrel/network.hpp"

namespace netrel {

// Component indices ordered by ascending lifetime, ties by ascending index.
struct SortedSample {
  std::vector<std::uint32_t> order;
  std::vector<double> sorted_times;
};

SortedSample sort_sample(std::span<const double> times);

// The M+1 state vectors obtained by failing the components of one lifetime
// sample in ascending lifetime order, with their structure-function values.
// Chain position i (0-based) has the i shortest-lived components failed.
struct StateChain {
  SortedSample sorted;
  double k_lifetime = 0.0;
  // 1-based position in `sorted` of the component whose failure disconnects
  // the terminals; M + 1 when no failure can (only possible under node
  // failure with a path of reliable nodes).
  std::size_t k_rank = 0;
  std::vector<std::uint8_t> phi;

  std::size_t length() const noexcept { return phi.size(); }
  StateVector vector(std::size_t i) const;
  std::vector<StateVector> vectors() const;
};

struct KTerminalLifetime {
  double time = 0.0;
  std::size_t edge = npos;  // bottleneck edge of the pruned tree
  std::size_t rank = 0;     // 1-based position of that edge in ascending weight order
};

// Reusable scratch space for the spanning-tree engine. One per worker.
class KstWorkspace {
 public:
  // Kruskal on descending weight, ties broken by ascending edge index.
  // Returns the tree edges in insertion order. Throws DisconnectedGraph.
  std::span<const std::size_t> max_spanning_tree(const Network& net,
                                                 std::span<const double> weights);

  // Deletes non-terminal leaves until every leaf is a terminal.
  std::span<const std::size_t> prune_to_terminals(const Network& net,
                                                  std::span<const std::size_t> tree);

  // Minimum-weight edge of the pruned tree; ties go to the lowest edge index.
  std::size_t bottleneck_edge(const Network& net, std::span<const double> weights);

  StateChain build_chain(const Network& net, std::span<const double> sample);

  // Chain positions of the sample plus k_rank only; the allocation-free path
  // used by the Monte Carlo estimators. `order` receives the sorted component
  // order.
  std::size_t chain_rank(const Network& net, std::span<const double> sample,
                         std::vector<std::uint32_t>& order);

 private:
  std::vector<std::size_t> edge_order_;
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> tree_;
  std::vector<std::size_t> pruned_;
  std::vector<std::size_t> degree_;
  std::vector<std::size_t> head_;
  std::vector<std::size_t> next_;
  std::vector<std::uint8_t> alive_;
  std::vector<std::uint8_t> terminal_;
  std::vector<std::size_t> stack_;
  std::vector<double> rank_weights_;
  std::vector<std::size_t> rank_;
};

std::vector<std::size_t> max_spanning_tree(const Network& net, std::span<const double> weights);
std::vector<std::size_t> prune_to_terminals(const Network& net,
                                            std::span<const std::size_t> tree);

// K-terminal lifetime for per-edge weights: the smallest weight on the pruned
// maximum spanning tree, which is also the widest-path bottleneck between two
// terminals.
KTerminalLifetime k_lifetime(const Network& net, std::span<const double> weights);

// Labels a whole state chain with one spanning-tree run. Works for both
// failure modes; under node failure the bottleneck is found on the
// transformed edge lifetimes and mapped back to the failing node.
StateChain build_chain(const Network& net, std::span<const double> sample);

}  // namespace netrel
