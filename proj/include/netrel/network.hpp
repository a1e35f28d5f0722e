#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace netrel {

enum class FailureMode { Node, Edge };

std::string_view to_string(FailureMode mode);

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

/// Binary component state vector. Position i holds the state of component i in
/// the owning network's canonical order; 1 means the component works.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(std::size_t size, bool value = false);

  static StateVector from_string(std::string_view bits);

  std::size_t size() const noexcept { return size_; }
  bool test(std::size_t i) const noexcept {
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }
  void set(std::size_t i, bool value = true) noexcept {
    const std::uint64_t bit = std::uint64_t{1} << (i & 63);
    if (value)
      words_[i >> 6] |= bit;
    else
      words_[i >> 6] &= ~bit;
  }
  std::size_t count() const noexcept;
  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::size_t hash() const noexcept;
  std::string to_string() const;

  friend bool operator==(const StateVector&, const StateVector&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

struct StateVectorHash {
  std::size_t operator()(const StateVector& x) const noexcept { return x.hash(); }
};

/// Number of working components per class, (l_1, ..., l_S).
struct CombinationKey {
  std::vector<std::size_t> counts;
  friend bool operator==(const CombinationKey&, const CombinationKey&) = default;
};

struct ClassMembers {
  int id = 0;
  std::vector<std::string> members;
};

/// Raw, name-based network description as read from a network file.
struct NetworkDescription {
  std::string name;
  FailureMode failure_mode = FailureMode::Edge;
  std::vector<std::string> nodes;
  std::vector<std::pair<std::string, std::string>> edges;
  std::vector<std::string> terminals;
  std::vector<std::string> reliable_nodes;
  std::vector<ClassMembers> classes;
};

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const noexcept { return violations.empty(); }
};

// Undirected graph with terminals, a failure mode and a class assignment for
// every unreliable component. Immutable once built.
//
// Components are ordered canonically: edges in input order under edge failure,
// class-assigned non-terminal nodes in input order under node failure. Edge
// components are named "e1", "e2", ... (1-based input position).
class Network {
 public:
  // Resolves names to indices. Throws Error(InvalidNetwork) when an edge,
  // terminal or class member references an unknown id. Softer invariant
  // violations are left for validate().
  static Network build(NetworkDescription description);

  const NetworkDescription& description() const noexcept { return desc_; }
  const std::string& name() const noexcept { return desc_.name; }
  FailureMode failure_mode() const noexcept { return desc_.failure_mode; }

  std::size_t node_count() const noexcept { return desc_.nodes.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const std::size_t> terminals() const noexcept { return terminals_; }
  const std::string& node_name(std::size_t node) const { return desc_.nodes[node]; }
  std::optional<std::size_t> find_node(std::string_view id) const;

  // (neighbour, edge index) pairs per node.
  const std::vector<std::vector<std::pair<std::size_t, std::size_t>>>& adjacency()
      const noexcept {
    return adjacency_;
  }

  std::size_t component_count() const noexcept { return component_index_.size(); }
  std::size_t class_count() const noexcept { return class_ids_.size(); }
  std::span<const int> class_ids() const noexcept { return class_ids_; }
  std::span<const std::size_t> class_sizes() const noexcept { return class_sizes_; }

  // Dense class index (0-based, ascending external id) or -1 when unassigned.
  int component_class(std::size_t component) const { return component_class_[component]; }
  std::span<const int> component_classes() const noexcept { return component_class_; }

  // Node index (node failure) or edge index (edge failure) of a component.
  std::size_t component_element(std::size_t component) const {
    return component_index_[component];
  }
  std::string component_id(std::size_t component) const;
  std::optional<std::size_t> find_component(std::string_view id) const;

  // Component index of a node under node failure; npos for reliable nodes.
  std::size_t node_component(std::size_t node) const { return node_component_[node]; }

  // Hash over topology, terminals, failure mode, component order and classes.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  std::span<const std::string> structural_issues() const noexcept { return issues_; }

 private:
  NetworkDescription desc_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> terminals_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency_;
  std::vector<std::size_t> component_index_;
  std::vector<int> component_class_;
  std::vector<int> class_ids_;
  std::vector<std::size_t> class_sizes_;
  std::vector<std::size_t> node_component_;
  std::vector<std::string> issues_;
  std::uint64_t fingerprint_ = 0;
};

ValidationReport validate(const Network& net);

// Throws Error(InvalidNetwork) listing every violation if validate() fails.
void require_valid(const Network& net);

// True when every terminal is reachable from the first terminal through edges
// with edge_works[e] != 0 and nodes with node_works[v] != 0. An empty span
// means "all working".
bool terminals_connected(const Network& net, std::span<const std::uint8_t> edge_works,
                         std::span<const std::uint8_t> node_works);

// Structure function by direct search on the working subgraph. Under node
// failure a failed node takes its incident edges with it.
bool structure_function(const Network& net, const StateVector& x);

CombinationKey combination_of(const Network& net, const StateVector& x);

/// Embeds variant state vectors into the original component space. Removed
/// positions are fixed to 0 (failed).
class Mask {
 public:
  Mask() = default;
  Mask(std::size_t original_size, std::vector<std::size_t> kept);

  static Mask identity(std::size_t size);

  std::size_t original_size() const noexcept { return original_size_; }
  std::size_t variant_size() const noexcept { return kept_.size(); }
  // Original position of each variant position.
  std::span<const std::size_t> kept() const noexcept { return kept_; }
  std::vector<std::size_t> removed() const;

  StateVector embed(const StateVector& variant) const;

 private:
  std::size_t original_size_ = 0;
  std::vector<std::size_t> kept_;
};

struct Variant {
  Network network;
  Mask mask;
};

// Deletes the given components (edges, or nodes with their incident edges).
// Class ids are kept even when a class loses all of its members.
Variant derive_variant(const Network& net, std::span<const std::size_t> removed);
Variant derive_variant(const Network& net, std::span<const std::string> removed_ids);

}  // namespace netrel
