#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "netrel/network.hpp"

namespace netrel {

// Deduplicated labelled state vectors. A vector can only ever carry one label
// because the structure function is deterministic; add() throws on conflict.
class TrainingSet {
 public:
  explicit TrainingSet(std::size_t dimension = 0) : dimension_(dimension) {}

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return inputs_.size(); }
  bool empty() const noexcept { return inputs_.empty(); }

  // Returns true when x was not present before.
  bool add(const StateVector& x, bool label);
  bool contains(const StateVector& x) const { return index_.count(x) != 0; }
  std::optional<bool> label_of(const StateVector& x) const;

  const std::vector<StateVector>& inputs() const noexcept { return inputs_; }
  const std::vector<std::uint8_t>& labels() const noexcept { return labels_; }

 private:
  std::size_t dimension_;
  std::vector<StateVector> inputs_;
  std::vector<std::uint8_t> labels_;
  std::unordered_map<StateVector, std::size_t, StateVectorHash> index_;
};

class DecisionTree {
 public:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    std::uint32_t left = 0;     // child for bit == 0
    std::uint32_t right = 0;    // child for bit == 1
    std::uint8_t label = 0;     // leaf prediction
  };

  DecisionTree() = default;
  explicit DecisionTree(std::vector<Node> nodes);

  // Grows a CART tree on rows with weight > 0. At every node up to `mtry`
  // non-constant features are examined in random order and the split with the
  // lowest weighted Gini impurity wins (ties to the lower feature index).
  // Growth stops when a node is pure or no feature varies within it.
  static DecisionTree grow(const TrainingSet& data, std::span<const std::uint32_t> weights,
                           std::size_t mtry, std::uint64_t seed);

  bool predict(std::span<const std::uint64_t> words) const noexcept {
    std::uint32_t n = 0;
    while (nodes_[n].feature >= 0) {
      const auto f = static_cast<std::uint32_t>(nodes_[n].feature);
      n = ((words[f >> 6] >> (f & 63)) & 1u) ? nodes_[n].right : nodes_[n].left;
    }
    return nodes_[n].label != 0;
  }
  bool predict(const StateVector& x) const noexcept { return predict(x.words()); }

  std::span<const Node> nodes() const noexcept { return nodes_; }
  std::size_t depth() const;

 private:
  std::vector<Node> nodes_;
};

struct ForestOptions {
  std::size_t ntree = 100;
  std::size_t mtry = 0;  // 0 means "all features"
  std::uint64_t seed = 0;
  bool bootstrap = true;
  unsigned threads = 0;
};

struct Prediction {
  bool label = false;
  double rho = 0.0;    // fraction of trees voting 0
  double sigma = 0.0;  // fraction of trees voting 1
};

// Majority label from a vote count; an even split predicts 0.
Prediction prediction_from_votes(std::size_t ones, std::size_t ntree);

class Forest {
 public:
  Forest() = default;
  Forest(std::size_t dimension, std::size_t mtry, std::uint64_t seed,
         std::vector<DecisionTree> trees);

  // Each tree sees a size-N bootstrap resample (unless disabled) drawn from a
  // generator keyed by (seed, tree index). Throws EmptyTrainingSet.
  static Forest train(const TrainingSet& data, const ForestOptions& options);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t ntree() const noexcept { return trees_.size(); }
  std::size_t mtry() const noexcept { return mtry_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::span<const DecisionTree> trees() const noexcept { return trees_; }

  std::size_t votes_for_one(std::span<const std::uint64_t> words) const noexcept;
  Prediction predict(const StateVector& x) const;
  std::vector<Prediction> predict_batch(std::span<const StateVector> xs,
                                        unsigned threads = 0) const;

 private:
  std::size_t dimension_ = 0;
  std::size_t mtry_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<DecisionTree> trees_;
};

}  // namespace netrel
