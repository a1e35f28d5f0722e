#include "netrel/forest.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <random>

#include "netrel/errors.hpp"
#include "netrel/hash.hpp"
#include "netrel/parallel.hpp"

namespace netrel {

bool TrainingSet::add(const StateVector& x, bool label) {
  if (x.size() != dimension_)
    throw Error(ErrorKind::DimensionMismatch, "training vector has the wrong dimension");
  auto [it, inserted] = index_.emplace(x, inputs_.size());
  if (!inserted) {
    if (labels_[it->second] != static_cast<std::uint8_t>(label))
      throw Error(ErrorKind::InvalidArgument,
                  "conflicting labels for state vector " + x.to_string());
    return false;
  }
  inputs_.push_back(x);
  labels_.push_back(label ? 1 : 0);
  return true;
}

std::optional<bool> TrainingSet::label_of(const StateVector& x) const {
  auto it = index_.find(x);
  if (it == index_.end()) return std::nullopt;
  return labels_[it->second] != 0;
}

DecisionTree::DecisionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw Error(ErrorKind::InvalidArgument, "tree has no nodes");
  for (const auto& n : nodes_) {
    if (n.feature >= 0 && (n.left >= nodes_.size() || n.right >= nodes_.size()))
      throw Error(ErrorKind::Parse, "tree child index out of range");
  }
}

std::size_t DecisionTree::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0u, 0}};
  while (!stack.empty()) {
    auto [n, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (nodes_[n].feature >= 0) {
      stack.emplace_back(nodes_[n].left, d + 1);
      stack.emplace_back(nodes_[n].right, d + 1);
    }
  }
  return best;
}

namespace {

struct Task {
  std::size_t begin;
  std::size_t end;
  std::uint32_t node;
};

}  // namespace

DecisionTree DecisionTree::grow(const TrainingSet& data, std::span<const std::uint32_t> weights,
                                std::size_t mtry, std::uint64_t seed) {
  const std::size_t m = data.dimension();
  if (mtry == 0 || mtry > m) mtry = m;
  std::mt19937_64 rng(seed);

  std::vector<std::uint32_t> rows;
  for (std::size_t r = 0; r < data.size(); ++r)
    if (weights[r] > 0) rows.push_back(static_cast<std::uint32_t>(r));

  const auto& inputs = data.inputs();
  const auto& labels = data.labels();
  std::vector<Node> nodes(1);
  std::vector<Task> stack{{0, rows.size(), 0}};
  std::vector<double> ones_by_label[2] = {std::vector<double>(m), std::vector<double>(m)};
  std::vector<std::uint32_t> features(m);

  while (!stack.empty()) {
    const Task task = stack.back();
    stack.pop_back();

    double total[2] = {0.0, 0.0};
    std::fill(ones_by_label[0].begin(), ones_by_label[0].end(), 0.0);
    std::fill(ones_by_label[1].begin(), ones_by_label[1].end(), 0.0);
    for (std::size_t i = task.begin; i < task.end; ++i) {
      const auto r = rows[i];
      const double w = weights[r];
      const int y = labels[r];
      total[y] += w;
      auto& acc = ones_by_label[y];
      const auto words = inputs[r].words();
      for (std::size_t k = 0; k < words.size(); ++k) {
        for (std::uint64_t bits = words[k]; bits != 0; bits &= bits - 1)
          acc[k * 64 + static_cast<std::size_t>(std::countr_zero(bits))] += w;
      }
    }
    Node& node = nodes[task.node];
    node.label = total[1] > total[0] ? 1 : 0;
    if (total[0] == 0.0 || total[1] == 0.0) continue;

    const double n = total[0] + total[1];
    std::iota(features.begin(), features.end(), 0u);
    std::size_t examined = 0;
    int best = -1;
    double best_impurity = 0.0;
    for (std::size_t i = 0; i < m && examined < mtry; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, m - 1);
      std::swap(features[i], features[pick(rng)]);
      const std::uint32_t f = features[i];
      const double right1 = ones_by_label[1][f];
      const double right0 = ones_by_label[0][f];
      const double right = right0 + right1;
      if (right == 0.0 || right == n) continue;  // constant in this node
      ++examined;
      const double left1 = total[1] - right1;
      const double left0 = total[0] - right0;
      const double left = n - right;
      const double impurity = (left - (left0 * left0 + left1 * left1) / left) +
                              (right - (right0 * right0 + right1 * right1) / right);
      if (best < 0 || impurity < best_impurity ||
          (impurity == best_impurity && static_cast<int>(f) < best)) {
        best = static_cast<int>(f);
        best_impurity = impurity;
      }
    }
    if (best < 0) continue;

    const auto f = static_cast<std::size_t>(best);
    auto mid = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(task.begin),
                              rows.begin() + static_cast<std::ptrdiff_t>(task.end),
                              [&](std::uint32_t r) { return !inputs[r].test(f); });
    const auto split = static_cast<std::size_t>(mid - rows.begin());
    const auto left_id = static_cast<std::uint32_t>(nodes.size());
    const auto right_id = left_id + 1;
    nodes[task.node].feature = best;
    nodes[task.node].left = left_id;
    nodes[task.node].right = right_id;
    nodes.emplace_back();
    nodes.emplace_back();
    stack.push_back({split, task.end, right_id});
    stack.push_back({task.begin, split, left_id});
  }
  return DecisionTree(std::move(nodes));
}

Prediction prediction_from_votes(std::size_t ones, std::size_t ntree) {
  Prediction p;
  p.sigma = static_cast<double>(ones) / static_cast<double>(ntree);
  p.rho = 1.0 - p.sigma;
  p.label = 2 * ones > ntree;
  return p;
}

Forest::Forest(std::size_t dimension, std::size_t mtry, std::uint64_t seed,
               std::vector<DecisionTree> trees)
    : dimension_(dimension), mtry_(mtry), seed_(seed), trees_(std::move(trees)) {
  if (trees_.empty()) throw Error(ErrorKind::InvalidArgument, "forest needs at least one tree");
}

Forest Forest::train(const TrainingSet& data, const ForestOptions& options) {
  if (data.empty()) throw Error(ErrorKind::EmptyTrainingSet, "training set is empty");
  if (options.ntree == 0) throw Error(ErrorKind::InvalidArgument, "ntree must be positive");
  const std::size_t mtry =
      options.mtry == 0 ? data.dimension() : std::min(options.mtry, data.dimension());
  std::vector<DecisionTree> trees(options.ntree);
  parallel_for(options.ntree, options.threads, [&](std::size_t t) {
    const std::uint64_t tree_seed = hash_combine(mix64(options.seed), t);
    std::vector<std::uint32_t> weights(data.size(), 1);
    if (options.bootstrap) {
      std::fill(weights.begin(), weights.end(), 0);
      std::mt19937_64 rng(tree_seed);
      std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
      for (std::size_t i = 0; i < data.size(); ++i) ++weights[pick(rng)];
    }
    trees[t] = DecisionTree::grow(data, weights, mtry, mix64(tree_seed));
  });
  return Forest(data.dimension(), mtry, options.seed, std::move(trees));
}

std::size_t Forest::votes_for_one(std::span<const std::uint64_t> words) const noexcept {
  std::size_t ones = 0;
  for (const auto& t : trees_) ones += t.predict(words);
  return ones;
}

Prediction Forest::predict(const StateVector& x) const {
  if (x.size() != dimension_)
    throw Error(ErrorKind::DimensionMismatch,
                "input has dimension " + std::to_string(x.size()) + ", forest expects " +
                    std::to_string(dimension_));
  return prediction_from_votes(votes_for_one(x.words()), trees_.size());
}

std::vector<Prediction> Forest::predict_batch(std::span<const StateVector> xs,
                                              unsigned threads) const {
  for (const auto& x : xs)
    if (x.size() != dimension_)
      throw Error(ErrorKind::DimensionMismatch, "input dimension does not match the forest");
  std::vector<Prediction> out(xs.size());
  parallel_for(xs.size(), threads, [&](std::size_t i) {
    out[i] = prediction_from_votes(votes_for_one(xs[i].words()), trees_.size());
  });
  return out;
}

}  // namespace netrel
