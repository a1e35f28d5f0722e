#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "netrel/forest.hpp"
#include "netrel/kst.hpp"
#include "netrel/lifetimes.hpp"
#include "netrel/network.hpp"
#include "netrel/signature.hpp"

namespace netrel {

// Zero-valued sizes resolve to network-derived defaults (see resolve()).
struct LearnerConfig {
  std::size_t n_mcs = 0;  // pool samples used; 0 means the whole pool
  std::size_t n_ini = 0;  // 0 means 2 * node count
  std::size_t n_add = 0;  // 0 means 2 (n_v - 2) + 4 n_e
  double delta = 0.005;
  std::size_t ntree = 100;
  std::size_t mtry = 0;  // 0 means all components
  double band_low = 0.4;
  double band_high = 0.6;
  std::size_t consecutive = 2;
  std::size_t max_iterations = 0;  // 0 means no limit
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

std::size_t default_n_ini(const Network& net);
std::size_t default_n_add(const Network& net);

// Fills defaults and checks ranges. Throws InvalidArgument, or PoolTooSmall
// when the pool cannot supply n_mcs samples.
LearnerConfig resolve(const Network& net, LearnerConfig cfg, std::size_t pool_size);

struct IterationRecord {
  std::size_t iteration = 0;
  std::size_t train_size = 0;       // unique labelled vectors
  std::size_t labeled_samples = 0;  // spanning-tree runs so far
  std::size_t pool_samples = 0;
  std::size_t n_rho = 0;
  double ratio = 0.0;
  bool passed = false;
  std::vector<std::size_t> batch;  // samples labelled after this check
};

struct AuditLog {
  std::string method;
  std::size_t n_mcs = 0;
  std::size_t n_ini = 0;
  std::size_t n_add = 0;
  double delta = 0.0;
  std::size_t ntree = 0;
  std::size_t mtry = 0;
  std::uint64_t seed = 0;
  std::vector<IterationRecord> iterations;
  std::size_t kst_runs = 0;
  std::string stop_reason;
};

// Pool bookkeeping for the active-learning loop. Every chain vector of every
// pool sample is interned once; predictions are made per distinct vector and
// counted per occurrence.
class LearnerState {
 public:
  LearnerState(const Network& net, const SamplePool& pool, const LearnerConfig& cfg);

  const Network& network() const noexcept { return *net_; }
  const LearnerConfig& config() const noexcept { return cfg_; }
  std::size_t dimension() const noexcept { return m_; }
  std::size_t sample_count() const noexcept { return n_; }
  std::size_t pool_size() const noexcept { return pool_count_; }
  bool in_pool(std::size_t j) const { return in_pool_[j] != 0; }
  bool labeled(std::size_t j) const { return k_rank_[j] != npos; }
  std::size_t kst_runs() const noexcept { return kst_runs_; }
  const TrainingSet& train() const noexcept { return train_; }

  // Interned vector id of chain position i of sample j.
  std::uint32_t vector_id(std::size_t j, std::size_t i) const { return vids_[j * (m_ + 1) + i]; }
  const StateVector& vector(std::uint32_t vid) const { return vectors_[vid]; }
  bool vector_in_train(std::uint32_t vid) const { return in_train_[vid] != 0; }

  // Labels the given pool samples with one spanning-tree run each and moves
  // their vectors from the pool into the training set.
  void enrich(std::span<const std::size_t> ids);

  // Predicts every distinct vector still referenced by the pool.
  void predict(const Forest& forest);
  bool has_predictions() const noexcept { return predicted_; }
  const Prediction& prediction(std::uint32_t vid) const { return predictions_[vid]; }

  // Test hook: overrides the prediction of one vector.
  void set_prediction(std::uint32_t vid, const Prediction& p);

  // Pool vectors (with multiplicity, all M+1 chain positions) whose rho lies
  // in the configured band.
  std::size_t uncertainty_count() const;

  // Entropy over the sample's chain vectors not yet in train, and the
  // duplicate weight 1 / max(repeats, 1).
  std::pair<double, double> entropy_and_weight(std::size_t j) const;

  // Highest w * E first, ties by ascending sample id.
  std::vector<std::size_t> select_batch(std::size_t n_add) const;

  // Labelled samples use their true chain labels; pool vectors use the train
  // label when known and the forest label otherwise.
  SignatureTable accumulate() const;

 private:
  void require_predictions() const;

  const Network* net_;
  LearnerConfig cfg_;
  const SamplePool* pool_;
  std::size_t m_ = 0;
  std::size_t n_ = 0;
  std::vector<std::uint32_t> orders_;  // n x m failure orders
  std::vector<std::uint32_t> vids_;    // n x (m + 1)
  std::vector<std::size_t> k_rank_;    // npos until labelled
  std::vector<std::uint8_t> in_pool_;
  std::size_t pool_count_ = 0;
  std::vector<StateVector> vectors_;
  std::unordered_map<StateVector, std::uint32_t, StateVectorHash> index_;
  std::vector<std::uint8_t> in_train_;
  std::vector<std::uint32_t> pool_refs_;  // pool occurrences per vector
  std::vector<Prediction> predictions_;
  bool predicted_ = false;
  TrainingSet train_;
  std::size_t kst_runs_ = 0;
};

// Delayed-judgment stop rule over successive checks.
class StopRule {
 public:
  StopRule(double delta, std::size_t consecutive) : delta_(delta), needed_(consecutive) {}

  static double ratio(std::size_t n_rho, std::size_t pool_samples, std::size_t dimension);

  // Records one check; true when the last `consecutive` checks all passed.
  bool check(double ratio);
  bool last_passed() const noexcept { return streak_ > 0; }
  std::size_t streak() const noexcept { return streak_; }

 private:
  double delta_;
  std::size_t needed_;
  std::size_t streak_ = 0;
};

struct LearnerResult {
  SignatureTable table;
  Forest forest;
  AuditLog audit;
};

LearnerResult run_al_kst(const Network& net, const SamplePool& pool, const LearnerConfig& cfg);

// Labels n_train uniformly chosen samples, trains once and predicts the rest.
LearnerResult run_rf_kst(const Network& net, const SamplePool& pool, const LearnerConfig& cfg,
                         std::size_t n_train);

// Signature of a variant network from a forest trained on the original, with
// no structure-function evaluations. pool samples are over the variant's
// components.
SignatureTable variant_signature(const Network& original, const Forest& forest,
                                 const Variant& variant, const SamplePool& pool,
                                 unsigned threads = 0);

ReliabilityCurve predict_variant(const Network& original, const Forest& forest,
                                 const Variant& variant, const SamplePool& pool,
                                 std::span<const LifetimeDistribution> dists,
                                 std::span<const double> grid, unsigned threads = 0);

}  // namespace netrel
