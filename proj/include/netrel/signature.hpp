#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "netrel/kst.hpp"
#include "netrel/lifetimes.hpp"
#include "netrel/network.hpp"

namespace netrel {

enum class Provenance { Exact, Estimated };

// Survival/failure counts and the survival-signature estimate for every
// combination (l_1, ..., l_S). Keys are stored in mixed radix with class 0
// varying slowest.
//
// Combinations that no sample reached are filled by finalize() with the
// midpoint of the coherence bounds implied by visited neighbours (max over
// dominated keys, min over dominating keys) and flagged as filled.
class SignatureTable {
 public:
  struct Entry {
    std::uint64_t n_surv = 0;
    std::uint64_t n_fail = 0;
    double phi = 0.0;
    bool filled = false;
  };

  SignatureTable() = default;
  explicit SignatureTable(std::vector<std::size_t> class_sizes,
                          Provenance provenance = Provenance::Estimated);

  std::size_t size() const noexcept { return entries_.size(); }
  std::span<const std::size_t> class_sizes() const noexcept { return class_sizes_; }
  std::span<const std::size_t> strides() const noexcept { return strides_; }
  Provenance provenance() const noexcept { return provenance_; }

  std::size_t index_of(const CombinationKey& key) const;
  CombinationKey key_of(std::size_t index) const;
  std::size_t full_index() const noexcept { return entries_.empty() ? 0 : entries_.size() - 1; }

  const Entry& entry(std::size_t index) const { return entries_[index]; }
  const Entry& at(const CombinationKey& key) const { return entries_[index_of(key)]; }
  double phi(const CombinationKey& key) const { return at(key).phi; }
  bool visited(std::size_t index) const {
    return entries_[index].n_surv + entries_[index].n_fail > 0;
  }

  void add(std::size_t index, bool survived, std::uint64_t count = 1);

  // Records the M+1 vectors of one chain: `order` is the failure order,
  // classes the dense class per component, positions < k_rank survive.
  void add_chain(std::span<const std::uint32_t> order, std::size_t k_rank,
                 std::span<const int> classes);

  void merge(const SignatureTable& other);

  // Computes phi = n_surv / (n_surv + n_fail) and fills unvisited keys.
  void finalize();

  std::uint64_t total_count() const noexcept;
  std::size_t filled_count() const noexcept;

 private:
  std::vector<std::size_t> class_sizes_;
  std::vector<std::size_t> strides_;
  std::vector<Entry> entries_;
  Provenance provenance_ = Provenance::Estimated;
};

SignatureTable make_table(const Network& net, Provenance provenance = Provenance::Estimated);

// Survival-signature estimate from already built chains.
SignatureTable accumulate(const Network& net, std::span<const StateChain> chains);

// Monte Carlo estimate: one spanning-tree run per pool sample.
SignatureTable mc_kst(const Network& net, const SamplePool& pool, unsigned threads = 0);

inline constexpr std::size_t kDefaultExactLimit = 26;

// Exact signature from all 2^M state vectors, each evaluated by a direct
// connectivity search. Throws ExactIntractable when M > limit.
SignatureTable exact_signature(const Network& net, std::size_t limit = kDefaultExactLimit,
                               unsigned threads = 0);

double binomial_pmf(std::size_t n, std::size_t k, double fail_probability);

double combination_probability(const Network& net, std::span<const LifetimeDistribution> dists,
                               const CombinationKey& key, double t);

struct ReliabilityCurve {
  std::vector<double> grid;
  std::vector<double> values;
};

ReliabilityCurve reliability(const SignatureTable& table,
                             std::span<const LifetimeDistribution> dists,
                             std::span<const double> grid);

inline constexpr std::size_t kDefaultGridPoints = 256;
inline constexpr double kDefaultGridCoverage = 0.999;

// Uniform grid on [0, t_max], t_max the earliest time at which some class
// with members reaches the coverage probability.
std::vector<double> default_grid(const Network& net, std::span<const LifetimeDistribution> dists,
                                 std::size_t points = kDefaultGridPoints,
                                 double coverage = kDefaultGridCoverage);

inline constexpr double kRelativeErrorFloor = 1e-3;

struct RelativeError {
  std::vector<double> pointwise;  // NaN where the true value is 0
  double max = 0.0;               // over points with truth >= floor
  std::size_t counted = 0;
};

RelativeError relative_error(const ReliabilityCurve& truth, const ReliabilityCurve& approx,
                             double floor = kRelativeErrorFloor);

}  // namespace netrel
