#include "netrel/signature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "netrel/errors.hpp"
#include "netrel/parallel.hpp"

namespace netrel {

SignatureTable::SignatureTable(std::vector<std::size_t> class_sizes, Provenance provenance)
    : class_sizes_(std::move(class_sizes)), provenance_(provenance) {
  strides_.assign(class_sizes_.size(), 1);
  std::size_t n = 1;
  for (std::size_t s = class_sizes_.size(); s-- > 0;) {
    strides_[s] = n;
    n *= class_sizes_[s] + 1;
  }
  entries_.resize(n);
}

std::size_t SignatureTable::index_of(const CombinationKey& key) const {
  if (key.counts.size() != class_sizes_.size())
    throw Error(ErrorKind::LengthMismatch, "combination key has the wrong number of classes");
  std::size_t idx = 0;
  for (std::size_t s = 0; s < key.counts.size(); ++s) {
    if (key.counts[s] > class_sizes_[s])
      throw Error(ErrorKind::InvalidArgument, "combination count exceeds class size");
    idx += key.counts[s] * strides_[s];
  }
  return idx;
}

CombinationKey SignatureTable::key_of(std::size_t index) const {
  CombinationKey key{std::vector<std::size_t>(class_sizes_.size())};
  for (std::size_t s = 0; s < class_sizes_.size(); ++s) {
    key.counts[s] = index / strides_[s];
    index %= strides_[s];
  }
  return key;
}

void SignatureTable::add(std::size_t index, bool survived, std::uint64_t count) {
  auto& e = entries_[index];
  (survived ? e.n_surv : e.n_fail) += count;
}

void SignatureTable::add_chain(std::span<const std::uint32_t> order, std::size_t k_rank,
                               std::span<const int> classes) {
  std::size_t idx = full_index();
  for (std::size_t i = 0; i <= order.size(); ++i) {
    add(idx, i < k_rank);
    if (i == order.size()) break;
    const int s = classes[order[i]];
    if (s >= 0) idx -= strides_[static_cast<std::size_t>(s)];
  }
}

void SignatureTable::merge(const SignatureTable& other) {
  if (other.class_sizes_ != class_sizes_)
    throw Error(ErrorKind::DimensionMismatch, "cannot merge tables over different classes");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    entries_[i].n_surv += other.entries_[i].n_surv;
    entries_[i].n_fail += other.entries_[i].n_fail;
  }
}

void SignatureTable::finalize() {
  std::vector<std::size_t> unvisited;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto& e = entries_[i];
    const auto n = e.n_surv + e.n_fail;
    e.filled = n == 0;
    if (n == 0)
      unvisited.push_back(i);
    else
      e.phi = static_cast<double>(e.n_surv) / static_cast<double>(n);
  }
  if (unvisited.empty()) return;

  std::vector<CombinationKey> keys(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) keys[i] = key_of(i);
  auto dominates = [](const CombinationKey& a, const CombinationKey& b) {
    for (std::size_t s = 0; s < a.counts.size(); ++s)
      if (a.counts[s] < b.counts[s]) return false;
    return true;
  };
  for (auto u : unvisited) {
    double lower = 0.0;
    double upper = 1.0;
    for (std::size_t j = 0; j < entries_.size(); ++j) {
      if (entries_[j].filled) continue;
      if (dominates(keys[u], keys[j])) lower = std::max(lower, entries_[j].phi);
      if (dominates(keys[j], keys[u])) upper = std::min(upper, entries_[j].phi);
    }
    entries_[u].phi = 0.5 * (lower + upper);
  }
}

std::uint64_t SignatureTable::total_count() const noexcept {
  std::uint64_t n = 0;
  for (const auto& e : entries_) n += e.n_surv + e.n_fail;
  return n;
}

std::size_t SignatureTable::filled_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](const Entry& e) { return e.filled; }));
}

SignatureTable make_table(const Network& net, Provenance provenance) {
  return SignatureTable({net.class_sizes().begin(), net.class_sizes().end()}, provenance);
}

SignatureTable accumulate(const Network& net, std::span<const StateChain> chains) {
  auto table = make_table(net);
  for (const auto& c : chains) {
    if (c.sorted.order.size() != net.component_count())
      throw Error(ErrorKind::LengthMismatch, "chain was built for a different network");
    table.add_chain(c.sorted.order, c.k_rank, net.component_classes());
  }
  table.finalize();
  return table;
}

SignatureTable mc_kst(const Network& net, const SamplePool& pool, unsigned threads) {
  if (pool.components() != net.component_count())
    throw Error(ErrorKind::DimensionMismatch, "pool dimension does not match M");
  threads = resolve_threads(threads);
  std::vector<SignatureTable> partial(std::min<std::size_t>(threads, std::max<std::size_t>(pool.size(), 1)),
                                      make_table(net));
  parallel_chunks(pool.size(), threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    KstWorkspace ws;
    std::vector<std::uint32_t> order;
    auto& table = partial[chunk];
    for (std::size_t j = begin; j < end; ++j) {
      const std::size_t k = ws.chain_rank(net, pool.sample(j), order);
      table.add_chain(order, k, net.component_classes());
    }
  });
  auto table = make_table(net);
  for (const auto& p : partial) table.merge(p);
  table.finalize();
  return table;
}

SignatureTable exact_signature(const Network& net, std::size_t limit, unsigned threads) {
  const std::size_t m = net.component_count();
  if (m > limit || m >= 63)
    throw Error(ErrorKind::ExactIntractable,
                "exact enumeration needs 2^" + std::to_string(m) +
                    " evaluations; limit is M <= " + std::to_string(limit));
  const std::uint64_t states = std::uint64_t{1} << m;
  threads = resolve_threads(threads);
  // Fixed block count so the partition never depends on the worker count.
  const std::size_t blocks = static_cast<std::size_t>(std::min<std::uint64_t>(states, 64));
  std::vector<SignatureTable> partial(blocks, make_table(net, Provenance::Exact));
  const bool node_mode = net.failure_mode() == FailureMode::Node;
  const auto strides = partial[0].strides();
  std::vector<std::size_t> comp_stride(m, 0);
  for (std::size_t c = 0; c < m; ++c)
    if (net.component_class(c) >= 0)
      comp_stride[c] = strides[static_cast<std::size_t>(net.component_class(c))];

  parallel_for(blocks, threads, [&](std::size_t b) {
    const std::uint64_t begin = states * b / blocks;
    const std::uint64_t end = states * (b + 1) / blocks;
    std::vector<std::uint8_t> edge_works(net.edge_count(), 1);
    std::vector<std::uint8_t> node_works(net.node_count(), 1);
    auto& table = partial[b];
    for (std::uint64_t x = begin; x < end; ++x) {
      std::size_t idx = 0;
      for (std::size_t c = 0; c < m; ++c) {
        const bool on = (x >> c) & 1u;
        if (on) idx += comp_stride[c];
        (node_mode ? node_works : edge_works)[net.component_element(c)] = on;
      }
      table.add(idx, terminals_connected(net, edge_works, node_works));
    }
  });
  auto table = make_table(net, Provenance::Exact);
  for (const auto& p : partial) table.merge(p);
  table.finalize();
  return table;
}

double binomial_pmf(std::size_t n, std::size_t k, double q) {
  // k of n components working, each failed with probability q.
  if (k > n) return 0.0;
  const std::size_t failed = n - k;
  if (q <= 0.0) return failed == 0 ? 1.0 : 0.0;
  if (q >= 1.0) return k == 0 ? 1.0 : 0.0;
  if (n <= 60) {
    double c = 1.0;
    const std::size_t r = std::min(k, failed);
    for (std::size_t i = 1; i <= r; ++i)
      c = c * static_cast<double>(n - r + i) / static_cast<double>(i);
    return c * std::pow(q, static_cast<double>(failed)) * std::pow(1.0 - q, static_cast<double>(k));
  }
  const double log_c = std::lgamma(static_cast<double>(n) + 1) -
                       std::lgamma(static_cast<double>(k) + 1) -
                       std::lgamma(static_cast<double>(failed) + 1);
  return std::exp(log_c + static_cast<double>(failed) * std::log(q) +
                  static_cast<double>(k) * std::log1p(-q));
}

double combination_probability(const Network& net, std::span<const LifetimeDistribution> dists,
                               const CombinationKey& key, double t) {
  if (key.counts.size() != net.class_count())
    throw Error(ErrorKind::LengthMismatch, "combination key has the wrong number of classes");
  if (dists.size() < net.class_count())
    throw Error(ErrorKind::MissingDistribution, "missing class distribution");
  double p = 1.0;
  for (std::size_t s = 0; s < key.counts.size(); ++s)
    p *= binomial_pmf(net.class_sizes()[s], key.counts[s], dists[s].cdf(t));
  return p;
}

ReliabilityCurve reliability(const SignatureTable& table,
                             std::span<const LifetimeDistribution> dists,
                             std::span<const double> grid) {
  const auto sizes = table.class_sizes();
  if (dists.size() < sizes.size())
    throw Error(ErrorKind::MissingDistribution, "missing class distribution");
  ReliabilityCurve curve{{grid.begin(), grid.end()}, std::vector<double>(grid.size(), 0.0)};
  std::vector<std::vector<double>> pmf(sizes.size());
  std::vector<std::size_t> key(sizes.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t s = 0; s < sizes.size(); ++s) {
      const double q = dists[s].cdf(grid[g]);
      pmf[s].resize(sizes[s] + 1);
      for (std::size_t l = 0; l <= sizes[s]; ++l) pmf[s][l] = binomial_pmf(sizes[s], l, q);
    }
    double r = 0.0;
    std::fill(key.begin(), key.end(), 0);
    for (std::size_t i = 0; i < table.size(); ++i) {
      // Mixed-radix walk over keys in index order (last class fastest).
      double p = table.entry(i).phi;
      for (std::size_t s = 0; s < sizes.size() && p != 0.0; ++s) p *= pmf[s][key[s]];
      r += p;
      for (std::size_t s = sizes.size(); s-- > 0;) {
        if (++key[s] <= sizes[s]) break;
        key[s] = 0;
      }
    }
    curve.values[g] = r;
  }
  return curve;
}

std::vector<double> default_grid(const Network& net, std::span<const LifetimeDistribution> dists,
                                 std::size_t points, double coverage) {
  if (points < 2) throw Error(ErrorKind::InvalidArgument, "grid needs at least two points");
  double t_max = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < net.class_count(); ++s) {
    if (net.class_sizes()[s] == 0) continue;
    if (s >= dists.size()) throw Error(ErrorKind::MissingDistribution, "missing class distribution");
    t_max = std::min(t_max, dists[s].quantile(coverage));
  }
  if (!std::isfinite(t_max)) t_max = 1.0;
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = t_max * static_cast<double>(i) / static_cast<double>(points - 1);
  return grid;
}

RelativeError relative_error(const ReliabilityCurve& truth, const ReliabilityCurve& approx,
                             double floor) {
  if (truth.grid != approx.grid || truth.values.size() != approx.values.size())
    throw Error(ErrorKind::GridMismatch, "curves are not on the same grid");
  RelativeError out;
  out.pointwise.resize(truth.values.size());
  for (std::size_t i = 0; i < truth.values.size(); ++i) {
    const double r = truth.values[i];
    out.pointwise[i] = r > 0.0 ? std::abs(r - approx.values[i]) / r
                               : std::numeric_limits<double>::quiet_NaN();
    if (r >= floor) {
      out.max = std::max(out.max, out.pointwise[i]);
      ++out.counted;
    }
  }
  return out;
}

}  // namespace netrel
