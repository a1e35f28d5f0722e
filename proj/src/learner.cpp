#include "netrel/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "netrel/errors.hpp"
#include "netrel/hash.hpp"
#include "netrel/parallel.hpp"

namespace netrel {

std::size_t default_n_ini(const Network& net) { return 2 * net.node_count(); }

std::size_t default_n_add(const Network& net) {
  const std::size_t nv = net.node_count();
  return 2 * (nv > 2 ? nv - 2 : 0) + 4 * net.edge_count();
}

LearnerConfig resolve(const Network& net, LearnerConfig cfg, std::size_t pool_size) {
  if (cfg.n_mcs == 0) cfg.n_mcs = pool_size;
  if (cfg.n_ini == 0) cfg.n_ini = default_n_ini(net);
  if (cfg.n_add == 0) cfg.n_add = std::max<std::size_t>(default_n_add(net), 1);
  if (cfg.mtry == 0 || cfg.mtry > net.component_count()) cfg.mtry = net.component_count();
  if (cfg.n_mcs > pool_size)
    throw Error(ErrorKind::PoolTooSmall, "pool holds " + std::to_string(pool_size) +
                                             " samples, " + std::to_string(cfg.n_mcs) +
                                             " requested");
  if (cfg.n_ini > cfg.n_mcs)
    throw Error(ErrorKind::PoolTooSmall, "n_ini exceeds the number of pool samples");
  if (!(cfg.delta > 0.0 && cfg.delta <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "delta must lie in (0, 1]");
  if (!(cfg.band_low > 0.0 && cfg.band_low <= cfg.band_high && cfg.band_high < 1.0))
    throw Error(ErrorKind::InvalidArgument, "uncertainty band must lie within (0, 1)");
  if (cfg.ntree == 0) throw Error(ErrorKind::InvalidArgument, "ntree must be positive");
  if (cfg.consecutive == 0)
    throw Error(ErrorKind::InvalidArgument, "consecutive checks must be positive");
  return cfg;
}

LearnerState::LearnerState(const Network& net, const SamplePool& pool, const LearnerConfig& cfg)
    : net_(&net), cfg_(cfg), pool_(&pool), m_(net.component_count()), train_(net.component_count()) {
  if (pool.components() != m_)
    throw Error(ErrorKind::DimensionMismatch, "pool dimension does not match M");
  n_ = cfg.n_mcs == 0 ? pool.size() : cfg.n_mcs;
  if (n_ > pool.size()) throw Error(ErrorKind::PoolTooSmall, "pool is smaller than n_mcs");

  orders_.resize(n_ * m_);
  parallel_for(n_, cfg.threads, [&](std::size_t j) {
    const auto s = pool.sample(j);
    auto* o = orders_.data() + j * m_;
    std::iota(o, o + m_, 0u);
    std::stable_sort(o, o + m_, [&](auto a, auto b) { return s[a] < s[b]; });
  });

  vids_.resize(n_ * (m_ + 1));
  for (std::size_t j = 0; j < n_; ++j) {
    StateVector x(m_, true);
    const auto* o = orders_.data() + j * m_;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i > 0) x.set(o[i - 1], false);
      auto [it, inserted] = index_.emplace(x, static_cast<std::uint32_t>(vectors_.size()));
      if (inserted) vectors_.push_back(x);
      vids_[j * (m_ + 1) + i] = it->second;
    }
  }
  in_train_.assign(vectors_.size(), 0);
  pool_refs_.assign(vectors_.size(), 0);
  for (auto v : vids_) ++pool_refs_[v];
  predictions_.assign(vectors_.size(), Prediction{});
  k_rank_.assign(n_, npos);
  in_pool_.assign(n_, 1);
  pool_count_ = n_;
}

void LearnerState::enrich(std::span<const std::size_t> ids) {
  for (auto j : ids)
    if (j >= n_ || !in_pool_[j])
      throw Error(ErrorKind::InvalidArgument, "sample " + std::to_string(j) + " is not in the pool");
  std::vector<std::size_t> ranks(ids.size());
  parallel_chunks(ids.size(), cfg_.threads, [&](std::size_t, std::size_t b, std::size_t e) {
    KstWorkspace ws;
    std::vector<std::uint32_t> order;
    for (std::size_t k = b; k < e; ++k) ranks[k] = ws.chain_rank(*net_, pool_->sample(ids[k]), order);
  });
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const std::size_t j = ids[k];
    k_rank_[j] = ranks[k];
    in_pool_[j] = 0;
    --pool_count_;
    ++kst_runs_;
    for (std::size_t i = 0; i <= m_; ++i) {
      const auto v = vector_id(j, i);
      --pool_refs_[v];
      train_.add(vectors_[v], i < ranks[k]);
      in_train_[v] = 1;
    }
  }
  predicted_ = false;
}

void LearnerState::predict(const Forest& forest) {
  if (forest.dimension() != m_)
    throw Error(ErrorKind::DimensionMismatch, "forest dimension does not match M");
  std::vector<std::uint32_t> todo;
  for (std::uint32_t v = 0; v < vectors_.size(); ++v)
    if (pool_refs_[v] > 0) todo.push_back(v);
  parallel_for(todo.size(), cfg_.threads, [&](std::size_t k) {
    const auto v = todo[k];
    predictions_[v] = prediction_from_votes(forest.votes_for_one(vectors_[v].words()), forest.ntree());
  });
  predicted_ = true;
}

void LearnerState::set_prediction(std::uint32_t vid, const Prediction& p) {
  predictions_[vid] = p;
  predicted_ = true;
}

void LearnerState::require_predictions() const {
  if (!predicted_ && pool_count_ > 0)
    throw Error(ErrorKind::InvalidArgument, "pool predictions are stale");
}

std::size_t LearnerState::uncertainty_count() const {
  require_predictions();
  std::size_t count = 0;
  for (std::uint32_t v = 0; v < vectors_.size(); ++v) {
    if (pool_refs_[v] == 0) continue;
    const double rho = predictions_[v].rho;
    if (rho >= cfg_.band_low && rho <= cfg_.band_high) count += pool_refs_[v];
  }
  return count;
}

namespace {

double plogp(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

}  // namespace

std::pair<double, double> LearnerState::entropy_and_weight(std::size_t j) const {
  require_predictions();
  double entropy = 0.0;
  std::size_t repeats = 0;
  for (std::size_t i = 0; i <= m_; ++i) {
    const auto v = vector_id(j, i);
    if (in_train_[v]) {
      ++repeats;
      continue;
    }
    entropy -= plogp(predictions_[v].rho) + plogp(predictions_[v].sigma);
  }
  return {entropy, 1.0 / static_cast<double>(std::max<std::size_t>(repeats, 1))};
}

std::vector<std::size_t> LearnerState::select_batch(std::size_t n_add) const {
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(pool_count_);
  for (std::size_t j = 0; j < n_; ++j) {
    if (!in_pool_[j]) continue;
    const auto [e, w] = entropy_and_weight(j);
    scored.emplace_back(w * e, j);
  }
  const std::size_t take = std::min(n_add, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(),
                    [](const auto& a, const auto& b) {
                      return a.first != b.first ? a.first > b.first : a.second < b.second;
                    });
  std::vector<std::size_t> ids(take);
  for (std::size_t k = 0; k < take; ++k) ids[k] = scored[k].second;
  return ids;
}

SignatureTable LearnerState::accumulate() const {
  require_predictions();
  SignatureTable table = make_table(*net_);
  const auto classes = net_->component_classes();
  const auto strides = table.strides();
  for (std::size_t j = 0; j < n_; ++j) {
    const std::span<const std::uint32_t> order(orders_.data() + j * m_, m_);
    if (k_rank_[j] != npos) {
      table.add_chain(order, k_rank_[j], classes);
      continue;
    }
    std::size_t idx = table.full_index();
    for (std::size_t i = 0; i <= m_; ++i) {
      const auto v = vector_id(j, i);
      const bool label = in_train_[v] ? *train_.label_of(vectors_[v]) : predictions_[v].label;
      table.add(idx, label);
      if (i == m_) break;
      const int s = classes[order[i]];
      if (s >= 0) idx -= strides[static_cast<std::size_t>(s)];
    }
  }
  table.finalize();
  return table;
}

double StopRule::ratio(std::size_t n_rho, std::size_t pool_samples, std::size_t dimension) {
  if (pool_samples == 0) return 0.0;
  return static_cast<double>(n_rho) /
         (static_cast<double>(pool_samples) * static_cast<double>(dimension + 1));
}

bool StopRule::check(double ratio) {
  streak_ = ratio <= delta_ ? streak_ + 1 : 0;
  return streak_ >= needed_;
}

namespace {

AuditLog make_audit(const char* method, const LearnerConfig& cfg) {
  AuditLog a;
  a.method = method;
  a.n_mcs = cfg.n_mcs;
  a.n_ini = cfg.n_ini;
  a.n_add = cfg.n_add;
  a.delta = cfg.delta;
  a.ntree = cfg.ntree;
  a.mtry = cfg.mtry;
  a.seed = cfg.seed;
  return a;
}

Forest fit(const TrainingSet& train, const LearnerConfig& cfg, std::uint64_t round) {
  ForestOptions opt;
  opt.ntree = cfg.ntree;
  opt.mtry = cfg.mtry;
  opt.seed = hash_combine(cfg.seed, round);
  opt.threads = cfg.threads;
  return Forest::train(train, opt);
}

}  // namespace

LearnerResult run_al_kst(const Network& net, const SamplePool& pool, const LearnerConfig& config) {
  require_valid(net);
  const LearnerConfig cfg = resolve(net, config, pool.size());
  LearnerState state(net, pool, cfg);
  AuditLog audit = make_audit("al-kst", cfg);

  std::vector<std::size_t> initial(cfg.n_ini);
  std::iota(initial.begin(), initial.end(), 0);
  state.enrich(initial);

  StopRule rule(cfg.delta, cfg.consecutive);
  Forest forest;
  for (std::size_t it = 0;; ++it) {
    forest = fit(state.train(), cfg, it);
    state.predict(forest);

    IterationRecord rec;
    rec.iteration = it;
    rec.train_size = state.train().size();
    rec.labeled_samples = state.kst_runs();
    rec.pool_samples = state.pool_size();
    rec.n_rho = state.uncertainty_count();
    rec.ratio = StopRule::ratio(rec.n_rho, rec.pool_samples, state.dimension());
    const bool stop = rule.check(rec.ratio);
    rec.passed = rule.last_passed();

    if (stop) {
      audit.stop_reason = "criterion";
    } else if (state.pool_size() == 0) {
      audit.stop_reason = "pool_exhausted";
    } else if (cfg.max_iterations != 0 && it + 1 >= cfg.max_iterations) {
      audit.stop_reason = "iteration_limit";
    } else {
      rec.batch = state.select_batch(cfg.n_add);
      state.enrich(rec.batch);
    }
    audit.iterations.push_back(std::move(rec));
    if (!audit.stop_reason.empty()) break;
  }
  audit.kst_runs = state.kst_runs();
  return {state.accumulate(), std::move(forest), std::move(audit)};
}

LearnerResult run_rf_kst(const Network& net, const SamplePool& pool, const LearnerConfig& config,
                         std::size_t n_train) {
  require_valid(net);
  LearnerConfig cfg = config;
  cfg.n_ini = std::max<std::size_t>(n_train, 1);  // keeps resolve() from deriving a default
  cfg = resolve(net, cfg, pool.size());
  cfg.n_ini = n_train;
  cfg.n_add = 0;
  if (n_train == 0) throw Error(ErrorKind::EmptyTrainingSet, "n_train must be positive");
  LearnerState state(net, pool, cfg);
  AuditLog audit = make_audit("rf-kst", cfg);

  std::vector<std::size_t> ids(state.sample_count());
  std::iota(ids.begin(), ids.end(), 0);
  std::mt19937_64 rng(mix64(cfg.seed));
  for (std::size_t k = 0; k < n_train; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, ids.size() - 1);
    std::swap(ids[k], ids[pick(rng)]);
  }
  ids.resize(n_train);
  std::sort(ids.begin(), ids.end());
  state.enrich(ids);

  Forest forest = fit(state.train(), cfg, 0);
  state.predict(forest);
  IterationRecord rec;
  rec.train_size = state.train().size();
  rec.labeled_samples = state.kst_runs();
  rec.pool_samples = state.pool_size();
  rec.n_rho = state.uncertainty_count();
  rec.ratio = StopRule::ratio(rec.n_rho, rec.pool_samples, state.dimension());
  rec.passed = rec.ratio <= cfg.delta;
  audit.iterations.push_back(std::move(rec));
  audit.kst_runs = state.kst_runs();
  audit.stop_reason = "single_pass";
  return {state.accumulate(), std::move(forest), std::move(audit)};
}

SignatureTable variant_signature(const Network& original, const Forest& forest,
                                 const Variant& variant, const SamplePool& pool,
                                 unsigned threads) {
  const Network& vnet = variant.network;
  const std::size_t m = vnet.component_count();
  if (forest.dimension() != original.component_count() ||
      variant.mask.original_size() != original.component_count())
    throw Error(ErrorKind::DimensionMismatch, "forest was trained on a different dimension");
  if (variant.mask.variant_size() != m || pool.components() != m)
    throw Error(ErrorKind::DimensionMismatch, "pool dimension does not match the variant");

  const std::size_t n = pool.size();
  std::vector<std::uint32_t> orders(n * m);
  parallel_for(n, threads, [&](std::size_t j) {
    const auto s = pool.sample(j);
    auto* o = orders.data() + j * m;
    std::iota(o, o + m, 0u);
    std::stable_sort(o, o + m, [&](auto a, auto b) { return s[a] < s[b]; });
  });

  // Chains are walked in the original component space: start from the
  // embedded all-working vector and clear the original position of each
  // failing variant component. Distinct vectors are predicted once.
  const auto kept = variant.mask.kept();
  std::vector<std::uint8_t> labels;
  std::vector<std::uint32_t> vids(n * (m + 1));
  auto predict_all = [&](const std::vector<StateVector>& vectors) {
    labels.resize(vectors.size());
    parallel_for(vectors.size(), threads, [&](std::size_t v) {
      labels[v] = 2 * forest.votes_for_one(vectors[v].words()) > forest.ntree();
    });
  };
  const StateVector head = variant.mask.embed(StateVector(m, true));
  if (variant.mask.original_size() <= 64) {
    // Single-word vectors: intern by the raw bit pattern.
    std::unordered_map<std::uint64_t, std::uint32_t> index;
    std::vector<StateVector> vectors;
    const std::uint64_t start = head.words().empty() ? 0 : head.words()[0];
    for (std::size_t j = 0; j < n; ++j) {
      std::uint64_t x = start;
      const auto* o = orders.data() + j * m;
      for (std::size_t i = 0; i <= m; ++i) {
        if (i > 0) x &= ~(std::uint64_t{1} << kept[o[i - 1]]);
        auto [it, inserted] = index.emplace(x, static_cast<std::uint32_t>(vectors.size()));
        if (inserted) {
          StateVector v(variant.mask.original_size());
          for (std::size_t b = 0; b < v.size(); ++b)
            if ((x >> b) & 1u) v.set(b);
          vectors.push_back(std::move(v));
        }
        vids[j * (m + 1) + i] = it->second;
      }
    }
    predict_all(vectors);
  } else {
    std::unordered_map<StateVector, std::uint32_t, StateVectorHash> index;
    std::vector<StateVector> vectors;
    for (std::size_t j = 0; j < n; ++j) {
      StateVector x = head;
      const auto* o = orders.data() + j * m;
      for (std::size_t i = 0; i <= m; ++i) {
        if (i > 0) x.set(kept[o[i - 1]], false);
        auto [it, inserted] = index.emplace(x, static_cast<std::uint32_t>(vectors.size()));
        if (inserted) vectors.push_back(x);
        vids[j * (m + 1) + i] = it->second;
      }
    }
    predict_all(vectors);
  }

  SignatureTable table = make_table(vnet);
  const auto classes = vnet.component_classes();
  const auto strides = table.strides();
  for (std::size_t j = 0; j < n; ++j) {
    const auto* o = orders.data() + j * m;
    std::size_t idx = table.full_index();
    for (std::size_t i = 0; i <= m; ++i) {
      table.add(idx, labels[vids[j * (m + 1) + i]] != 0);
      if (i == m) break;
      const int s = classes[o[i]];
      if (s >= 0) idx -= strides[static_cast<std::size_t>(s)];
    }
  }
  table.finalize();
  return table;
}

ReliabilityCurve predict_variant(const Network& original, const Forest& forest,
                                 const Variant& variant, const SamplePool& pool,
                                 std::span<const LifetimeDistribution> dists,
                                 std::span<const double> grid, unsigned threads) {
  return reliability(variant_signature(original, forest, variant, pool, threads), dists, grid);
}

}  // namespace netrel
