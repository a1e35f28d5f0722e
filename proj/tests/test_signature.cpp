#include <cmath>
#include <random>

#include "doctest.h"
#include "netrel/errors.hpp"
#include "netrel/signature.hpp"
#include "support/oracles.hpp"

using namespace netrel;
using LD = LifetimeDistribution;

namespace {

CombinationKey key(std::initializer_list<std::size_t> l) { return {std::vector<std::size_t>(l)}; }

std::vector<StateChain> chains_for(const NetworkFile& f, std::size_t n, std::uint64_t seed) {
  const auto pool = sample_pool(f.network, f.distributions, n, seed, 1);
  std::vector<StateChain> out;
  for (std::size_t j = 0; j < n; ++j) out.push_back(build_chain(f.network, pool.sample(j)));
  return out;
}

}  // namespace

TEST_CASE("table phi is survival fraction") {
  SignatureTable t({4});
  t.add(2, true, 8);
  t.add(2, false, 2);
  t.finalize();
  CHECK(t.phi(key({2})) == doctest::Approx(0.8));
  CHECK(t.entry(2).n_surv == 8);
  CHECK_FALSE(t.entry(2).filled);
}

TEST_CASE("mixed radix keys round-trip") {
  SignatureTable t({2, 3, 1});
  CHECK(t.size() == 3 * 4 * 2);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t.index_of(t.key_of(i)) == i);
  CHECK(t.key_of(t.full_index()).counts == std::vector<std::size_t>{2, 3, 1});
  CHECK(t.index_of(key({1, 0, 0})) == t.strides()[0]);
}

TEST_CASE("exact signature of fixtures") {
  const auto bridge = exact_signature(oracle::bridge().network);
  const double want[] = {0, 0, 0.2, 0.8, 1, 1};
  for (std::size_t l = 0; l <= 5; ++l) CHECK(bridge.phi(key({l})) == doctest::Approx(want[l]).epsilon(1e-15));
  CHECK(bridge.provenance() == Provenance::Exact);

  const auto series = exact_signature(oracle::series2().network);
  CHECK(series.phi(key({0})) == 0.0);
  CHECK(series.phi(key({1})) == 0.0);
  CHECK(series.phi(key({2})) == 1.0);

  const auto& diamond = oracle::diamond().network;
  const auto ex = exact_signature(diamond);
  for (const auto& [k, c] : oracle::signature_counts(diamond))
    CHECK(ex.phi({k}) == doctest::Approx(static_cast<double>(c.first) / c.second));
}

TEST_CASE("exact signature matches brute force and is monotone on random graphs") {
  std::mt19937_64 rng(5);
  for (int g = 0; g < 40; ++g) {
    oracle::RandomSpec spec;
    spec.max_components = 12;
    spec.mode = g % 2 ? FailureMode::Node : FailureMode::Edge;
    const auto f = oracle::random_network(rng, spec);
    if (!validate(f.network).ok()) continue;
    const auto ex = exact_signature(f.network, kDefaultExactLimit, 2);
    for (const auto& [k, c] : oracle::signature_counts(f.network)) {
      CHECK(ex.entry(ex.index_of({k})).n_surv == c.first);
      CHECK(ex.entry(ex.index_of({k})).n_surv + ex.entry(ex.index_of({k})).n_fail == c.second);
    }
    for (std::size_t i = 0; i < ex.size(); ++i) {
      auto k = ex.key_of(i);
      for (std::size_t s = 0; s < k.counts.size(); ++s) {
        if (k.counts[s] == ex.class_sizes()[s]) continue;
        auto up = k;
        ++up.counts[s];
        CHECK(ex.phi(up) >= ex.phi(k));
      }
    }
    if (!ex.class_sizes().empty()) {
      CHECK(ex.entry(ex.full_index()).phi == 1.0);
    }
  }
}

TEST_CASE("exact limit") {
  CHECK_THROWS_AS(exact_signature(oracle::grid3x3().network, 11), Error);
  try {
    exact_signature(oracle::grid3x3().network, 11);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ExactIntractable);
  }
}

TEST_CASE("accumulate covers every popcount once per chain in one class") {
  const auto f = oracle::bridge();
  const auto chains = chains_for(f, 3, 9);
  const auto t = accumulate(f.network, chains);
  CHECK(t.total_count() == 6 * 3);
  for (std::size_t l = 0; l <= 5; ++l) CHECK(t.entry(l).n_surv + t.entry(l).n_fail == 3);
  CHECK(t.filled_count() == 0);
}

TEST_CASE("accumulate total is (M+1) per chain with several classes") {
  const auto f = oracle::grid3x3();
  const auto t = accumulate(f.network, chains_for(f, 500, 3));
  CHECK(t.total_count() == 13 * 500);
  const auto mc = mc_kst(f.network, sample_pool(f.network, f.distributions, 500, 3, 1), 3);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t.entry(i).n_surv == mc.entry(i).n_surv);
    CHECK(t.entry(i).n_fail == mc.entry(i).n_fail);
  }
}

TEST_CASE("bridge estimate converges to the exact signature") {
  const auto f = oracle::bridge();
  const std::size_t sizes[] = {2000, 20000, 200000};
  for (std::size_t n : sizes) {
    const auto t = mc_kst(f.network, sample_pool(f.network, f.distributions, n, 11, 0), 0);
    const double err = std::abs(t.phi(key({2})) - 0.2) + std::abs(t.phi(key({3})) - 0.8);
    // five standard errors of the two binomial proportions
    const double tol = 5.0 * 2.0 * std::sqrt(0.16 / static_cast<double>(n));
    CHECK(err <= tol);
  }
  const auto t = mc_kst(f.network, sample_pool(f.network, f.distributions, 50000, 12, 0), 0);
  CHECK(std::abs(t.phi(key({2})) - 0.2) <= 0.02);
}

TEST_CASE("unvisited keys take the envelope midpoint") {
  SignatureTable t({1, 1});
  t.add(t.index_of(key({0, 0})), false, 3);
  t.add(t.index_of(key({1, 1})), true, 3);
  t.add(t.index_of(key({1, 0})), true, 1);
  t.add(t.index_of(key({1, 0})), false, 1);
  t.finalize();
  const auto& e = t.at(key({0, 1}));
  CHECK(e.filled);
  CHECK(e.phi == doctest::Approx(0.5));
  CHECK(t.filled_count() == 1);
  CHECK_FALSE(t.at(key({1, 0})).filled);
}

TEST_CASE("combination probability") {
  NetworkDescription d;
  d.nodes = {"s", "t", "a"};
  d.edges = {{"s", "a"}, {"a", "t"}};
  d.terminals = {"s", "t"};
  d.classes = {{1, {"e1", "e2"}}};
  const auto net = Network::build(d);
  const LD half = LD::exponential(1.0);
  const double t_half = std::log(2.0);
  const LD dists[] = {half};
  CHECK(combination_probability(net, dists, key({1}), t_half) == doctest::Approx(0.5));
  CHECK(combination_probability(net, dists, key({2}), 0.0) == 1.0);
  CHECK(combination_probability(net, dists, key({1}), 0.0) == 0.0);

  const auto g = oracle::grid3x3();
  const auto table = make_table(g.network);
  for (double t : {0.0, 0.3, 1.7}) {
    double sum = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i)
      sum += combination_probability(g.network, g.distributions, table.key_of(i), t);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
  }
  CHECK(binomial_pmf(10, 3, 0.5) == doctest::Approx(120.0 / 1024.0));
  CHECK(binomial_pmf(200, 100, 0.5) == doctest::Approx(0.0563484).epsilon(1e-5));
}

TEST_CASE("reliability of the two-edge series path") {
  const auto f = oracle::series2();
  const auto table = exact_signature(f.network);
  const double grid[] = {0.0, std::log(2.0), 1.0};
  const auto r = reliability(table, f.distributions, grid);
  CHECK(r.values[0] == 1.0);
  CHECK(r.values[1] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(r.values[2] == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
}

TEST_CASE("signature reliability equals state enumeration") {
  std::vector<NetworkFile> fixtures = {oracle::bridge(), oracle::series2(), oracle::diamond(),
                                       oracle::grid3x3()};
  std::mt19937_64 rng(8);
  while (fixtures.size() < 12) {
    oracle::RandomSpec spec;
    spec.max_components = 12;
    spec.mode = fixtures.size() % 2 ? FailureMode::Node : FailureMode::Edge;
    auto f = oracle::random_network(rng, spec);
    if (validate(f.network).ok()) fixtures.push_back(std::move(f));
  }
  for (const auto& f : fixtures) {
    const auto table = exact_signature(f.network);
    const auto grid = default_grid(f.network, f.distributions, 9);
    const auto r = reliability(table, f.distributions, grid);
    CHECK(r.values[0] == doctest::Approx(1.0).epsilon(1e-15));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(std::abs(r.values[i] - oracle::reliability_by_states(f.network, f.distributions, grid[i])) <
            1e-12);
      if (i > 0) CHECK(r.values[i] <= r.values[i - 1] + 1e-15);
    }
  }
}

TEST_CASE("default grid") {
  const auto f = oracle::grid3x3();
  const auto grid = default_grid(f.network, f.distributions);
  CHECK(grid.size() == kDefaultGridPoints);
  CHECK(grid.front() == 0.0);
  const double tmax = std::min(f.distributions[0].quantile(0.999), f.distributions[1].quantile(0.999));
  CHECK(grid.back() == doctest::Approx(tmax));
}

TEST_CASE("relative error") {
  ReliabilityCurve truth{{0, 1, 2, 3}, {1.0, 0.5, 0.01, 0.0001}};
  ReliabilityCurve same = truth;
  CHECK(relative_error(truth, same).max == 0.0);

  ReliabilityCurve approx{{0, 1, 2, 3}, {1.0, 0.4986, 0.01, 0.0}};
  const auto re = relative_error(truth, approx);
  CHECK(re.pointwise[1] == doctest::Approx(0.0028));
  CHECK(re.max == doctest::Approx(0.0028));
  CHECK(re.counted == 3);  // 1e-4 is below the floor
  CHECK(re.pointwise[3] == doctest::Approx(1.0));

  ReliabilityCurve other{{0, 1, 2}, {1.0, 0.5, 0.01}};
  try {
    relative_error(truth, other);
    FAIL("expected GridMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::GridMismatch);
  }
}
