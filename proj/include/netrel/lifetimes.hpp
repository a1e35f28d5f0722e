#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "netrel/network.hpp"

namespace netrel {

// Component lifetime law. Parameter conventions: exponential takes a rate
// (inverse scale); Weibull and gamma take (scale, shape); lognormal takes the
// (location, scale) of the underlying normal.
class LifetimeDistribution {
 public:
  enum class Kind { Exponential, Weibull, Lognormal, Gamma };

  static LifetimeDistribution exponential(double rate);
  static LifetimeDistribution weibull(double scale, double shape);
  static LifetimeDistribution lognormal(double location, double scale);
  static LifetimeDistribution gamma(double scale, double shape);

  // Builds from a kind name ("exponential", "weibull", "lognormal", "gamma")
  // and its parameter list in the conventions above.
  static LifetimeDistribution from_params(std::string_view kind,
                                          std::span<const double> params);

  Kind kind() const noexcept { return kind_; }
  std::vector<double> params() const;

  double cdf(double t) const;
  double quantile(double p) const;

  // One draw from a generator seeded with `stream`.
  double sample(std::uint64_t stream) const;

  friend bool operator==(const LifetimeDistribution&, const LifetimeDistribution&) = default;

 private:
  LifetimeDistribution(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}

  Kind kind_ = Kind::Exponential;
  double a_ = 1.0;
  double b_ = 0.0;
};

std::string_view to_string(LifetimeDistribution::Kind kind);

struct LifetimeSample {
  std::vector<double> times;
};

// Fixed-size pool of lifetime samples stored row-major (sample x component).
class SamplePool {
 public:
  SamplePool() = default;
  SamplePool(std::size_t components, std::vector<double> data, std::uint64_t seed);

  std::size_t size() const noexcept { return rows_; }
  std::size_t components() const noexcept { return components_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::span<const double> sample(std::size_t j) const {
    return {data_.data() + j * components_, components_};
  }
  LifetimeSample at(std::size_t j) const;

  // First n samples, sharing the seed record.
  SamplePool head(std::size_t n) const;

 private:
  std::size_t components_ = 0;
  std::size_t rows_ = 0;
  std::vector<double> data_;
  std::uint64_t seed_ = 0;
};

// Seed of the generator used for component i of sample j.
std::uint64_t component_stream(std::uint64_t seed, std::size_t sample, std::size_t component);

// Draws n samples; component i of sample j comes from its class distribution
// using stream component_stream(seed, j, i), so results do not depend on the
// worker count. dists is indexed by dense class index.
SamplePool sample_pool(const Network& net, std::span<const LifetimeDistribution> dists,
                       std::size_t n, std::uint64_t seed, unsigned threads = 0);

inline constexpr int kReliableClass = -1;

struct EdgeLifetimes {
  std::vector<double> times;   // per edge, +inf when both endpoints are reliable
  std::vector<int> classes;    // dense class of the failing endpoint, or kReliableClass
  std::vector<std::size_t> source;  // component index of the failing endpoint, or npos
};

// Node-failure to edge-failure reduction: an edge dies with the first of its
// endpoints. Equal endpoint lifetimes resolve to the lower-indexed node.
EdgeLifetimes node_to_edge(const Network& net, std::span<const double> node_sample);

}  // namespace netrel
