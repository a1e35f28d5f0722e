#include "netrel/lifetimes.hpp"

#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/weibull.hpp>
#include <cmath>
#include <limits>
#include <random>

#include "netrel/errors.hpp"
#include "netrel/hash.hpp"
#include "netrel/parallel.hpp"

namespace netrel {

namespace {

void require_positive(double v, std::string_view what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw Error(ErrorKind::InvalidArgument,
                std::string(what) + " must be positive and finite");
}

template <class Fn>
auto with_boost(LifetimeDistribution::Kind kind, double a, double b, Fn&& fn) {
  using Kind = LifetimeDistribution::Kind;
  switch (kind) {
    case Kind::Exponential: return fn(boost::math::exponential_distribution<double>(a));
    case Kind::Weibull: return fn(boost::math::weibull_distribution<double>(b, a));
    case Kind::Lognormal: return fn(boost::math::lognormal_distribution<double>(a, b));
    case Kind::Gamma: return fn(boost::math::gamma_distribution<double>(b, a));
  }
  throw Error(ErrorKind::InvalidArgument, "unknown distribution kind");
}

}  // namespace

LifetimeDistribution LifetimeDistribution::exponential(double rate) {
  require_positive(rate, "exponential rate");
  return {Kind::Exponential, rate, 0.0};
}

LifetimeDistribution LifetimeDistribution::weibull(double scale, double shape) {
  require_positive(scale, "weibull scale");
  require_positive(shape, "weibull shape");
  return {Kind::Weibull, scale, shape};
}

LifetimeDistribution LifetimeDistribution::lognormal(double location, double scale) {
  if (!std::isfinite(location))
    throw Error(ErrorKind::InvalidArgument, "lognormal location must be finite");
  require_positive(scale, "lognormal scale");
  return {Kind::Lognormal, location, scale};
}

LifetimeDistribution LifetimeDistribution::gamma(double scale, double shape) {
  require_positive(scale, "gamma scale");
  require_positive(shape, "gamma shape");
  return {Kind::Gamma, scale, shape};
}

LifetimeDistribution LifetimeDistribution::from_params(std::string_view kind,
                                                       std::span<const double> p) {
  auto need = [&](std::size_t n) {
    if (p.size() != n)
      throw Error(ErrorKind::Parse, std::string(kind) + " expects " + std::to_string(n) +
                                        " parameter(s), got " + std::to_string(p.size()));
  };
  if (kind == "exponential") {
    need(1);
    return exponential(p[0]);
  }
  if (kind == "weibull") {
    need(2);
    return weibull(p[0], p[1]);
  }
  if (kind == "lognormal") {
    need(2);
    return lognormal(p[0], p[1]);
  }
  if (kind == "gamma") {
    need(2);
    return gamma(p[0], p[1]);
  }
  throw Error(ErrorKind::Parse, "unknown distribution kind '" + std::string(kind) + "'");
}

std::vector<double> LifetimeDistribution::params() const {
  if (kind_ == Kind::Exponential) return {a_};
  return {a_, b_};
}

std::string_view to_string(LifetimeDistribution::Kind kind) {
  using Kind = LifetimeDistribution::Kind;
  switch (kind) {
    case Kind::Exponential: return "exponential";
    case Kind::Weibull: return "weibull";
    case Kind::Lognormal: return "lognormal";
    case Kind::Gamma: return "gamma";
  }
  return "unknown";
}

double LifetimeDistribution::cdf(double t) const {
  if (std::isnan(t) || t < 0.0)
    throw Error(ErrorKind::NegativeTime, "cdf evaluated at negative time");
  if (t == 0.0) return 0.0;
  if (std::isinf(t)) return 1.0;
  return with_boost(kind_, a_, b_, [t](const auto& d) { return boost::math::cdf(d, t); });
}

double LifetimeDistribution::quantile(double p) const {
  if (!(p >= 0.0 && p < 1.0))
    throw Error(ErrorKind::InvalidArgument, "quantile probability must be in [0, 1)");
  if (p == 0.0) return 0.0;
  return with_boost(kind_, a_, b_, [p](const auto& d) { return boost::math::quantile(d, p); });
}

double LifetimeDistribution::sample(std::uint64_t stream) const {
  SplitMix64 rng(stream);
  double t = 0.0;
  switch (kind_) {
    case Kind::Exponential: t = std::exponential_distribution<double>(a_)(rng); break;
    case Kind::Weibull: t = std::weibull_distribution<double>(b_, a_)(rng); break;
    case Kind::Lognormal: t = std::lognormal_distribution<double>(a_, b_)(rng); break;
    case Kind::Gamma: t = std::gamma_distribution<double>(b_, a_)(rng); break;
  }
  // Lifetimes are strictly positive; a zero draw (probability ~2^-53) is
  // nudged to the smallest positive double.
  return t > 0.0 ? t : std::numeric_limits<double>::denorm_min();
}

SamplePool::SamplePool(std::size_t components, std::vector<double> data, std::uint64_t seed)
    : components_(components), data_(std::move(data)), seed_(seed) {
  if (components_ == 0)
    throw Error(ErrorKind::InvalidArgument, "sample pool needs at least one component");
  if (data_.size() % components_ != 0)
    throw Error(ErrorKind::LengthMismatch, "pool data is not a whole number of samples");
  rows_ = data_.size() / components_;
}

LifetimeSample SamplePool::at(std::size_t j) const {
  auto s = sample(j);
  return {std::vector<double>(s.begin(), s.end())};
}

SamplePool SamplePool::head(std::size_t n) const {
  n = std::min(n, rows_);
  return SamplePool(components_, std::vector<double>(data_.begin(), data_.begin() + n * components_),
                    seed_);
}

std::uint64_t component_stream(std::uint64_t seed, std::size_t sample, std::size_t component) {
  return hash_combine(hash_combine(mix64(seed), sample), component);
}

SamplePool sample_pool(const Network& net, std::span<const LifetimeDistribution> dists,
                       std::size_t n, std::uint64_t seed, unsigned threads) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "sample count must be at least 1");
  const std::size_t m = net.component_count();
  for (std::size_t c = 0; c < m; ++c) {
    const int s = net.component_class(c);
    if (s < 0 || static_cast<std::size_t>(s) >= dists.size())
      throw Error(ErrorKind::MissingDistribution,
                  "component " + net.component_id(c) + " has no class distribution");
  }
  std::vector<double> data(n * m);
  parallel_for(n, threads, [&](std::size_t j) {
    for (std::size_t c = 0; c < m; ++c)
      data[j * m + c] = dists[static_cast<std::size_t>(net.component_class(c))].sample(
          component_stream(seed, j, c));
  });
  return SamplePool(m, std::move(data), seed);
}

EdgeLifetimes node_to_edge(const Network& net, std::span<const double> node_sample) {
  if (net.failure_mode() != FailureMode::Node)
    throw Error(ErrorKind::FailureModeMismatch, "node_to_edge requires a node-failure network");
  if (node_sample.size() != net.component_count())
    throw Error(ErrorKind::LengthMismatch, "node sample length does not match M");
  constexpr double inf = std::numeric_limits<double>::infinity();
  EdgeLifetimes out;
  out.times.resize(net.edge_count());
  out.classes.resize(net.edge_count());
  out.source.resize(net.edge_count());
  for (std::size_t e = 0; e < net.edge_count(); ++e) {
    auto [a, b] = net.edges()[e];
    if (b < a) std::swap(a, b);
    const std::size_t ca = net.node_component(a);
    const std::size_t cb = net.node_component(b);
    const double ta = ca == npos ? inf : node_sample[ca];
    const double tb = cb == npos ? inf : node_sample[cb];
    // a is the lower-indexed endpoint and wins ties.
    const std::size_t c = tb < ta ? cb : ca;
    out.times[e] = std::min(ta, tb);
    out.source[e] = c;
    out.classes[e] = out.source[e] == npos ? kReliableClass : net.component_class(out.source[e]);
  }
  return out;
}

}  // namespace netrel
