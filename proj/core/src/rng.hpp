#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fbench::detail {

// mt19937_64 output is fixed by the standard; the distribution adapters in
// <random> are not, so the conversions below are spelled out to keep
// generated corpora identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % bound;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Number of failures before the next success of a Bernoulli(p) stream.
  std::uint64_t geometric_skip(double p) {
    if (p >= 1.0) return 0;
    double u = 1.0 - uniform();  // (0, 1]
    double k = std::floor(std::log(u) / std::log1p(-p));
    return k >= 1e18 ? static_cast<std::uint64_t>(1e18) : static_cast<std::uint64_t>(k);
  }

  template <typename It>
  void shuffle(It first, It last) {
    auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      std::uint64_t j = below(i);
      std::swap(first[static_cast<std::ptrdiff_t>(i - 1)], first[static_cast<std::ptrdiff_t>(j)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fbench::detail
