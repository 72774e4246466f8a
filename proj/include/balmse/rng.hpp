#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace balmse {

/// Seedable random source with a stream that is identical on every platform.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Everything derived from it (uniforms, Gaussians, bounded
/// integers, shuffles) is computed here rather than through the
/// implementation-defined <random> distributions:
///   - uniform():  top 53 bits of one draw, scaled to [0, 1)
///   - normal():   Box-Muller on two open uniforms, second value cached
///   - below(n):   rejection sampling on the 64-bit draw (unbiased)
///   - shuffle():  Fisher-Yates from the last element down
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal.
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  /// Index drawn from a discrete distribution given by (unnormalized) weights.
  std::size_t categorical(std::span<const double> weights);

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Sub-seed for an independent stream: mix64(seed + (stream + 1) * golden).
/// Used to expand one top-level seed into per-run and per-purpose seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace balmse
