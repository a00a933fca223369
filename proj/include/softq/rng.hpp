#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

#include <Eigen/Core>

#include "softq/errors.hpp"

namespace softq {

/// SplitMix64 generator (Steele, Lea & Flood; Vigna's fixed-increment
/// variant).  Chosen because it is counter-based at heart: the state
/// advances by a fixed odd constant, so derived streams can be spaced
/// deterministically and never collide for < 2^64 draws.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += UINT64_C(0x9E3779B97F4A7C15));
    z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// A reproducible random stream.  Streams are derived from a base seed and
/// an explicit key path (e.g. {algorithm, sweep index, seed index}), so
/// every run owns a documented, collision-free stream regardless of
/// scheduling order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(mix(seed)) {}

  /// Derives a substream: the base seed and each key element are absorbed
  /// through SplitMix64 finalizers, giving independent streams for
  /// distinct key paths.
  static Rng stream(std::uint64_t base_seed, std::initializer_list<std::uint64_t> key) {
    std::uint64_t s = mix(base_seed);
    for (std::uint64_t k : key) {
      s = mix(s ^ mix(k + UINT64_C(0x517CC1B727220A95)));
    }
    return Rng(s);
  }

  std::uint64_t next_u64() { return gen_.next(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n).
  int uniform_int(int n) {
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

  /// Samples an index from an (unchecked) probability vector by CDF
  /// inversion.  Rounding may leave the cumulative total slightly below
  /// the drawn uniform; the last positive-probability index is returned.
  int categorical(const Eigen::VectorXd& probs) {
    if (probs.size() == 0) throw EmptyActionSet("categorical: empty probability vector");
    const double u = uniform01();
    double cum = 0.0;
    int last_positive = -1;
    for (int i = 0; i < probs.size(); ++i) {
      if (probs[i] > 0.0) last_positive = i;
      cum += probs[i];
      if (u < cum) return i;
    }
    return last_positive >= 0 ? last_positive : static_cast<int>(probs.size()) - 1;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += UINT64_C(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
    return z ^ (z >> 31);
  }

  SplitMix64 gen_;
};

}  // namespace softq
