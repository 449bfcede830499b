#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace droc {

/**
 * Seeded random stream. Every draw is folded into a running FNV-1a hash so two
 * consumers can verify they saw identical draws (common random numbers).
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream for (root, ids...), stable across runs and scheduling order.
  static Rng stream(std::uint64_t root, std::initializer_list<std::uint64_t> ids);

  double uniform();  // [0, 1)
  double normal();   // N(0, 1)

  std::uint64_t drawHash() const { return hash_; }
  std::mt19937_64& engine() { return engine_; }

 private:
  void mix(double value);

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
  std::uint64_t hash_ = 1469598103934665603ULL;
};

}  // namespace droc
