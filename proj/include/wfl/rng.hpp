#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace wfl {

// Every stochastic draw in the simulator goes through an RngStream. Streams
// are derived from a master seed and a string label (e.g. "client/c3/chan"),
// never from wall clock or global state, so a run is a pure function of
// (config, seed) and per-client streams are independent of worker layout.
//
// Distribution transforms are implemented here instead of relying on
// <random>'s distribution classes, whose algorithms are implementation
// defined; the generator itself (mt19937_64) is fully specified.

std::uint64_t mix64(std::uint64_t x);                // splitmix64 finalizer
std::uint64_t hash_label(std::string_view label);    // FNV-1a 64

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), gen_(mix64(seed)) {}

  // Child stream keyed by (this stream's seed, label). Derivation depends
  // only on the seed, not on how much of this stream has been consumed.
  RngStream derive(std::string_view label) const;
  RngStream derive(std::string_view label, std::uint64_t index) const;

  std::uint64_t next_u64() { return gen_(); }
  double uniform01();    // [0, 1)
  double uniform_pos();  // (0, 1]
  double normal(double mean = 0.0, double stddev = 1.0);
  double gamma(double shape, double scale);
  std::uint64_t below(std::uint64_t n);  // uniform integer in [0, n), n >= 1

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace wfl
