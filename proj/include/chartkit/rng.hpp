#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace chartkit {

// mt19937_64 with portable draws. The engine's output sequence is fixed by
// the standard; the distribution adaptors are not, so they are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  double uniform();                          // [0, 1), 53-bit resolution
  std::size_t below(std::size_t n);          // uniform in [0, n), unbiased
  double normal();                           // standard normal (Box-Muller)

  // Independent stream keyed by (seed, a, b); used to give each worker or
  // group its own generator without sharing state.
  static Rng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

 private:
  std::mt19937_64 engine_;
};

}  // namespace chartkit
