#pragma once

#include <cstdint>
#include <random>

namespace levyfdt {

/// Stream domains keep independent consumers of one master seed apart, so a
/// trajectory stream never coincides with a burn-in chain or a probe stream.
enum class StreamDomain : std::uint64_t {
  trajectory = 1,
  chain = 2,
  probe = 3,
  sampler = 4,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Derive the engine seed for stream `index` of `domain` under `master_seed`.
std::uint64_t derive_stream_seed(std::uint64_t master_seed, StreamDomain domain,
                                 std::uint64_t index);

/// A random-number stream fully determined by (master seed, domain, index).
/// Streams share no state, so any number of them can be used concurrently.
class RngStream {
 public:
  explicit RngStream(std::uint64_t master_seed,
                     StreamDomain domain = StreamDomain::sampler,
                     std::uint64_t index = 0);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53 random bits.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unit-rate exponential.
  double exponential();

  /// Standard normal (Box-Muller, no cached second value).
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace levyfdt
