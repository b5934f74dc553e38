#include "levyfdt/rng.hpp"

#include <cmath>
#include <numbers>

namespace levyfdt {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_stream_seed(std::uint64_t master_seed, StreamDomain domain,
                                 std::uint64_t index) {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(domain));
  return splitmix64(h ^ splitmix64(index));
}

RngStream::RngStream(std::uint64_t master_seed, StreamDomain domain, std::uint64_t index)
    : engine_(derive_stream_seed(master_seed, domain, index)) {}

double RngStream::exponential() { return -std::log(uniform()); }

double RngStream::normal() {
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  return r * std::cos(2.0 * std::numbers::pi * uniform());
}

}  // namespace levyfdt
