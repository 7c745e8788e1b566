#include "dsl/rng.hpp"

namespace dsl {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t RngStream::derive_key(std::uint64_t master_seed, std::string_view label,
                                    std::uint64_t a, std::uint64_t b) {
  std::uint64_t k = splitmix64(master_seed);
  k = splitmix64(k ^ fnv1a(label));
  k = splitmix64(k ^ splitmix64(a + 0x632BE59BD9B4E019ULL));
  k = splitmix64(k ^ splitmix64(b + 0x85157AF5ULL));
  return k;
}

RngStream::RngStream(std::uint64_t master_seed, std::string_view label, std::uint64_t a,
                     std::uint64_t b) {
  const std::uint64_t key = derive_key(master_seed, label, a, b);
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  engine_.seed(seq);
}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal(double mean, double stddev) {
  std::normal_distribution<double> dist(mean, stddev);
  return dist(engine_);
}

double RngStream::gamma(double shape) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

std::size_t RngStream::index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

}  // namespace dsl
