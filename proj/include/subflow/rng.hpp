#ifndef SUBFLOW_RNG_HPP
#define SUBFLOW_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace subflow {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic sub-seed for a named consumer of the run seed.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::uint64_t s = root ^ h;
  return splitmix64(s);
}

/// mt19937_64 with a hand-rolled uniform mapping, so that streams are pinned
/// by the standard rather than by the library's distribution implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Uniform integer in [a, b] via rejection-free modulo (bias is irrelevant
  /// for the small ranges used here but keep ranges modest).
  int uniform_int(int a, int b) {
    auto span = static_cast<std::uint64_t>(b - a) + 1;
    return a + static_cast<int>(eng_() % span);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace subflow

#endif  // SUBFLOW_RNG_HPP
