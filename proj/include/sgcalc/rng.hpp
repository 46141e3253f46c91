#pragma once

#include "sgcalc/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace sgcalc {

/// Derives an independent generator from a root seed and a label, so that
/// every consumer of randomness gets a stream that does not depend on the
/// order in which other consumers draw.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t label_hash(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::mt19937_64 substream(std::uint64_t seed, std::string_view label) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(label_hash(label))));
}

/// Standard normal samples via Box-Muller on the raw 64-bit stream; unlike
/// std::normal_distribution the sequence is fixed across standard libraries.
class NormalSampler {
 public:
  explicit NormalSampler(std::mt19937_64& gen) : gen_(gen) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double rad = std::sqrt(-2.0 * std::log(u1));
    double ang = 2.0 * 3.14159265358979323846 * u2;
    spare_ = rad * std::sin(ang);
    has_spare_ = true;
    return rad * std::cos(ang);
  }

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64& gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline Field normal_field(std::mt19937_64& gen, Eigen::Index n) {
  NormalSampler normal(gen);
  Field f(n);
  for (Eigen::Index i = 0; i < n; ++i) f[i] = normal();
  return f;
}

inline Block normal_block(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols) {
  NormalSampler normal(gen);
  Block b(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) b(i, j) = normal();
  return b;
}

}  // namespace sgcalc
