#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace morse {

/// Global comparison tolerance: every `a <= b` check is done as `a <= b + kTolerance`.
inline constexpr double kTolerance = 1e-9;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

using Rng = std::mt19937_64;

/// Base error for invalid inputs and violated preconditions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented hypothesis of an operation does not hold for the given input.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

inline bool leq(double a, double b, double tol = kTolerance) { return a <= b + tol; }

// splitmix64 finalizer
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent RNG stream for trial `index` under `master`; schedule-independent.
inline Rng stream_rng(std::uint64_t master, std::uint64_t index) {
  return Rng(mix_seed(mix_seed(master) ^ mix_seed(index + 0x632be59bd9b4e019ULL)));
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace morse
