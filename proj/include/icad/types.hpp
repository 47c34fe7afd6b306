#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "icad/error.hpp"

namespace icad {

/// One fixed-length observation (a flattened frame). Entries must be finite.
using Example = std::vector<double>;
using Dataset = std::vector<Example>;

inline void require_finite(std::span<const double> values, const std::string& what) {
  for (double v : values) require(std::isfinite(v), Errc::non_finite, what + " contains a non-finite value");
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), Errc::dimension_mismatch,
          "vectors of length " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

/// splitmix64 finalizer; derives independent stream seeds from (seed, index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace icad
