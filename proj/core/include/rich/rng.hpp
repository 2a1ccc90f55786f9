#pragma once

#include "rich/sparse.hpp"

#include <cstdint>

namespace rich {

/// splitmix64 generator; cheap, seedable, good enough for test RHS vectors.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform on the open interval (-0.5, 0.5).
    double uniform_centered() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53 - 0.5;
    }

  private:
    std::uint64_t state_;
};

/// Random right-hand side with components uniform on (-0.5, 0.5).
inline RealVector random_rhs(std::size_t n, std::uint64_t seed) {
    SplitMix64 rng(seed);
    RealVector b(n);
    for (double& v : b) v = rng.uniform_centered();
    return b;
}

} // namespace rich
