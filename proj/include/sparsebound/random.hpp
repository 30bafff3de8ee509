#pragma once

// Seeded random streams. Every Monte Carlo trial draws from its own engine
// whose seed is a pure function of (base seed, trial index), so results do
// not depend on the order in which trials are executed.

#include <cstddef>
#include <cstdint>
#include <random>

#include "sparsebound/linalg.hpp"

namespace sparsebound {

using Engine = std::mt19937_64;

// splitmix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

inline Engine make_stream(std::uint64_t seed, std::uint64_t index) { return Engine(stream_seed(seed, index)); }

// Standard normals through std::normal_distribution. Reproducible within one
// build; not guaranteed identical across standard library implementations.
inline Vector gaussian_vector(Engine& rng, std::size_t len, double stddev) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(len);
    for (double& v : z) v = stddev * normal(rng);
    return z;
}

// Entries i.i.d. N(0, variance).
inline DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, double variance, std::uint64_t seed) {
    Engine rng = make_stream(seed, 0);
    return DenseMatrix(rows, cols, gaussian_vector(rng, rows * cols, std::sqrt(variance)));
}

}  // namespace sparsebound
