#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace otrelax {

// SplitMix64 finalizer. Used to derive independent sub-seeds from a root seed.
std::uint64_t mix64(std::uint64_t x);

// Hash a root seed together with a tuple of stream identifiers, e.g.
// derive_seed(seed, {replication, role, n}). Changing any component gives an
// unrelated stream; appending grid points never perturbs existing streams.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> stream);

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) { return Engine(mix64(seed)); }

}  // namespace otrelax
