#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace sgp {

using Rng = std::mt19937_64;

/// Named sub-stream of a master seed. The same (seed, path) always yields the
/// same generator, independent of the order in which streams are created.
Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {});

/// Stable 64-bit FNV-1a hash, used to turn identifiers into stream keys.
std::uint64_t stable_hash(std::string_view text);

} // namespace sgp
