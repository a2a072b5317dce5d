#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace altune {

// mt19937_64 is fully specified by the standard; the distributions below are
// implemented here so that outputs do not depend on the standard library.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Stable 64-bit hash of a label (FNV-1a), used to key rng streams by name.
std::uint64_t hash_label(std::string_view label);

/// Child seed for the stream addressed by `path` under `base`. Adding a new
/// path never perturbs the seeds of existing ones.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path);

/// Uniform double in [0, 1).
double uniform01(Rng& rng);

/// Uniform integer in [0, n). n must be positive.
std::size_t uniform_index(Rng& rng, std::size_t n);

/// Standard normal draw (Box-Muller, one value per call).
double standard_normal(Rng& rng);

}  // namespace altune
