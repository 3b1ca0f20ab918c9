#pragma once

#include <cstdint>
#include <random>

namespace gridh2 {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed for sub-stream `stream` of item `index` under `master`. Each
/// (master, index, stream) triple maps to an independent engine, so results
/// do not depend on the order in which items are processed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t stream = 0);

Rng make_rng(std::uint64_t master, std::uint64_t index, std::uint64_t stream = 0);

/// exp(U(log lo, log hi)).
double log_uniform(Rng& rng, double lo, double hi);

}  // namespace gridh2
