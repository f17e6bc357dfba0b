#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>

namespace dpe {

// Worker count: DPE_THREADS if set and positive, else hardware concurrency.
std::size_t default_workers();

// Runs body(i) for i in [0, count) on up to `workers` threads. Items are
// claimed dynamically, so callers must write only to per-item outputs.
// The first exception thrown by any item is rethrown after all threads join.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

// Sub-seed derivation by labeled hashing: every random stream in the
// project is keyed by (root seed, label, index).
std::uint64_t derive_seed(std::uint64_t root, std::string_view label, std::uint64_t index = 0);

}  // namespace dpe
