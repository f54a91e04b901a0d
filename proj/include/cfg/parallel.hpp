#pragma once

#include <cstddef>
#include <functional>

namespace cfg {

/// Worker cap: CFG_THREADS if set and positive, else the hardware concurrency.
int worker_count();

/// Runs body(begin, end) over contiguous chunks of [0, n). Every index is
/// visited exactly once; bodies must only write to slots they own.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace cfg
