#pragma once

#include <cstddef>
#include <functional>

namespace dnff {

// Worker count for the documented parallel regions (per-frame gradients and
// per-frame evaluation). Results never depend on this value: every parallel
// loop writes to per-index slots that are reduced in index order.
void set_num_threads(std::size_t n);
std::size_t num_threads();

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace dnff
