#pragma once

#include <cstddef>
#include <functional>

namespace heisfan {

/// Worker count used by parallel_for; 0 restores the default (hardware concurrency).
void set_thread_count(int n);
int thread_count();

/// Calls body(begin, end) on disjoint chunks covering [0, n). Chunks are
/// assigned statically, so results written per index do not depend on timing.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace heisfan
