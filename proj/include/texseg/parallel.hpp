#pragma once

#include <cstdint>
#include <functional>

namespace texseg::par {

/// Process-global worker cap. Default 1; results are identical for any cap
/// because chunk boundaries and combine order never depend on it.
void set_max_threads(int n);
int max_threads();

/// Invokes body(begin, end) on disjoint contiguous ranges covering [0, count).
/// Bodies may write to disjoint output slots; they must not share accumulators.
void parallel_for(std::int64_t count,
                  const std::function<void(std::int64_t, std::int64_t)>& body);

}  // namespace texseg::par
