// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

namespace qmce {

/// Worker-thread count from QMCE_WORKERS (default 1), read once.
int worker_count();

/// Runs fn(0..n-1) with static partitioning over `workers` threads.
/// Iterations must write to disjoint slots; callers reduce serially
/// afterwards, so results do not depend on scheduling.
void parallel_for(long n, int workers, const std::function<void(long)>& fn);

} // namespace qmce
