#pragma once

#include <cstdint>
#include <functional>

namespace tsxai {

// Process-wide worker count for parallel_for.  0 means "ask the OS".
void set_jobs(int n);
int jobs();

// Runs fn(i) for every i in [0, n).  The contract that keeps outputs
// byte-identical for any worker count: fn(i) must write only to slot i of
// whatever output it fills, and any cross-slot reduction happens afterwards
// in index order on the calling thread.  First exception wins and is
// rethrown after all workers join.
void parallel_for(int64_t n, const std::function<void(int64_t)>& fn);

}  // namespace tsxai
