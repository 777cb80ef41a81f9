#pragma once

#include <cstddef>
#include <functional>

namespace curlvar {

// Worker count for independent tasks: the value given to set_thread_count
// when positive, else CURLVAR_THREADS when set to a positive integer, else the
// hardware concurrency (at least 1).
int thread_count();

// Process-wide override; 0 restores the default lookup.
void set_thread_count(int n);

// Runs task(0) ... task(n - 1) on up to thread_count() threads. Every task
// must write only its own output slot. The first exception thrown by a task is
// rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task);

}  // namespace curlvar
