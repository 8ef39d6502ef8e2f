#pragma once

#include <functional>

namespace mfglq {

// Thread-count policy: set_threads(0) restores the default, which reads the
// MFGLQ_THREADS environment variable and falls back to the OpenMP runtime.
void set_threads(int n);
int resolved_threads();

// Runs body(i) for i in [0, n). The OpenMP path partitions iterations across
// threads; the serial path is a plain loop kept as the reference
// implementation. Both orderings must produce bitwise-identical results, so
// bodies may not accumulate into shared state. Exceptions thrown by the body
// are captured and rethrown on the calling thread.
void parallel_for(int n, const std::function<void(int)>& body);
void serial_for(int n, const std::function<void(int)>& body);

// Dispatches to serial_for when resolved_threads() == 1 or n is tiny.
void auto_for(int n, const std::function<void(int)>& body);

}  // namespace mfglq
