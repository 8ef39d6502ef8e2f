#include "mfglq/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>

namespace mfglq {

namespace {

int g_threads = 0;  // 0 = unset, consult environment then OpenMP default

int env_threads() {
  const char* s = std::getenv("MFGLQ_THREADS");
  if (s == nullptr || *s == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(s, &end, 10);
  if (end == nullptr || *end != '\0' || v < 1) return 0;
  return static_cast<int>(v);
}

}  // namespace

void set_threads(int n) { g_threads = n > 0 ? n : 0; }

int resolved_threads() {
  if (g_threads > 0) return g_threads;
  const int e = env_threads();
  if (e > 0) return e;
  return omp_get_max_threads();
}

void serial_for(int n, const std::function<void(int)>& body) {
  for (int i = 0; i < n; ++i) body(i);
}

void parallel_for(int n, const std::function<void(int)>& body) {
  const int threads = resolved_threads();
  std::exception_ptr err = nullptr;
  std::atomic<bool> failed{false};
#pragma omp parallel for schedule(static) num_threads(threads)
  for (int i = 0; i < n; ++i) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      body(i);
    } catch (...) {
      bool expected = false;
      if (failed.compare_exchange_strong(expected, true)) {
        err = std::current_exception();
      }
    }
  }
  if (err) std::rethrow_exception(err);
}

void auto_for(int n, const std::function<void(int)>& body) {
  if (n < 2 || resolved_threads() == 1) {
    serial_for(n, body);
  } else {
    parallel_for(n, body);
  }
}

}  // namespace mfglq
