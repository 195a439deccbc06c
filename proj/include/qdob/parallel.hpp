#pragma once

#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>

#include <omp.h>

namespace qdob::par {

enum class Policy { serial, openmp };

// Global thread budget. 0 means "use the OpenMP default".
// QDOB_THREADS overrides the default; an explicit set_threads() wins.
inline int& thread_override() {
  static int n = [] {
    if (const char* env = std::getenv("QDOB_THREADS")) {
      int v = std::atoi(env);
      if (v > 0) return v;
    }
    return 0;
  }();
  return n;
}

inline void set_threads(int n) { thread_override() = n > 0 ? n : 0; }

inline int threads() {
  int n = thread_override();
  return n > 0 ? n : omp_get_max_threads();
}

inline Policy default_policy() {
  return threads() > 1 ? Policy::openmp : Policy::serial;
}

// Runs fn(i) for i in [0, n). fn must write its result into a slot owned by
// index i; results are then identical for both policies, and any reduction
// is done by the caller as a serial fold in index order. An exception thrown
// by any index is captured and rethrown after the loop joins.
template <class Fn>
void run_indexed(std::size_t n, Fn&& fn, Policy policy) {
  if (policy == Policy::openmp) {
    const int nt = threads();
    std::exception_ptr first_error;
    std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic) num_threads(nt)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      try {
        fn(static_cast<std::size_t>(i));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
    if (first_error) std::rethrow_exception(first_error);
  } else {
    for (std::size_t i = 0; i < n; ++i) fn(i);
  }
}

template <class Fn>
void run_indexed(std::size_t n, Fn&& fn) {
  run_indexed(n, static_cast<Fn&&>(fn), default_policy());
}

}  // namespace qdob::par
