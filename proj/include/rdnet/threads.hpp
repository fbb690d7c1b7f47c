#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rdnet {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

inline bool in_parallel() {
#ifdef _OPENMP
  return omp_in_parallel() != 0;
#else
  return false;
#endif
}

// True when the parallel kernel variants should run: more than one thread is
// available and we are not already inside a parallel region.
inline bool use_parallel() { return max_threads() > 1 && !in_parallel(); }

// Pins execution to one thread for its lifetime (timing harness).
class SingleThreadScope {
 public:
  SingleThreadScope() : saved_(max_threads()) { set_threads(1); }
  ~SingleThreadScope() { set_threads(saved_); }
  SingleThreadScope(const SingleThreadScope&) = delete;
  SingleThreadScope& operator=(const SingleThreadScope&) = delete;

 private:
  int saved_;
};

}  // namespace rdnet
