#include "hjbpath/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hjbpath {

namespace {
#ifdef _OPENMP
const int kDefaultThreads = omp_get_max_threads();
#endif
}  // namespace

void set_num_threads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(n >= 1 ? n : kDefaultThreads);
#else
  (void)n;
#endif
}

int num_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace hjbpath
