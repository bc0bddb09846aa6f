#include "isirate/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace isirate {

int configure_threads() {
  if (const char* env = std::getenv("ISIRL_THREADS")) {
    try {
      int n = std::stoi(env);
      if (n > 0 && n < omp_get_max_threads()) omp_set_num_threads(n);
    } catch (...) {
    }
  }
  return omp_get_max_threads();
}

int thread_count() { return omp_get_max_threads(); }

}  // namespace isirate
