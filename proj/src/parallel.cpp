#include "uplift_zero/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace uplift_zero {

int worker_count() {
  if (const char* env = std::getenv("UPLIFT_ZERO_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return omp_get_max_threads();
}

void configure_threads_from_env() { omp_set_num_threads(worker_count()); }

}  // namespace uplift_zero
