#include "confspec/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace confspec {

int configure_threads_from_env() {
  if (const char* env = std::getenv("CONFSPEC_THREADS")) {
    try {
      const int threads = std::stoi(env);
      if (threads > 0) omp_set_num_threads(threads);
    } catch (const std::exception&) {
      // ignore malformed values, keep the runtime default
    }
  }
  return omp_get_max_threads();
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace confspec
