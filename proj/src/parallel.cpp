#include "itopics/parallel.hpp"

#include <omp.h>

namespace itopics {

int max_threads() noexcept { return omp_get_max_threads(); }

void set_num_threads(int n) noexcept {
  if (n > 0) omp_set_num_threads(n);
}

}  // namespace itopics
