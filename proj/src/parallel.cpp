#include "ptycho/parallel.hpp"

#include <cstdlib>
#include <string>

#if defined(PTYCHO_USE_OPENMP)
#include <omp.h>
#endif

namespace ptycho {

int configure_threads()
{
#if defined(PTYCHO_USE_OPENMP)
    if (const char* env = std::getenv("PTYCHO_THREADS")) {
        const int n = std::stoi(env);
        if (n > 0) omp_set_num_threads(n);
    }
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace ptycho
