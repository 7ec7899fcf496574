#include "flatmin/parallel.hpp"

#include <cstdlib>
#include <string>

namespace flatmin {

std::size_t configured_threads() {
  if (const char* env = std::getenv("FLATMIN_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n > 0) return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
      // fall through to the machine default
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace flatmin
