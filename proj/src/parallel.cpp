#include "cgolab/parallel.hpp"

#include <cstdlib>
#include <string>

#include "cgolab/errors.hpp"

namespace cgolab {

int default_workers() {
  if (const char* env = std::getenv("CGOLAB_WORKERS"); env != nullptr && *env != '\0') {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("CGOLAB_WORKERS must be a positive integer, got '") + env + "'");
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace cgolab
