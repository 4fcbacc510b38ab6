#include "nsp/error.hpp"

namespace nsp {

void check_size(const char* what, std::size_t expected, std::size_t actual) {
  if (expected != actual) {
    throw InvalidArgument(std::string(what) + ": expected " + std::to_string(expected) +
                          ", got " + std::to_string(actual));
  }
}

}  // namespace nsp
