#include "nsp/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>

namespace nsp {
namespace {

int read_env() {
  const char* env = std::getenv("NSP_THREADS");
  if (env == nullptr) return 1;
  try {
    return std::max(1, std::stoi(env));
  } catch (const std::exception&) {
    return 1;
  }
}

std::atomic<int>& current() {
  static std::atomic<int> count{read_env()};
  return count;
}

}  // namespace

int thread_count() { return current().load(std::memory_order_relaxed); }

void set_thread_count(int n) { current().store(std::max(1, n), std::memory_order_relaxed); }

}  // namespace nsp
