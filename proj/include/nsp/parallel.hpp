#pragma once

namespace nsp {

// Number of OpenMP threads the kernels may use. Read once from NSP_THREADS
// (default 1); set_thread_count() overrides it for the rest of the process.
int thread_count();
void set_thread_count(int n);

// Scoped override, restores the previous count on destruction.
class ThreadCountGuard {
 public:
  explicit ThreadCountGuard(int n) : previous_(thread_count()) { set_thread_count(n); }
  ~ThreadCountGuard() { set_thread_count(previous_); }
  ThreadCountGuard(const ThreadCountGuard&) = delete;
  ThreadCountGuard& operator=(const ThreadCountGuard&) = delete;

 private:
  int previous_;
};

}  // namespace nsp
