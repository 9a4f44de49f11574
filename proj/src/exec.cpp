#include "yatt/exec.hpp"

#include <atomic>

namespace yatt::exec {

namespace {
std::atomic<Mode> g_mode{Mode::openmp};
std::atomic<int> g_threads{0};
}  // namespace

Mode mode() { return g_mode.load(std::memory_order_relaxed); }

void set_mode(Mode m) { g_mode.store(m, std::memory_order_relaxed); }

int thread_count() {
  int n = g_threads.load(std::memory_order_relaxed);
  if (n > 0) return n;
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_thread_count(int n) { g_threads.store(n < 0 ? 0 : n, std::memory_order_relaxed); }

}  // namespace yatt::exec
