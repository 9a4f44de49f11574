#pragma once

#include <cstddef>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace yatt::exec {

enum class Mode { serial, openmp };

Mode mode();
void set_mode(Mode m);

int thread_count();
void set_thread_count(int n);  // 0 = library default

/// Data-parallel loop over [0, n). Bodies must be independent per index and
/// must not throw; every kernel built on this reduces its results in a fixed
/// order afterwards, so serial and openmp modes produce bit-identical output.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
#ifdef _OPENMP
  if (mode() == Mode::openmp && n > 1) {
    const std::int64_t sn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (std::int64_t i = 0; i < sn; ++i) {
      fn(static_cast<std::size_t>(i));
    }
    return;
  }
#endif
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace yatt::exec
