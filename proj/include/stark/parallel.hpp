#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace stark {

inline std::atomic<unsigned>& worker_override() {
  static std::atomic<unsigned> n{0};
  return n;
}

/// Worker count for parallel sweeps: 0 restores the default.
inline void set_default_workers(unsigned n) { worker_override() = n; }

/// The value set by set_default_workers, else the machine's hardware concurrency (at least 1).
inline unsigned default_workers() {
  const unsigned n = worker_override();
  return n > 0 ? n : std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates fn(i) for i in [0, n) on up to `workers` threads and returns the
/// results in index order. The first exception (lowest index) is rethrown.
template <class Fn>
auto parallel_map(std::size_t n, unsigned workers, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace stark
