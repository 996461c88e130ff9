#ifndef ALAB_PARALLEL_HPP
#define ALAB_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace alab {

/// Evaluates fn(i) for i in [0, n) on a fixed pool of workers and returns the
/// results in index order. Workers pull indices from a shared counter; the
/// output does not depend on the worker count. If any call throws, the
/// exception from the smallest failing index is rethrown.
template <class F>
auto map_indices(std::size_t n, std::size_t workers, F&& fn) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  using R = std::invoke_result_t<F&, std::size_t>;
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const std::size_t pool = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (pool == 1) {
    work();
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(pool);
    for (std::size_t w = 0; w < pool; ++w) threads.emplace_back(work);
  }

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace alab

#endif  // ALAB_PARALLEL_HPP
