#pragma once

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace thurston {

// Shared run parameters. Tolerances are pinned here so every entry point
// (library, CLI, tests) agrees on defaults.
struct RunConfig {
  int depth = 12;
  double convergence_tol = 1e-4;
  double cluster_gap = 1e-2;    // near-max cluster width for distance estimates
  double classify_gap = 1e-2;   // evidence gap for boundary classification
  double membership_tol = 0.0;  // 0 = adaptive (3x observed truncation slack)
  double width_tol_cells = 2.0;
  int threads = 0;  // 0 = hardware concurrency, capped by THURSTON_THREADS
  std::uint64_t seed = 0x5eed5eedULL;

  static RunConfig from_env() {
    RunConfig cfg;
    cfg.threads = thread_budget(0);
    return cfg;
  }

  static int thread_budget(int requested) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("THURSTON_THREADS")) {
      int cap = std::atoi(env);
      if (cap >= 1 && cap < n) n = cap;
    }
    return n;
  }
};

// Deterministic parallel map over [0, n): each index writes only its own
// results, so the outcome is identical for any thread count. The first
// exception a worker raises is rethrown on the calling thread.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  int budget = RunConfig::thread_budget(threads);
  if (budget <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t workers = std::min<std::size_t>(budget, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace thurston
