#include "dav/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dav {

namespace {
std::atomic<int> g_workers{0};

int env_workers() {
  const char* s = std::getenv("DAVLAB_WORKERS");
  if (s) {
    int v = std::atoi(s);
    if (v > 0) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}
}  // namespace

int default_worker_count() {
  int w = g_workers.load(std::memory_order_relaxed);
  return w > 0 ? w : env_workers();
}

void set_default_worker_count(int workers) {
  g_workers.store(workers, std::memory_order_relaxed);
}

void parallel_chunks(std::size_t n, int workers,
                     const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  if (workers <= 0) workers = default_worker_count();
  std::size_t w = static_cast<std::size_t>(workers);
  if (w > n) w = n;
  if (w <= 1) {
    body(0, n);
    return;
  }

  std::exception_ptr first_error;
  std::size_t error_chunk = n;
  std::mutex error_mutex;

  std::vector<std::thread> threads;
  threads.reserve(w);
  for (std::size_t c = 0; c < w; ++c) {
    std::size_t begin = n * c / w;
    std::size_t end = n * (c + 1) / w;
    threads.emplace_back([&, c, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        // keep the exception from the lowest chunk so reruns agree
        if (c < error_chunk) {
          error_chunk = c;
          first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
  parallel_chunks(n, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) body(i);
  });
}

}  // namespace dav
