#include "vrcp/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace vrcp {

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  std::exception_ptr error;
  std::size_t error_index = n;
  std::mutex mu;
  auto record = [&](std::size_t i) {
    std::lock_guard lock(mu);
    if (i < error_index) {
      error_index = i;
      error = std::current_exception();
    }
  };
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        record(i);
        break;
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            record(i);
          }
        }
      });
    for (std::thread& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace vrcp
