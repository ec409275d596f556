#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace rigidflow {

// Fixed-size worker pool running static-partitioned loops. Each index range
// is assigned to the same worker on every call, and callers only write to
// per-index slots, so results never depend on scheduling.
class ThreadPool {
 public:
  explicit ThreadPool(int threads = 0);
  ~ThreadPool();
  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int size() const { return static_cast<int>(workers_.size()) + 1; }

  // Calls body(begin, end) on disjoint chunks covering [0, n) and waits.
  void for_range(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

  template <class F>
  void for_each(std::size_t n, F&& f) {
    for_range(n, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) f(i);
    });
  }

 private:
  void worker_loop(int id);

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(std::size_t, std::size_t)>* job_ = nullptr;
  std::size_t job_n_ = 0;
  std::size_t generation_ = 0;
  int pending_ = 0;
  std::exception_ptr error_;
  bool stop_ = false;
};

// Process-wide pool used by the numerical kernels. Defaults to the hardware
// concurrency; set_thread_count replaces it.
ThreadPool& pool();
void set_thread_count(int threads);

}  // namespace rigidflow
