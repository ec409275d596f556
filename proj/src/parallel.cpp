#include "rigidflow/parallel.hpp"

#include <algorithm>
#include <memory>

namespace rigidflow {

namespace {

std::pair<std::size_t, std::size_t> chunk(std::size_t n, int parts, int id) {
  const std::size_t base = n / static_cast<std::size_t>(parts);
  const std::size_t rem = n % static_cast<std::size_t>(parts);
  const auto uid = static_cast<std::size_t>(id);
  const std::size_t begin = uid * base + std::min(uid, rem);
  return {begin, begin + base + (uid < rem ? 1 : 0)};
}

std::unique_ptr<ThreadPool>& global_pool() {
  static std::unique_ptr<ThreadPool> p;
  return p;
}

}  // namespace

ThreadPool::ThreadPool(int threads) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  for (int i = 1; i < threads; ++i) workers_.emplace_back([this, i] { worker_loop(i); });
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  start_cv_.notify_all();
  for (auto& w : workers_) w.join();
}

void ThreadPool::for_range(std::size_t n,
                           const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  const int parts = size();
  if (parts == 1 || n < 64) {
    body(0, n);
    return;
  }
  {
    std::lock_guard lock(mutex_);
    job_ = &body;
    job_n_ = n;
    pending_ = parts - 1;
    ++generation_;
  }
  start_cv_.notify_all();
  std::exception_ptr local;
  auto [b, e] = chunk(n, parts, 0);
  try {
    body(b, e);
  } catch (...) {
    local = std::current_exception();
  }
  std::unique_lock lock(mutex_);
  done_cv_.wait(lock, [this] { return pending_ == 0; });
  job_ = nullptr;
  // Errors from the calling thread (lowest indices) take precedence.
  if (!local) local = error_;
  error_ = nullptr;
  if (local) std::rethrow_exception(local);
}

void ThreadPool::worker_loop(int id) {
  std::size_t seen = 0;
  for (;;) {
    const std::function<void(std::size_t, std::size_t)>* job;
    std::size_t n;
    {
      std::unique_lock lock(mutex_);
      start_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      job = job_;
      n = job_n_;
    }
    auto [b, e] = chunk(n, size(), id);
    std::exception_ptr err;
    try {
      if (b < e) (*job)(b, e);
    } catch (...) {
      err = std::current_exception();
    }
    {
      std::lock_guard lock(mutex_);
      if (err && !error_) error_ = err;
      --pending_;
    }
    done_cv_.notify_one();
  }
}

ThreadPool& pool() {
  auto& p = global_pool();
  if (!p) p = std::make_unique<ThreadPool>();
  return *p;
}

void set_thread_count(int threads) { global_pool() = std::make_unique<ThreadPool>(threads); }

}  // namespace rigidflow
