#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <thread>
#include <vector>

namespace relipop {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Streaming log-sum-exp accumulator: add(log x) terms, read back log(sum x).
class LogSum {
 public:
  void add(double log_term) {
    if (log_term == kNegInf) return;
    if (acc_ == kNegInf) {
      acc_ = log_term;
    } else if (log_term <= acc_) {
      acc_ += std::log1p(std::exp(log_term - acc_));
    } else {
      acc_ = log_term + std::log1p(std::exp(acc_ - log_term));
    }
  }
  double value() const { return acc_; }

 private:
  double acc_ = kNegInf;
};

inline std::uint64_t ceil_to_u64(double x) {
  double c = std::ceil(x);
  return c <= 0 ? 0 : static_cast<std::uint64_t>(c);
}

// Runs body(worker, begin, end) over a static partition of [0, count).
// Each worker owns one contiguous slice, so per-index work that derives all
// randomness from the index itself gives identical results for any thread
// count.  Reductions must combine per-worker results in worker order.
template <typename Body>
void parallel_for(std::uint64_t count, unsigned threads, Body&& body) {
  if (count == 0) return;
  std::uint64_t workers = threads == 0 ? 1 : threads;
  if (workers > count) workers = count;
  if (workers == 1) {
    body(0u, std::uint64_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    std::uint64_t begin = count * w / workers;
    std::uint64_t end = count * (w + 1) / workers;
    pool.emplace_back([&body, w, begin, end] { body(w, begin, end); });
  }
  for (auto& t : pool) t.join();
}

inline unsigned worker_count(std::uint64_t count, unsigned threads) {
  std::uint64_t workers = threads == 0 ? 1 : threads;
  if (workers > count) workers = count == 0 ? 1 : count;
  return static_cast<unsigned>(workers);
}

}  // namespace relipop
