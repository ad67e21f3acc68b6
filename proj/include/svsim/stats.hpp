#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <utility>
#include <vector>

namespace svsim {

/// Mean and second central moment (Welford), mergeable (Chan et al.).
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  void merge(const RunningStats& o);

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  // Unbiased sample variance (0 below two samples).
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stderr_mean() const;
  double sum() const { return mean_ * static_cast<double>(n_); }
  double sum_sq() const { return m2_ + mean_ * mean_ * static_cast<double>(n_); }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct MeanCI {
  double mean = 0.0;
  double stdErr = 0.0;
  double halfwidth95 = 0.0;
};

// Throws std::invalid_argument below two samples.
MeanCI mc_mean_ci(std::span<const double> samples);
MeanCI mean_ci(const RunningStats& s);

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<std::pair<double, double>> points;  // (ln N, ln value)
};

// Least squares of ln(value) on ln(N). Throws std::domain_error on
// nonpositive values and std::invalid_argument below two points.
RegressionResult loglog_slope(std::span<const std::pair<double, double>> points);

// Kolmogorov distribution tail P(K > lambda).
double kolmogorov_tail(double lambda);

struct KsResult {
  double D = 0.0;
  double pValue = 1.0;
};
KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

std::size_t worker_count();

/// Runs body(acc, begin, end) over [0, n) in fixed chunks on a pool of
/// threads; per-chunk accumulators are merged in chunk order, so the result
/// does not depend on scheduling. Acc needs a merge(const Acc&) member.
template <class Acc, class Body>
Acc chunked_reduce(std::size_t n, Body body, std::size_t chunk = 2048) {
  if (n == 0) return Acc{};
  chunk = std::max<std::size_t>(chunk, 1);
  const std::size_t nChunks = (n + chunk - 1) / chunk;
  std::vector<Acc> parts(nChunks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex errMutex;
  auto work = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= nChunks) return;
      try {
        body(parts[c], c * chunk, std::min(n, (c + 1) * chunk));
      } catch (...) {
        std::lock_guard lock(errMutex);
        if (!err) err = std::current_exception();
        next.store(nChunks);
        return;
      }
    }
  };
  const std::size_t nWorkers = std::min(worker_count(), nChunks);
  if (nWorkers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nWorkers - 1);
    for (std::size_t i = 0; i + 1 < nWorkers; ++i) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);
  Acc total{};
  for (const auto& p : parts) total.merge(p);
  return total;
}

}  // namespace svsim
