#include "svsim/stats.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace svsim {

void RunningStats::merge(const RunningStats& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double n1 = static_cast<double>(n_), n2 = static_cast<double>(o.n_);
  const double d = o.mean_ - mean_;
  const double n = n1 + n2;
  mean_ += d * n2 / n;
  m2_ += o.m2_ + d * d * n1 * n2 / n;
  n_ += o.n_;
}

double RunningStats::stderr_mean() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

MeanCI mean_ci(const RunningStats& s) {
  if (s.count() < 2) throw std::invalid_argument("need at least two samples");
  const double se = s.stderr_mean();
  return {s.mean(), se, 1.96 * se};
}

MeanCI mc_mean_ci(std::span<const double> samples) {
  RunningStats s;
  for (double x : samples) s.add(x);
  return mean_ci(s);
}

RegressionResult loglog_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw std::invalid_argument("regression needs at least two points");
  RegressionResult out;
  double sx = 0, sy = 0;
  for (const auto& [n, v] : points) {
    if (!(n > 0.0) || !(v > 0.0)) throw std::domain_error("log-log regression needs positive values");
    out.points.emplace_back(std::log(n), std::log(v));
    sx += out.points.back().first;
    sy += out.points.back().second;
  }
  const double m = static_cast<double>(points.size());
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : out.points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("regression needs distinct N values");
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.r2 = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return out;
}

double kolmogorov_tail(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // P(K <= lambda) = sqrt(2 pi) / lambda sum exp(-(2j-1)^2 pi^2 / (8 lambda^2))
    const double c = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double cdf = 0.0;
    for (int j = 1; j <= 6; ++j) cdf += std::exp((2 * j - 1) * (2 * j - 1) * c);
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * cdf, 0.0, 1.0);
  }
  double tail = 0.0, sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    tail += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * tail, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_test needs samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double D = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = cdf(samples[i]);
    D = std::max({D, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
  }
  const double sn = std::sqrt(n);
  return {D, kolmogorov_tail((sn + 0.12 + 0.11 / sn) * D)};
}

std::size_t worker_count() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

}  // namespace svsim
