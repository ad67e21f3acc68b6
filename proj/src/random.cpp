#include "svsim/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "svsim/errors.hpp"

namespace svsim {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

void require_step(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw std::domain_error("time step must be positive");
}

// 1 - e^{-x}(1 + x); series below 0.1 where the direct form cancels.
double one_minus_exp_poly(double x) {
  if (x < 0.1) {
    double term = x * x;  // x^n / n!, starting at n = 2 with 1/2 folded in below
    double fact = 2.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int n = 2; n <= 10; ++n) {
      sum += sign * (n - 1) * term / fact;
      term *= x;
      fact *= (n + 1);
      sign = -sign;
    }
    return sum;
  }
  return -std::expm1(-x) - x * std::exp(-x);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, ctr[0], hi0, lo0);
    mulhilo(kM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t RngStream::next_u64() {
  if (has_cached_) {
    has_cached_ = false;
    ++pos_;
    return cached_;
  }
  const std::uint64_t block = pos_ / 2;
  const auto out = philox4x32(
      {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
       static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
      {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
  cached_ = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  has_cached_ = true;
  ++pos_;
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

double RngStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::gaussian() { return inverse_normal_cdf(uniform()); }

RngStream RngStream::child(std::uint64_t tag) const {
  return RngStream(seed_, splitmix64(stream_ ^ splitmix64(tag ^ 0x5851F42D4C957F2Dull)));
}

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw std::domain_error("inverse_normal_cdf: p outside [0, 1]");
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
                45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
                21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
               1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
               0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
               0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
               7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

PathStreams path_streams(const RngStream& path_rng) {
  return {path_rng.child(1), path_rng.child(2), path_rng.child(3), path_rng.child(4)};
}

JointIncrement joint_w_from_normals(double delta, double g1, double g2) {
  require_step(delta);
  const double s = std::sqrt(delta);
  const double d32 = delta * s;
  return {s * g1, 0.5 * d32 * g1 + d32 / (2.0 * std::sqrt(3.0)) * g2};
}

JointIncrement joint_w_integral(double delta, RngStream& rng) {
  require_step(delta);
  const double g1 = rng.gaussian();
  const double g2 = rng.gaussian();
  return joint_w_from_normals(delta, g1, g2);
}

OUCovariance ou_covariance(const OUParams& ou, double delta) {
  require_step(delta);
  const double k = ou.kappa, nu = ou.nu;
  const double x = k * delta;
  OUCovariance c{};
  c.c11 = nu * nu * (-std::expm1(-2.0 * x)) / (2.0 * k);
  c.c12 = nu * one_minus_exp_poly(x) / (k * k);
  c.c13 = nu * (-std::expm1(-x)) / k;
  c.c22 = delta * delta * delta / 3.0;
  c.c23 = delta * delta / 2.0;
  c.c33 = delta;
  return c;
}

OUJointDraw ou_exact_joint(const OUParams& ou, double y, double delta, RngStream& rng) {
  const OUCovariance c = ou_covariance(ou, delta);
  const double l11 = std::sqrt(std::max(c.c11, 0.0));
  double l21 = 0.0;
  if (l11 > 0.0) {
    // correlation clipped to [-1, 1]
    const double corr = std::clamp(c.c12 / (l11 * std::sqrt(c.c22)), -1.0, 1.0);
    l21 = corr * std::sqrt(c.c22);
  }
  const double l22 = std::sqrt(std::max(c.c22 - l21 * l21, 0.0));
  const double g1 = rng.gaussian();
  const double g2 = rng.gaussian();
  return {ou_transition(ou, y, delta, l11 * g1), l21 * g1 + l22 * g2};
}

double ou_transition(const OUParams& ou, double y, double delta, double noise) {
  const double e = std::exp(-ou.kappa * delta);
  return e * y + ou.theta * (-std::expm1(-ou.kappa * delta)) + noise;
}

WStepSampler::WStepSampler(const std::optional<OUParams>& ou, double delta) : delta_(delta), ou_(ou.has_value()) {
  require_step(delta);
  if (!ou_) {
    const double s = std::sqrt(delta);
    l11_ = s;
    l21_ = 0.5 * delta * s;
    l22_ = delta * s / (2.0 * std::sqrt(3.0));
    return;
  }
  // order (ouNoise, iW, dW)
  const OUCovariance c = ou_covariance(*ou, delta);
  l11_ = std::sqrt(std::max(c.c11, 0.0));
  l21_ = l11_ > 0.0 ? c.c12 / l11_ : 0.0;
  l31_ = l11_ > 0.0 ? c.c13 / l11_ : 0.0;
  const double p2 = c.c22 - l21_ * l21_;
  l22_ = p2 > 0.0 ? std::sqrt(p2) : 0.0;
  l32_ = l22_ > 0.0 ? (c.c23 - l31_ * l21_) / l22_ : 0.0;
  const double p3 = c.c33 - l31_ * l31_ - l32_ * l32_;
  l33_ = p3 > 0.0 ? std::sqrt(p3) : 0.0;
}

WStep WStepSampler::from_normals(double g1, double g2, double g3) const {
  if (!ou_) return {l11_ * g1, l21_ * g1 + l22_ * g2, 0.0};
  return {l31_ * g1 + l32_ * g2 + l33_ * g3, l21_ * g1 + l22_ * g2, l11_ * g1};
}

WStep WStepSampler::draw(RngStream& rng) const {
  const double g1 = rng.gaussian();
  const double g2 = rng.gaussian();
  const double g3 = ou_ ? rng.gaussian() : 0.0;
  return from_normals(g1, g2, g3);
}

WStep coarsen(const WStep& first, const WStep& second, double h, const std::optional<OUParams>& ou) {
  WStep out;
  out.dW = first.dW + second.dW;
  out.iW = first.iW + second.iW + h * first.dW;
  out.ouNoise = ou ? std::exp(-ou->kappa * h) * first.ouNoise + second.ouNoise : 0.0;
  return out;
}

std::vector<WStep> draw_w_path(const std::optional<OUParams>& ou, int n, double delta, RngStream& rng) {
  const WStepSampler sampler(ou, delta);
  std::vector<WStep> out(static_cast<std::size_t>(n));
  for (auto& w : out) w = sampler.draw(rng);
  return out;
}

std::vector<WStep> coarsen_path(std::span<const WStep> fine, double h, const std::optional<OUParams>& ou) {
  if (fine.size() % 2 != 0) throw std::invalid_argument("coarsen_path needs an even number of steps");
  std::vector<WStep> out(fine.size() / 2);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = coarsen(fine[2 * k], fine[2 * k + 1], h, ou);
  return out;
}

}  // namespace svsim
