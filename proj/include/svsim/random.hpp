#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "svsim/model.hpp"

namespace svsim {

// Philox4x32-10 block function (Salmon et al. 2011).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based stream. Variate i of stream (seed, id) is a pure function of
/// (seed, id, i); child() derives a statistically independent stream.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  double gaussian();

  RngStream child(std::uint64_t tag) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  // Number of 64-bit words consumed so far.
  std::uint64_t position() const { return pos_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t pos_ = 0;
  std::uint64_t cached_ = 0;
  bool has_cached_ = false;
};

// Inverse of the standard normal CDF (Wichura AS241, ~1e-16 relative).
double inverse_normal_cdf(double p);

/// Per-path sub-streams. Draw order contract: factor (W) draws come from w,
/// B increments from b, the terminal normal from g, bridge uniforms from u.
struct PathStreams {
  RngStream w, b, g, u;
};
PathStreams path_streams(const RngStream& path_rng);

/// (dW, int_0^delta (W_s - W_0) ds) over one step.
struct JointIncrement {
  double dW = 0.0;
  double iW = 0.0;
};

JointIncrement joint_w_from_normals(double delta, double g1, double g2);
JointIncrement joint_w_integral(double delta, RngStream& rng);

struct OUJointDraw {
  double yNext = 0.0;
  double iW = 0.0;
};

/// Covariance of (nu int e^{-kappa(delta-s)} dW_s, int (W_s - W_0) ds, dW)
/// over one step of length delta.
struct OUCovariance {
  double c11, c12, c13, c22, c23, c33;
};
OUCovariance ou_covariance(const OUParams& ou, double delta);

OUJointDraw ou_exact_joint(const OUParams& ou, double y, double delta, RngStream& rng);

/// Exact OU transition given the stochastic-integral part of the step.
double ou_transition(const OUParams& ou, double y, double delta, double noise);

/// Everything a scheme needs from the factor's Brownian motion W on one step.
/// ouNoise is nu int e^{-kappa(delta-s)} dW_s (zero for non-OU specs).
struct WStep {
  double dW = 0.0;
  double iW = 0.0;
  double ouNoise = 0.0;
};

/// Draws WSteps of a fixed length. OU-backed specs use a 3x3 Cholesky factor
/// (three normals per step), others the 2x2 factor of JointIncrement.
class WStepSampler {
 public:
  WStepSampler(const std::optional<OUParams>& ou, double delta);

  WStep draw(RngStream& rng) const;
  WStep from_normals(double g1, double g2, double g3) const;
  double delta() const { return delta_; }
  bool ou() const { return ou_; }

 private:
  double delta_;
  bool ou_;
  // lower-triangular factor, row-major
  double l11_ = 0, l21_ = 0, l22_ = 0, l31_ = 0, l32_ = 0, l33_ = 0;
};

// Merges two consecutive fine steps of length h into one coarse step.
WStep coarsen(const WStep& first, const WStep& second, double h, const std::optional<OUParams>& ou);

std::vector<WStep> draw_w_path(const std::optional<OUParams>& ou, int n, double delta, RngStream& rng);
std::vector<WStep> coarsen_path(std::span<const WStep> fine, double h, const std::optional<OUParams>& ou);

}  // namespace svsim
