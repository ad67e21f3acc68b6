#include "svsim/primitive.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "svsim/errors.hpp"

namespace svsim {

namespace {
constexpr double kMaxReach = 1.0e4;
constexpr double kCellTolerance = 1.0e-13;
}  // namespace

PrimitiveTable::PrimitiveTable(ScalarFn integrand, double step) : g_(std::move(integrand)), step_(step) {
  if (!g_) throw ConfigError("primitive table needs an integrand");
  if (!(step_ > 0.0)) throw ConfigError("primitive table step must be positive");
  const double g0 = g_(0.0);
  pos_.value = {0.0};
  pos_.slope = {g0};
  neg_.value = {0.0};
  neg_.slope = {g0};
  extend(pos_, 1.0, 8 * 128);
  extend(neg_, -1.0, 8 * 128);
}

void PrimitiveTable::extend(Side& side, double direction, std::size_t nodes) const {
  using Quad = boost::math::quadrature::gauss_kronrod<double, 21>;
  side.value.reserve(nodes);
  side.slope.reserve(nodes);
  while (side.value.size() < nodes) {
    const std::size_t i = side.value.size() - 1;
    const double a = direction * step_ * static_cast<double>(i);
    const double b = direction * step_ * static_cast<double>(i + 1);
    const double cell = Quad::integrate(g_, a, b, 10, kCellTolerance);
    side.value.push_back(side.value.back() + cell);
    side.slope.push_back(g_(b));
  }
}

double PrimitiveTable::interpolate(const Side& side, double direction, double distance) const {
  const double pos = distance / step_;
  const auto i = static_cast<std::size_t>(pos);
  const double t = pos - static_cast<double>(i);
  if (i + 1 >= side.value.size()) return side.value.back();
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  // Slopes are d/dy; along the negative side the local coordinate runs backwards.
  const double dy = direction * step_;
  return h00 * side.value[i] + h10 * dy * side.slope[i] + h01 * side.value[i + 1] +
         h11 * dy * side.slope[i + 1];
}

double PrimitiveTable::operator()(double y) const {
  if (!std::isfinite(y) || std::abs(y) > kMaxReach) {
    throw std::domain_error("primitive evaluated outside its supported range");
  }
  const double direction = y >= 0.0 ? 1.0 : -1.0;
  const double distance = std::abs(y);
  const auto needed = static_cast<std::size_t>(distance / step_) + 2;
  {
    std::shared_lock lock(mutex_);
    const Side& side = y >= 0.0 ? pos_ : neg_;
    if (side.value.size() >= needed) return interpolate(side, direction, distance);
  }
  std::unique_lock lock(mutex_);
  Side& side = y >= 0.0 ? pos_ : neg_;
  if (side.value.size() < needed) extend(side, direction, needed + 128);
  return interpolate(side, direction, distance);
}

}  // namespace svsim
