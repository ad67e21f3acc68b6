#pragma once

#include <shared_mutex>
#include <vector>

#include "svsim/model.hpp"

namespace svsim {

/// Primitive G(y) = int_0^y g(z) dz of a smooth integrand, tabulated on a
/// uniform grid by adaptive Gauss-Kronrod quadrature and interpolated with
/// cubic Hermite polynomials (node slopes are g itself, so the interpolant
/// is fourth-order accurate). The table grows on demand in both directions;
/// lookups are thread-safe.
class PrimitiveTable {
 public:
  explicit PrimitiveTable(ScalarFn integrand, double step = 1.0 / 128.0);

  double operator()(double y) const;

  double step() const { return step_; }

 private:
  // Node i of the positive side is at +i*step, of the negative side at -i*step.
  struct Side {
    std::vector<double> value;
    std::vector<double> slope;
  };

  void extend(Side& side, double direction, std::size_t nodes) const;
  double interpolate(const Side& side, double direction, double distance) const;

  ScalarFn g_;
  double step_;
  mutable std::shared_mutex mutex_;
  mutable Side pos_;
  mutable Side neg_;
};

}  // namespace svsim
