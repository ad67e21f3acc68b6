#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "svsim/coupling.hpp"
#include "svsim/errors.hpp"
#include "svsim/stats.hpp"

using namespace svsim;

TEST_CASE("weighted_db") {
  CHECK(weighted_db(0.3, 0.3, 0.1, -0.4) == doctest::Approx(-0.3));
  CHECK(weighted_db(0.0, 0.0, 0.1, -0.4) == doctest::Approx(-0.3));
  CHECK(weighted_db(1.0, 0.0, 0.1, -0.4) == doctest::Approx(std::sqrt(2.0) * 0.1));

  // conditional variance 2h whatever the weights
  RngStream r(1);
  const double h = 0.125;
  for (auto [v1, v2] : {std::pair{0.2, 0.7}, std::pair{1.0, 0.01}}) {
    RunningStats s;
    for (int i = 0; i < 200000; ++i) {
      const double d1 = std::sqrt(h) * r.gaussian(), d2 = std::sqrt(h) * r.gaussian();
      s.add(weighted_db(v1, v2, d1, d2));
    }
    CHECK(s.variance() == doctest::Approx(2 * h).epsilon(0.01));
  }
}

TEST_CASE("weighted_half_db") {
  CHECK(weighted_half_db(0.4, 0.4, 0.1, -0.3) == doctest::Approx(0.1));
  CHECK(weighted_half_db(0.0, 0.0, 0.1, -0.3) == doctest::Approx(0.1));

  // dB~ - dB~~ is independent of dB~~ and has variance h
  RngStream r(2);
  const double h = 0.05, v1 = 0.3, v2 = 0.8;
  double sxy = 0, sx = 0, sy = 0, sxx = 0, syy = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double d1 = std::sqrt(h) * r.gaussian(), d2 = std::sqrt(h) * r.gaussian();
    const double half = weighted_half_db(v1, v2, d1, d2);
    const double rest = weighted_db(v1, v2, d1, d2) - half;
    sx += rest;
    sy += half;
    sxy += rest * half;
    sxx += rest * rest;
    syy += half * half;
  }
  const double cov = sxy / n - sx / n * sy / n;
  const double vx = sxx / n - sx / n * sx / n, vy = syy / n - sy / n * sy / n;
  CHECK(std::abs(cov / std::sqrt(vx * vy)) < 4 / std::sqrt(double(n)));
  CHECK(vx == doctest::Approx(h).epsilon(0.02));
  CHECK(vy == doctest::Approx(h).epsilon(0.02));
}

TEST_CASE("bridge_min") {
  CHECK(bridge_min(100, 101, 0.0625, 0.125, 1.0) == doctest::Approx(100));
  CHECK(bridge_min(102, 101, 0.0, 0.125, 0.3) == doctest::Approx(101));
  const double want = 0.5 * (201 - std::sqrt(1 + 2 * 1e4 * 0.0625 * 0.125 * std::log(2.0)));
  CHECK(bridge_min(100, 101, 0.0625, 0.125, 0.5) == doctest::Approx(want).epsilon(1e-14));
  CHECK(want <= 100);
  CHECK_THROWS_AS(bridge_min(100, 101, 0.0625, 0.125, 0.0), std::domain_error);
  RngStream r(3);
  for (int i = 0; i < 10000; ++i) {
    const double a = 50 + 100 * r.uniform(), b = 50 + 100 * r.uniform();
    REQUIRE(bridge_min(a, b, r.uniform(), r.uniform(), r.uniform()) <= std::min(a, b));
  }
}

TEST_CASE("coupled paths share the factor and the grid") {
  const VolModelSpec s = scott_model({});
  const CoupledPaths c = coupled_traj_paths(SchemeKind::WeakTraj1, s, 4, RngStream(9));
  REQUIRE(c.fine.y.size() == 9);
  REQUIRE(c.coarse.y.size() == 5);
  for (int k = 0; k <= 4; ++k) CHECK(c.coarse.y[k] == c.fine.y[2 * k]);
  CHECK(c.coarse.x[0] == c.fine.x[0]);
  CHECK_THROWS_AS(coupled_traj_paths(SchemeKind::CMT, s, 4, RngStream(9)), ConfigError);

  // the fine level is the plain scheme path on the same streams
  const GridPath p = simulate_path(SchemeKind::WeakTraj1, s, 8, RngStream(9));
  for (std::size_t j = 0; j < p.x.size(); ++j) CHECK(p.x[j] == doctest::Approx(c.fine.x[j]).epsilon(1e-14));
}

TEST_CASE("coarse level keeps the marginal law") {
  const VolModelSpec s = scott_model({});
  RunningStats coupled, plain;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    coupled.add(coupled_traj_paths(SchemeKind::WeakTraj1, s, 4, RngStream(10).child(i)).coarse.x.back());
    plain.add(simulate_path(SchemeKind::WeakTraj1, s, 4, RngStream(11).child(i)).x.back());
  }
  const double se = std::hypot(coupled.stderr_mean(), plain.stderr_mean());
  CHECK(std::abs(coupled.mean() - plain.mean()) < 2.58 * se);
  // variance of a sample variance is about 2 s^4 / n for near-Gaussian data
  const double vse = std::hypot(coupled.variance(), plain.variance()) * std::sqrt(2.0 / n);
  CHECK(std::abs(coupled.variance() - plain.variance()) < 2.58 * vse);
}

TEST_CASE("terminal coupling with constant vol has no level difference") {
  // rho = 0: otherwise h still carries the factor drift through rho b f / sigma
  const VolModelSpec b = constant_vol_model(0.2, OUParams{}, 0.05, 100.0, 1.0, 0.0);
  for (SchemeKind k : {SchemeKind::Euler, SchemeKind::WeakTraj1, SchemeKind::OUImproved, SchemeKind::Weak2,
                       SchemeKind::IJK}) {
    for (int i = 0; i < 20; ++i) {
      const TerminalPair t = coupled_terminal(k, b, 4, RngStream(12).child(i));
      CHECK(t.fine == doctest::Approx(t.coarse).epsilon(1e-13));
    }
  }
}

TEST_CASE("terminal coupled differences shrink with N") {
  const VolModelSpec s = scott_model({});
  for (SchemeKind k : {SchemeKind::WeakTraj1, SchemeKind::OUImproved, SchemeKind::Euler, SchemeKind::CMT}) {
    CAPTURE(to_string(k));
    double prev = 1e9;
    for (int N : {2, 4, 8, 16, 32}) {
      RunningStats m;
      for (int i = 0; i < 4000; ++i) m.add(convergence_sample(k, s, N, RngStream(13).child(N).child(i)).termLog);
      CHECK(m.mean() < prev);
      prev = m.mean();
    }
  }
}

TEST_CASE("convergence sample") {
  const VolModelSpec s = scott_model({});
  const ConvergenceSample c = convergence_sample(SchemeKind::CMT, s, 4, RngStream(1));
  CHECK(std::isnan(c.trajLog));
  CHECK(c.strongLog >= 0.0);
  const ConvergenceSample w = convergence_sample(SchemeKind::WeakTraj1, s, 4, RngStream(1));
  CHECK(w.strongLog >= 0.0);
  CHECK(w.trajLog >= 0.0);
}

TEST_CASE("lookback coupling") {
  const VolModelSpec s = scott_model({});
  CHECK(default_lookback_coupling(SchemeKind::WeakTraj1) == LookbackCoupling::Weighted);
  CHECK(default_lookback_coupling(SchemeKind::OUImproved) == LookbackCoupling::Weighted);
  CHECK(default_lookback_coupling(SchemeKind::Euler) == LookbackCoupling::BrownianSum);
  const LevelSample l = coupled_lookback_levels(SchemeKind::WeakTraj1, s, 4, RngStream(4), LookbackCoupling::Weighted);
  CHECK(l.diff == doctest::Approx(l.fine - l.coarse));
  CHECK(l.fine >= 0.0);
  CHECK(l.coarse >= 0.0);
  CHECK(lookback_single(SchemeKind::WeakTraj1, s, 8, RngStream(4)) == doctest::Approx(l.fine));

  RunningStats d2, d16;
  for (int i = 0; i < 4000; ++i) {
    d2.add(coupled_lookback_levels(SchemeKind::WeakTraj1, s, 2, RngStream(5).child(i), LookbackCoupling::Weighted).diff);
    d16.add(coupled_lookback_levels(SchemeKind::WeakTraj1, s, 16, RngStream(5).child(i), LookbackCoupling::Weighted).diff);
  }
  CHECK(d16.variance() < d2.variance() / 4);
}

TEST_CASE("antithetic weak2 levels") {
  const VolModelSpec s = scott_model({});
  const LevelSample a = antithetic_weak2_call_levels(s, 4, 100.0, RngStream(6));
  const LevelSample p = coupled_call_levels(SchemeKind::Weak2, s, 4, 100.0, RngStream(6), true);
  CHECK(a.coarse == doctest::Approx(p.coarse));
  CHECK(a.diff == doctest::Approx(a.fine - a.coarse));
  VolModelSpec g = s;
  g.ou.reset();
  CHECK_THROWS_AS(antithetic_weak2_call_levels(g, 4, 100.0, RngStream(6)), ConfigError);

  RunningStats ma, mp;
  for (int i = 0; i < 20000; ++i) {
    ma.add(antithetic_weak2_call_levels(s, 4, 100.0, RngStream(7).child(i)).diff);
    mp.add(coupled_call_levels(SchemeKind::Weak2, s, 4, 100.0, RngStream(7).child(i), true).diff);
  }
  CHECK(ma.variance() < mp.variance());
  CHECK(std::abs(ma.mean() - mp.mean()) < 3 * mp.stderr_mean());
}
