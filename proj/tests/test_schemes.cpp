#include <cmath>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "doctest.h"
#include "svsim/errors.hpp"
#include "svsim/schemes.hpp"
#include "svsim/stats.hpp"

using namespace svsim;

namespace {

const double kNu = 7.0 * std::sqrt(2.0) / 20.0;
const double kRhoBar = std::sqrt(1.0 - 0.04);

// dY = b dt + sigma(Y) dW with sigma(y) = y; only what the Y steps touch.
VolModelSpec gbm_factor(double driftSlope) {
  VolModelSpec s;
  s.b = [=](double y) { return driftSlope * y; };
  s.sigma = [](double y) { return y; };
  s.sigma1 = [](double) { return 1.0; };
  // V0 = b - sigma sigma'/2 = (driftSlope - 1/2) y, V = y
  s.flow_v0 = [=](double x, double t) { return x * std::exp((driftSlope - 0.5) * t); };
  s.flow_v = flow_from_primitive([](double x) { return std::log(x); }, [](double z) { return std::exp(z); });
  return s;
}

const std::vector<SchemeKind> kAll{SchemeKind::Euler,  SchemeKind::WeakTraj1, SchemeKind::WeakTraj1_OU_Exact,
                                   SchemeKind::OUImproved, SchemeKind::Weak2, SchemeKind::IJK,
                                   SchemeKind::CMT};

}  // namespace

TEST_CASE("scheme names") {
  for (SchemeKind k : kAll) CHECK(parse_scheme(to_string(k)) == k);
  CHECK(parse_scheme("ou-improved") == SchemeKind::OUImproved);
  CHECK_THROWS_AS(parse_scheme("milstein"), ConfigError);
  CHECK(parse_cutoff("band") == Cutoff::Band);
  CHECK_THROWS_AS(parse_cutoff("cap"), ConfigError);
}

TEST_CASE("milstein Y step") {
  const VolModelSpec g = gbm_factor(0.0);
  CHECK(milstein_step_y(g, 1.0, 0.01, 0.1) == doctest::Approx(1.1));
  CHECK(milstein_step_y(g, 1.0, 0.01, 0.2) == doctest::Approx(1.215));
  const VolModelSpec s = scott_model({});
  CHECK(milstein_step_y(s, 0.3, 0.1, 0.2) == doctest::Approx(0.3 - 0.03 + kNu * 0.2));
}

TEST_CASE("Ninomiya-Victoir Y step") {
  const VolModelSpec s = scott_model({});
  CHECK(nv_step_y(s, 1.0, 1.0, 0.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(nv_step_y(s, 1.0, 1.0, 0.0) == doctest::Approx(0.367879).epsilon(1e-6));
  for (double y : {-1.0, 0.0, 0.4}) {
    for (double dW : {-0.3, 0.0, 0.25}) {
      const double d = 0.2;
      CHECK(nv_step_y(s, y, d, dW) == doctest::Approx(y * std::exp(-d) + kNu * dW * std::exp(-d / 2)).epsilon(1e-14));
    }
  }
  const VolModelSpec g = gbm_factor(0.5);
  CHECK(nv_step_y(g, 1.3, 0.1, 0.2) == doctest::Approx(1.3 * std::exp(0.2)));
  VolModelSpec flat = gbm_factor(0.0);
  flat.flow_v0 = [](double x, double) { return x; };
  flat.flow_v = [](double x, double t) { return x + 0.7 * t; };
  CHECK(nv_step_y(flat, 0.2, 0.5, 0.3) == doctest::Approx(0.2 + 0.7 * 0.3));
}

TEST_CASE("weaktraj1 step") {
  const VolModelSpec s = scott_model({});
  const double x = std::log(100.0);
  const double F01 = 0.25 * (std::exp(0.1) - 1.0) / kNu;
  const double h0 = 0.05 - 0.03125 + 0.2 * 0.25 * kNu / 2;
  const double want = x - 0.2 * F01 + 0.25 * h0 + kRhoBar * 0.25 * 0.1;
  CHECK(weaktraj1_step(s, x, 0.0, 0.1, 0.25, 0.0, 0.1) == doctest::Approx(want).epsilon(1e-13));

  SUBCASE("floor is hit by a large negative iW") {
    const double a = weaktraj1_step(s, x, 0.0, 0.1, 0.25, -10.0, 0.0);
    CHECK(weaktraj1_step(s, x, 0.0, 0.1, 0.25, -10.0, 1.0) == doctest::Approx(a));
    const StepCoef c = step_coef(SchemeKind::WeakTraj1, s, Cutoff::Floor, 0.0, 0.1, 0.25, {0.0, -10.0, 0.0});
    CHECK(c.c == 0.0);
  }
  SUBCASE("band caps at psi_hat") {
    const StepCoef c = step_coef(SchemeKind::WeakTraj1, s, Cutoff::Band, 0.0, 0.1, 0.25, {0.0, 10.0, 0.0});
    CHECK(c.c == doctest::Approx(kRhoBar * std::sqrt(1.5 * 0.0625)));
    const StepCoef f = step_coef(SchemeKind::WeakTraj1, s, Cutoff::Floor, 0.0, 0.1, 0.25, {0.0, 10.0, 0.0});
    CHECK(f.c > c.c);
  }
  SUBCASE("constant vol, rho = 0 is the Black-Scholes log step") {
    const VolModelSpec b = constant_vol_model(0.3, OUParams{}, 0.02, 100.0, 1.0, 0.0);
    CHECK(weaktraj1_step(b, 1.0, 0.2, -0.4, 0.1, 0.05, 0.3) ==
          doctest::Approx(1.0 + 0.1 * (0.02 - 0.045) + 0.3 * 0.3));
  }
}

TEST_CASE("ou improved step") {
  const VolModelSpec s = scott_model({});
  const double x = std::log(100.0), d = 0.25, iW = 0.01, dB = 0.05, y = 0.0, yn = 0.08;
  const double h = s.h(0), h1 = s.h1(0), h2 = s.h2(0);
  const double p = 0.0625, p1 = 0.125, p2 = 0.25;
  const double drift = d * h + kNu * h1 * iW + (kNu * kNu / 2 * h2) * d * d / 2;
  const double rad = p + kNu * p1 * iW / d + (kNu * kNu / 2 * p2) * d / 2;
  const double want = x - 0.2 * (s.F(yn) - s.F(y)) + drift + kRhoBar * std::sqrt(rad) * dB;
  CHECK(ou_improved_step(s, x, y, yn, d, iW, dB) == doctest::Approx(want).epsilon(1e-13));
  CHECK(ou_improved_step(s, x, y, yn, d, iW, dB) == doctest::Approx(4.615435544328).epsilon(1e-12));

  // iW = 0: differs from weaktraj1 only by the second-order corrections
  const double y1 = 0.3;
  const double c1 = 1.0 * (0.0 - y1) * s.h1(y1) + kNu * kNu / 2 * s.h2(y1);
  const double c2 = 1.0 * (0.0 - y1) * s.psi1(y1) + kNu * kNu / 2 * s.psi2(y1);
  CHECK(ou_improved_step(s, x, y1, 0.2, d, 0.0, 0.0) - weaktraj1_step(s, x, y1, 0.2, d, 0.0, 0.0) ==
        doctest::Approx(c1 * d * d / 2));
  const StepCoef a = step_coef(SchemeKind::OUImproved, s, Cutoff::Floor, y1, 0.2, d, {});
  CHECK(a.c * a.c / (kRhoBar * kRhoBar) == doctest::Approx(s.psi(y1) + c2 * d / 2));
}

TEST_CASE("ijk step") {
  const VolModelSpec b = constant_vol_model(0.2, OUParams{}, 0.03, 100.0, 1.0, 0.5);
  const double rb = std::sqrt(0.75);
  CHECK(ijk_step(b, 0.0, 0.1, 0.3, 0.25, 0.2, -0.1) ==
        doctest::Approx((0.03 - 0.02) * 0.25 + 0.5 * 0.2 * 0.2 + rb * 0.2 * -0.1));
  const VolModelSpec s = scott_model({});
  const double f0 = 0.25 * std::exp(0.1), f1 = 0.25 * std::exp(0.2);
  const double want = 1.0 + (0.05 - (f1 * f1 + f0 * f0) / 4) * 0.25 - 0.2 * f0 * 0.3 + kRhoBar * (f0 + f1) / 2 * 0.1 -
                      0.1 * kNu * f0 * (0.09 - 0.25);
  CHECK(ijk_step(s, 1.0, 0.1, 0.2, 0.25, 0.3, 0.1) == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("euler step") {
  const VolModelSpec s = scott_model({});
  const double x = std::log(100.0);
  const double want = x + (0.05 - 0.03125) * 0.25 + 0.25 * (-0.2 * 0.1 + std::sqrt(0.96) * -0.1);
  CHECK(euler_x_step(s, x, 0.0, 0.25, 0.1, -0.1) == doctest::Approx(want).epsilon(1e-14));
  CHECK(euler_x_step(s, x, 0.0, 0.25, 0.0, 0.0) == doctest::Approx(x + (0.05 - 0.03125) * 0.25));
  const auto [xn, yn] = euler_step(s, x, 0.0, 0.25, WStep{0.1, 0.0, 0.05}, -0.1);
  CHECK(xn == doctest::Approx(want));
  CHECK(yn == doctest::Approx(0.05));
}

TEST_CASE("cmt step") {
  const VolModelSpec s = scott_model({});
  const auto [x, y] = cmt_step(s, 1.0, 0.2, 0.1, 0.0, 0.0);
  const double f = 0.25 * std::exp(0.2);
  CHECK(x == doctest::Approx(1.0 + (0.05 - f * f / 2) * 0.1));
  CHECK(y == doctest::Approx(0.2 + (-0.2 + kNu * kNu / 2) * 0.1));

  const VolModelSpec b = constant_vol_model(0.2, OUParams{}, 0.03, 100.0, 1.0, 0.0);
  const auto [xb, yb] = cmt_step(b, 1.0, 0.5, 0.1, 0.3, -0.2);
  CHECK(xb == doctest::Approx(1.0 + (0.03 - 0.02) * 0.1 + 0.2 * -0.2));
  CHECK(yb == doctest::Approx(0.5 - 0.5 * 0.1 + 1.0 * 0.3));

  VolModelSpec z = scott_model({});
  z.f = [](double y) { return y; };
  z.f1 = [](double) { return 1.0; };
  CHECK_THROWS_AS(cmt_step(z, 0.0, 0.0, 0.1, 0.1, 0.1), NumericalError);
}

TEST_CASE("radicand guard rejects NaN") {
  VolModelSpec s = scott_model({});
  s.psi = [](double) { return std::nan(""); };
  CHECK_THROWS_AS(step_coef(SchemeKind::WeakTraj1, s, Cutoff::Floor, 0.0, 0.1, 0.1, {}), NumericalError);
}

TEST_CASE("OU-only schemes need an OU spec") {
  VolModelSpec s = scott_model({});
  s.ou.reset();
  CHECK_THROWS_AS(check_supported(SchemeKind::OUImproved, s), ConfigError);
  CHECK_THROWS_AS(check_supported(SchemeKind::IJK, s), ConfigError);
  CHECK_NOTHROW(check_supported(SchemeKind::WeakTraj1, s));
  CHECK_NOTHROW(check_supported(SchemeKind::Weak2, s));
  // generic Y paths run through Milstein / NV / Euler
  CHECK(simulate_path(SchemeKind::WeakTraj1, s, 8, RngStream(1)).y.size() == 9);
  CHECK(simulate_path(SchemeKind::Weak2, s, 8, RngStream(1)).y.size() == 9);
}

TEST_CASE("simulate_path with one step equals one kernel call") {
  const VolModelSpec s = scott_model({});
  const RngStream rng(77);
  const GridPath p = simulate_path(SchemeKind::WeakTraj1, s, 1, rng);
  PathStreams st = path_streams(rng);
  const auto ws = draw_w_path(s.ou, 1, 1.0, st.w);
  const double y1 = ou_transition(*s.ou, 0.0, 1.0, ws[0].ouNoise);
  const double x1 = weaktraj1_step(s, std::log(100.0), 0.0, y1, 1.0, ws[0].iW, st.b.gaussian());
  REQUIRE(p.x.size() == 2);
  CHECK(p.y[1] == y1);
  CHECK(p.x[1] == x1);
  CHECK(p.times == std::vector<double>{0.0, 1.0});
}

TEST_CASE("weaktraj1 golden path") {
  const GridPath p = simulate_path(SchemeKind::WeakTraj1, scott_model({}), 4, RngStream(20100101));
  const GridPath q = simulate_path(SchemeKind::WeakTraj1, scott_model({}), 4, RngStream(20100101));
  CHECK(p.x == q.x);
  CHECK(p.y == q.y);
  CHECK(p.x.back() == doctest::Approx(4.7407434224347833).epsilon(1e-12));
}

TEST_CASE("weak2 terminal") {
  const VolModelSpec s = scott_model({});
  const RngStream rng(5);
  const Weak2Terminal w = weak2_terminal(s, 2, rng);
  PathStreams st = path_streams(rng);
  const auto ws = draw_w_path(s.ou, 2, 0.5, st.w);
  const double y1 = ou_transition(*s.ou, 0.0, 0.5, ws[0].ouNoise);
  const double y2 = ou_transition(*s.ou, y1, 0.5, ws[1].ouNoise);
  const double m = 0.25 * (s.h(0) + 2 * s.h(y1) + s.h(y2));
  const double v = 0.25 * (s.psi(0) + 2 * s.psi(y1) + s.psi(y2));
  CHECK(w.yT == y2);
  CHECK(w.mBar == doctest::Approx(m).epsilon(1e-14));
  CHECK(w.vBar == doctest::Approx(v).epsilon(1e-14));
  // affine in the one terminal normal
  const double G = st.g.gaussian();
  const double base = std::log(100.0) - 0.2 * s.F(y2) + m;
  CHECK(w.xT == doctest::Approx(base + std::sqrt(0.96 * v) * G).epsilon(1e-14));

  const VolModelSpec b = constant_vol_model(0.3, OUParams{}, 0.05, 100.0, 2.0, 0.4);
  for (int N : {1, 3, 16}) CHECK(weak2_terminal(b, N, RngStream(N)).vBar == doctest::Approx(0.09 * 2.0));
  const VolModelSpec b0 = constant_vol_model(0.3, OUParams{}, 0.05, 100.0, 2.0, 0.0);
  for (int N : {1, 5}) {
    const RngStream r(N);
    const Weak2Terminal t = weak2_terminal(b0, N, r);
    const double g = path_streams(r).g.gaussian();
    CHECK(t.xT == doctest::Approx(std::log(100.0) + (0.05 - 0.045) * 2.0 + 0.3 * std::sqrt(2.0) * g));
  }
  ScottParams p;
  p.rho = 1.0;
  CHECK_THROWS_AS(weak2_terminal(scott_model(p), 4, rng), ConfigError);
}

TEST_CASE("NV on the OU factor is the exact linear flow") {
  const VolModelSpec s = scott_model({});
  const double th = 0.0;
  for (double y : {-0.5, 0.3}) {
    for (double d : {0.01, 0.5}) {
      const double dW = 0.17;
      CHECK(nv_step_y(s, y, d, dW) ==
            doctest::Approx(th + (y - th) * std::exp(-d) + kNu * dW * std::exp(-d / 2)).epsilon(1e-14));
    }
  }
}

TEST_CASE("black-scholes reduction for every scheme") {
  const double vol = 0.25, r = 0.05, T = 1.0;
  const VolModelSpec b = constant_vol_model(vol, OUParams{1.0, 0.0, 0.5, 0.0}, r, 100.0, T, 0.0);
  boost::math::normal_distribution<double> law(std::log(100.0) + (r - vol * vol / 2) * T, vol * std::sqrt(T));
  for (SchemeKind k : kAll) {
    CAPTURE(to_string(k));
    std::vector<double> xs(20000);
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = simulate_terminal(k, b, 8, RngStream(3).child(i));
    CHECK(ks_test(xs, [&](double x) { return boost::math::cdf(law, x); }).pValue > 0.01);
  }
}

TEST_CASE("structured terminal law sums the step coefficients") {
  const std::vector<StepCoef> c{{0.1, 0.2}, {-0.05, 0.3}};
  const TerminalLaw l = terminal_law(c, 1.0, 0.5);
  CHECK(l.mu == doctest::Approx(1.05));
  CHECK(l.s2 == doctest::Approx(0.5 * (0.04 + 0.09)));
}
