#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "votersim/error.hpp"
#include "votersim/pde.hpp"
#include "votersim/random.hpp"

using namespace votersim;

namespace {

const RealPoly logistic({0, 1, -1});

RealPoly bistable(double a) { return RealPoly({0, -a, 1 + a, -1}); }  // u(1-u)(u-a)

double sup_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("ordinary differential equation") {
  CHECK(solve_ode(RealPoly(), 0.3, 5.0) == 0.3);
  CHECK(solve_ode(logistic, 0.2, 1.0) == doctest::Approx(std::exp(1.0) / (4 + std::exp(1.0))).epsilon(1e-10));
  CHECK(solve_ode(RealPoly({0, 1, -3, 2}), 0.5, 7.0) == 0.5);
  try {
    solve_ode(RealPoly({0.5}), 0.9, 1.0);
    FAIL("expected LeftUnitInterval");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::LeftUnitInterval);
  }
}

TEST_CASE("line solver") {
  SUBCASE("constant data follows the ODE") {
    Grid1D g = Grid1D::make(-5, 5, 0.1, 1.0);
    auto r = solve_rd_1d(logistic, std::vector<double>(g.points(), 0.2), 1.0, g);
    const double ode = solve_ode(logistic, 0.2, 1.0, g.dt);
    for (double u : r.u) CHECK(std::abs(u - ode) < 1e-9);
  }
  SUBCASE("heat equation conserves mass") {
    Grid1D g = Grid1D::make(-10, 10, 0.05, 1.0);
    auto v = [](double x) { return std::abs(x) < 1 ? 1.0 : 0.0; };
    std::vector<double> u0(g.points());
    for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = v(g.x(i));
    auto r = solve_rd_1d(RealPoly(), u0, 5.0, g);
    double m0 = std::accumulate(u0.begin(), u0.end(), 0.0) * g.dx;
    double m1 = std::accumulate(r.u.begin(), r.u.end(), 0.0) * g.dx;
    CHECK(std::abs(m0 - m1) < 1e-8);
  }
  SUBCASE("values stay in the unit interval and frames are kept") {
    Grid1D g = Grid1D::make(-20, 20, 0.1, 1.0);
    std::vector<double> times{0.5, 1.0, 2.0};
    auto r = solve_rd_1d(bistable(0.3), [](double x) { return x < 0 ? 1.0 : 0.0; }, 2.0, g, times);
    CHECK(r.frames.size() == 3);
    for (const auto& f : r.frames)
      for (double u : f.u) {
        CHECK(u >= -1e-6);
        CHECK(u <= 1 + 1e-6);
      }
  }
  SUBCASE("time step limit") {
    try {
      Grid1D::make(0, 1, 0.1, 1.0, 0.01);
      FAIL("expected CFLViolation");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::CFLViolation);
    }
  }
}

TEST_CASE("comparison principle") {
  Grid1D g = Grid1D::make(-10, 10, 0.1, 1.0);
  Stream rng(1, 0, StreamKind::trial);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> lo(g.points()), hi(g.points());
    for (std::size_t i = 0; i < lo.size(); ++i) {
      lo[i] = rng.uniform();
      hi[i] = lo[i] + (1 - lo[i]) * rng.uniform();
    }
    RealPoly f = trial % 2 ? logistic : bistable(0.4);
    auto a = solve_rd_1d(f, lo, 1.0, g), b = solve_rd_1d(f, hi, 1.0, g);
    for (std::size_t i = 0; i < lo.size(); ++i) CHECK(a.u[i] <= b.u[i] + 1e-8);
  }
}

TEST_CASE("grid refinement is second order") {
  auto run = [](double dx) {
    Grid1D g = Grid1D::make(-10, 10, dx, 1.0);
    return solve_rd_1d(logistic, [](double x) { return 0.5 + 0.4 * std::tanh(x); }, 1.0, g).u;
  };
  // fine cells pair up under each coarse cell
  auto restrict_to = [](const std::vector<double>& fine) {
    std::vector<double> c(fine.size() / 2);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (fine[2 * i] + fine[2 * i + 1]);
    return c;
  };
  auto u1 = run(0.2), u2 = run(0.1), u3 = run(0.05);
  const double e1 = sup_abs_diff(u1, restrict_to(u2));
  const double e2 = sup_abs_diff(u2, restrict_to(u3));
  CHECK(std::log2(e1 / e2) >= 1.8);
}

TEST_CASE("wave speeds") {
  SUBCASE("KPP minimal speed") {
    WaveOptions o;
    o.T = 40;
    auto w = wave_speed(logistic, o);
    CHECK(w.speed == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
    CHECK(w.integral_sign == 1);
    CHECK(kpp_speed_bound(logistic, 1.0) == doctest::Approx(std::sqrt(2.0)));
  }
  SUBCASE("bistable cubic") {
    WaveOptions o;
    o.sigma2 = 2;
    o.T = 60;
    CHECK(wave_speed(bistable(0.4), o).speed == doctest::Approx(0.2 / std::sqrt(2.0)).epsilon(0.05));
  }
  SUBCASE("sign law") {
    WaveOptions o;
    o.T = 40;
    for (double a : {0.2, 0.3, 0.35, 0.65, 0.7, 0.8}) {
      auto w = wave_speed(bistable(a), o);
      CHECK(w.integral_sign == (a < 0.5 ? 1 : -1));
      CHECK((w.speed > 0) == (w.integral_sign > 0));
    }
    CHECK(std::abs(wave_speed(bistable(0.5), o).speed) < 0.02);
    CHECK(std::abs(wave_speed(RealPoly({0, -0.5, 1.5, -1}) * RealPoly({3}), o).speed) < 0.02);
  }
  SUBCASE("front tracking errors") {
    WaveOptions o;
    o.T = 10;
    try {
      wave_speed(RealPoly({0, -1}), o);  // decay kills the front
      FAIL("expected NoFront");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NoFront);
    }
    o.half_width = 5;
    try {
      wave_speed(logistic, o);
      FAIL("expected FrontAtBoundary");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::FrontAtBoundary);
    }
  }
}

TEST_CASE("radial solver") {
  SUBCASE("constant data stays constant") {
    RadialGrid g = RadialGrid::make(10, 0.1, 1.0, 3);
    auto r = solve_rd_radial(RealPoly(), std::vector<double>(g.points(), 0.4), 2.0, g);
    for (double u : r.u) CHECK(u == doctest::Approx(0.4).epsilon(1e-12));
  }
  SUBCASE("negative reaction decays exponentially") {
    RadialGrid g = RadialGrid::make(20, 0.1, 1.0, 3);
    std::vector<double> v(g.points());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = g.r(i) < 2 ? 0.5 : 0.0;
    std::vector<double> times;
    for (int i = 1; i <= 10; ++i) times.push_back(i * 0.5);
    auto r = solve_rd_radial(RealPoly({0, -0.5, 0.5, -1}), v, 5.0, g, times);  // negative on (0, 1)
    std::vector<double> t, ls;
    for (const auto& f : r.frames) {
      t.push_back(f.t);
      ls.push_back(std::log(*std::max_element(f.u.begin(), f.u.end())));
    }
    const double tm = std::accumulate(t.begin(), t.end(), 0.0) / t.size();
    const double lm = std::accumulate(ls.begin(), ls.end(), 0.0) / ls.size();
    double num = 0, den = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      num += (t[i] - tm) * (ls[i] - lm);
      den += (t[i] - tm) * (t[i] - tm);
    }
    CHECK(num / den < 0);
  }
  SUBCASE("KPP bump spreads") {
    RadialGrid g = RadialGrid::make(40, 0.2, 1.0, 3);
    std::vector<double> v(g.points());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = g.r(i) < 3 ? 0.5 : 0.0;
    auto r = solve_rd_radial(logistic, v, 15.0, g);
    // speed about sqrt(2): the ball of radius 10 is taken over
    for (std::size_t i = 0; g.r(i) <= 10; ++i) CHECK(r.u[i] > 0.9);
  }
  SUBCASE("time step limit") {
    CHECK_THROWS_AS(RadialGrid::make(1, 0.1, 1.0, 3, 0.01), Error);
  }
}
