#include <doctest.h>

#include <cmath>

#include "votersim/error.hpp"
#include "votersim/harness.hpp"
#include "votersim/model.hpp"

using namespace votersim;

namespace {

Configuration random_config(const Torus& t, double p, std::uint64_t seed) { return Configuration::bernoulli(t, p, seed); }

std::vector<std::uint8_t> bits(std::size_t eta, int n) {
  std::vector<std::uint8_t> b(n);
  for (int j = 0; j < n; ++j) b[j] = (eta >> j) & 1;
  return b;
}

}  // namespace

TEST_CASE("local densities") {
  Torus t(3, 6);
  ModelSpec m = build_voter(nn_kernel(3), 0.25);
  Configuration ones(t, true);
  for (Site x = 0; x < t.sites(); x += 17) {
    CHECK(local_density(m, ones, x, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(local_density(m, ones, x, 0) == 0.0);
  }
  Configuration lone(t);
  lone.set(0, true);
  std::vector<int> e1{1, 0, 0};
  CHECK(local_density(m, lone, t.index(e1), 1) == doctest::Approx(1.0 / 6).epsilon(1e-15));

  for (int r = 0; r < 50; ++r) {
    Configuration c = random_config(t, 0.4, 100 + r);
    for (Site x = 0; x < t.sites(); x += 5)
      CHECK(local_density(m, c, x, 0) + local_density(m, c, x, 1) == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(local_density(m, Configuration(Torus(3, 2)), 0, 1), Error);
}

TEST_CASE("Lotka-Volterra flip rates") {
  const double eps = 0.25;
  ModelSpec m = build_lv(-1, -0.5, eps, nn_kernel(3));
  Torus t(3, 6);
  Configuration zeros(t);
  for (Site x = 0; x < t.sites(); ++x) {
    CHECK(flip_rate(m, zeros, x, Backend::graphical) == 0.0);
    CHECK(flip_rate(m, zeros, x, Backend::direct) == 0.0);
  }
  Configuration lone(t);
  lone.set(0, true);
  const double want = 1 / (eps * eps) + m.params.at("theta1");
  CHECK(flip_rate(m, lone, 0, Backend::direct) == doctest::Approx(want).epsilon(1e-12));
  CHECK(flip_rate(m, lone, 0, Backend::graphical) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("graphical and direct rates agree for Lotka-Volterra") {
  ModelSpec m = build_lv(0.7, -0.3, 0.2, nn_kernel(3));
  Torus t(3, 5);
  int checked = 0;
  for (int r = 0; checked < 10000; ++r) {
    Configuration c = random_config(t, 0.1 + 0.08 * (r % 10), 500 + r);
    for (Site x = 0; x < t.sites() && checked < 10000; ++x, ++checked) {
      double g = flip_rate(m, c, x, Backend::graphical);
      double d = flip_rate(m, c, x, Backend::direct);
      CHECK(std::abs(g - d) <= 1e-12 * (1 + std::abs(d)));
    }
  }
}

TEST_CASE("Lotka-Volterra g-form") {
  ModelSpec m = build_lv(-1, -1, 0.1, nn_kernel(3));
  const auto& p = *m.perturbation;
  CHECK(p.eps1_inv2 == 2.0);
  CHECK(m.voter_rate == doctest::Approx(100.0 - 2.0));
  // g_i(η1, η2) = 2 η1 (1 - η2) + (2 + θ_{1-i}) 1{η1 = η2 = i}
  CHECK(p.g1 == std::vector<double>{0, 2, 0, 1});
  CHECK(p.g0 == std::vector<double>{1, 2, 0, 0});
  CHECK(p.staydead());
  CHECK(p.cstar >= default_cstar(p.g0, p.g1));
  CHECK_NOTHROW(check_perturbation(p));
  CHECK_THROWS_AS(build_lv(-1, -1, 0.9, nn_kernel(3)), Error);
  try {
    build_lv(-3, 0, 0.5, nn_kernel(3));
    FAIL("expected EpsilonTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EpsilonTooLarge);
  }
}

TEST_CASE("Lotka-Volterra at theta = 0 has pure voter rates") {
  ModelSpec m = build_lv(0, 0, 0.25, nn_kernel(3));
  Torus t(3, 5);
  for (int r = 0; r < 20; ++r) {
    Configuration c = random_config(t, 0.5, 900 + r);
    for (Site x = 0; x < t.sites(); ++x) {
      const int s = c.get(x);
      const double voter = 16.0 * local_density(m, c, x, 1 - s);
      CHECK(flip_rate(m, c, x, Backend::graphical) == doctest::Approx(voter).epsilon(1e-12));
      CHECK(flip_rate(m, c, x, Backend::direct) == doctest::Approx(voter).epsilon(1e-12));
    }
  }
}

TEST_CASE("builder outputs have non-negative rates everywhere") {
  CHECK_NOTHROW(check_direct_rates(build_lv(-1, 2, 0.2, nn_kernel(3))));
  CHECK_NOTHROW(check_direct_rates(build_nlv({0, {1, 1, 3, 3}}, 1, 0.5, 0.2, 2)));
  GameParams g{2, -1, 3, 0, 0.001};
  ModelSpec game = build_evolution_game(g, nn_kernel(2));
  CHECK_NOTHROW(check_direct_rates(game));
  for (const ModelSpec& m : {build_lv(-1, 2, 0.2, nn_kernel(3)), build_nlv({0, {1, 1, 3, 3}}, 1, 0.5, 0.2, 2)}) {
    const auto& p = *m.perturbation;
    for (double v : p.g0) CHECK(v >= 0);
    for (double v : p.g1) CHECK(v >= 0);
    CHECK(p.cstar >= default_cstar(p.g0, p.g1));
  }
}

TEST_CASE("evolution game rates") {
  const Kernel nb = nn_kernel(2);
  GameGeometry geo(nb);
  CHECK(geo.k == 4);
  CHECK(geo.points.size() == 13);

  SUBCASE("small w approaches the voter rates") {
    GameParams g{1, 2, 3, 4, 1e-9};
    Stream rng(5, 0, StreamKind::trial);
    for (int r = 0; r < 200; ++r) {
      std::vector<std::uint8_t> local(geo.points.size());
      for (auto& b : local) b = rng.bernoulli(0.5);
      double f1 = 0;
      for (int idx : geo.nbr) f1 += local[idx];
      f1 /= geo.k;
      auto rr = game_r(g, geo, local);
      CHECK(rr[1] == doctest::Approx(f1).epsilon(1e-6));
      CHECK(rr[0] == doctest::Approx(1 - f1).epsilon(1e-6));
    }
  }

  SUBCASE("all cooperators never switch") {
    GameParams g{2, -1, 3, 0, 0.01};
    std::vector<std::uint8_t> ones(geo.points.size(), 1);
    CHECK(game_r(g, geo, ones)[0] == 0.0);
  }

  SUBCASE("donation game payoffs") {
    ModelChoice mc;
    mc.family = "game";
    mc.dimension = 2;
    mc.params = {{"b", 3}, {"c", 1}, {"w", 1e-3}};
    mc.backend = Backend::direct;
    ModelSpec m = mc.build();
    const auto& p = m.params;
    CHECK(p.at("alpha") - p.at("beta") == 3);
    CHECK(p.at("gamma") - p.at("delta") == 3);
    CHECK(p.at("delta") - p.at("beta") == 1);
  }

  SUBCASE("selection strength bound") {
    GameParams g{2, -1, 3, 0, 0.05};
    try {
      build_evolution_game(g, nb);
      FAIL("expected SelectionTooStrong");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::SelectionTooStrong);
    }
    Kernel skewed(1, {{{1}, Rational(1, 3)}, {{-1}, Rational(1, 3)}, {{2}, Rational(1, 6)}, {{-2}, Rational(1, 6)}});
    try {
      build_evolution_game({0, 0, 0, 0, 0.001}, skewed);
      FAIL("expected NotUniformKernel");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NotUniformKernel);
    }
  }

  SUBCASE("limiting tables satisfy h0 = -h1") {
    GameParams g{2, -1, 3, 0.5, 0.001};
    ModelSpec m = build_evolution_game(g, nb);
    REQUIRE(m.limit);
    for (std::size_t e = 0; e < m.limit->h0.size(); ++e) CHECK(m.limit->h0[e] == doctest::Approx(-m.limit->h1[e]));
  }

  SUBCASE("direct rates stay under the declared bound") {
    GameParams g{6, -1, 7, 0, 0.001};
    ModelSpec m = build_evolution_game(g, nb);
    REQUIRE(m.direct_rate_bound > 0);
    Torus t(2, 8);
    for (int r = 0; r < 20; ++r) {
      Configuration c = random_config(t, 0.5, 40 + r);
      for (Site x = 0; x < t.sites(); ++x) CHECK(flip_rate(m, c, x, Backend::direct) <= m.direct_rate_bound + 1e-9);
    }
  }
}

TEST_CASE("nonlinear voter builder") {
  ModelSpec m = build_nlv({0, {1, 1, 3, 3}}, 1, 0.0, 0.2, 2);
  const auto& p = *m.perturbation;
  CHECK(p.n0() == 4);
  CHECK(p.staydead());
  for (std::size_t eta = 0; eta < 16; ++eta) CHECK(p.g1[eta] == p.g0[15 - eta]);
  ModelSpec tilted = build_nlv({0, {1, 1, 3, 3}}, 1, 0.5, 0.2, 2);
  CHECK(tilted.perturbation->staydead());
  CHECK(tilted.perturbation->g1[15] == doctest::Approx(1.5 * 3));
  try {
    build_nlv({1, {1, 1, 3, 3}}, 1, 0, 0.2, 2);
    FAIL("expected InvalidRates");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidRates);
  }
}

TEST_CASE("g-form from limiting tables") {
  Kernel k = nn_kernel(1);
  std::vector<Offset> pts{{0}, {1}, {-1}};
  const std::size_t n = 8;

  SUBCASE("zero tables") {
    std::vector<double> z(n, 0.0);
    PerturbationSpec p = gform_from_h(z, z, pts, k);
    for (std::size_t eta = 0; eta < n; ++eta) {
      auto b = bits(eta, 3);
      for (int i = 0; i < 2; ++i) {
        double f = 0;
        for (int j = 0; j < 3; ++j)
          if (b[j] == i) f += p.shift_weights[j];
        CHECK(p.g(i)[eta] == doctest::Approx(p.eps1_inv2 * f));
      }
    }
  }

  SUBCASE("game tables round-trip") {
    GameParams g{2, -1, 3, 0.5, 0.001};
    ModelSpec m = build_evolution_game(g, nn_kernel(2));
    REQUIRE(m.limit);
    PerturbationSpec p = gform_from_h(m.limit->h0, m.limit->h1, m.limit->points, nn_kernel(2));
    const int n0 = static_cast<int>(m.limit->points.size());
    for (std::size_t eta = 0; eta < p.g0.size(); ++eta) {
      for (int i = 0; i < 2; ++i) {
        CHECK(p.g(i)[eta] >= 0);
        if (static_cast<int>(eta & 1) != 1 - i) continue;
        // round trip holds where site x is of type 1 - i
        auto gt = p.g_tilde(i);
        CHECK(std::abs(gt[eta] - (i ? m.limit->h1 : m.limit->h0)[eta]) <= 1e-12);
      }
    }
    CHECK(n0 == 13);
  }

  SUBCASE("equality case of the shift bound") {
    const double M = 3;
    std::vector<double> h0(n, 0.0), h1(n, 0.0);
    // origin 0 with exactly one neighbour of type 1: f_1 = 1/2
    h1[0b010] = -M;
    PerturbationSpec p = gform_from_h(h0, h1, pts, k);
    CHECK(p.eps1_inv2 == doctest::Approx(2 * M));
    CHECK(p.g1[0b010] == 0.0);
    // negative where f_1 = 0 cannot be shifted
    h1[0b000] = -1;
    CHECK_THROWS_AS(gform_from_h(h0, h1, pts, k), Error);
  }

  SUBCASE("kernel must be covered") {
    std::vector<double> z(4, 0.0);
    try {
      gform_from_h(z, z, {{0}, {1}}, k);
      FAIL("expected KernelNotCovered");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::KernelNotCovered);
    }
  }
}
