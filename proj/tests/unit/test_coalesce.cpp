#include <doctest.h>

#include <cmath>

#include "votersim/coalesce.hpp"
#include "votersim/error.hpp"
#include "votersim/model.hpp"

using namespace votersim;

TEST_CASE("pattern syntax") {
  auto q = parse_pattern("0|e1,e2+e3|[1;0;-2]", 3);
  REQUIRE(q.points.size() == 4);
  CHECK(q.groups == std::vector<std::vector<int>>{{0}, {1, 2}, {3}});
  CHECK(q.points[0].fixed == Offset{0, 0, 0});
  CHECK(q.points[0].e.empty());
  CHECK(q.points[2].e == std::vector<int>{2, 3});
  CHECK(q.points[3].fixed == Offset{1, 0, -2});
  CHECK_THROWS_AS(parse_pattern("0|", 3), Error);
  CHECK_THROWS_AS(parse_pattern("[1;2]", 3), Error);
}

TEST_CASE("partitions from merges") {
  std::vector<MergeEvent> merges{{0.5, 0, 2}, {1.5, 1, 3}, {2.5, 0, 1}};
  CHECK(partition_at(4, merges, 0.0) == std::vector<std::uint8_t>{0, 1, 2, 3});
  CHECK(partition_at(4, merges, 1.0) == std::vector<std::uint8_t>{0, 1, 0, 2});
  CHECK(partition_at(4, merges, 2.0) == std::vector<std::uint8_t>{0, 1, 0, 1});
  CHECK(partition_at(4, merges, 3.0) == std::vector<std::uint8_t>{0, 0, 0, 0});
  auto b = blocks_of(partition_at(4, merges, 2.0));
  CHECK(b == std::vector<std::vector<int>>{{0, 2}, {1, 3}});
}

TEST_CASE("coinciding starts merge at time zero") {
  Kernel k = nn_kernel(3);
  std::vector<Offset> starts{{0, 0, 0}, {1, 0, 0}, {0, 0, 0}};
  Stream rng(1, 0, StreamKind::walks);
  auto m = run_coalescing_walks(k, starts, 10.0, rng);
  REQUIRE(!m.empty());
  CHECK(m[0].t == 0.0);
  CHECK(m[0].keep == 0);
  CHECK(m[0].gone == 2);
  for (std::size_t i = 1; i < m.size(); ++i) CHECK(m[i - 1].t <= m[i].t);
}

TEST_CASE("complementary patterns sum to one on shared realizations") {
  Kernel k = nn_kernel(3);
  auto q = parse_pattern("0|e1", 3);
  auto r = estimate_shared(q.points, {{{0}, {1}}, {{0, 1}}}, k, 200, 5000, 3);
  CHECK(r[0].value + r[1].value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r[0].std_error == doctest::Approx(std::sqrt(r[0].value * (1 - r[0].value) / 5000)));
}

TEST_CASE("escape probability in three dimensions") {
  Kernel k = nn_kernel(3);
  auto e = estimate(parse_pattern("0|e1", 3), k, 1000, 20000, 11);
  // independent oracle: the rate-2 difference walk started at e1
  Stream rng(12, 0, StreamKind::trial);
  int met = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i)
    if (std::isfinite(pair_meeting_time(k, {1, 0, 0}, 1000, rng))) ++met;
  const double oracle = 1.0 - static_cast<double>(met) / n;
  const double se = std::sqrt(oracle * (1 - oracle) / n);
  CHECK(std::abs(e.value - oracle) < 4 * std::hypot(e.std_error, se));
  // 1 - Polya's return probability 0.3405, plus a finite-cutoff excess
  CHECK(e.value > 0.6595 - 4 * e.std_error);
  CHECK(e.value < 0.6595 + 0.01 + 4 * e.std_error);
}

TEST_CASE("walks meet in one dimension") {
  Kernel k = nn_kernel(1);
  auto est = estimate_cutoffs(parse_pattern("0|e1", 1), k, {10, 100, 1000, 10000}, 4000, 2);
  for (std::size_t i = 1; i < est.size(); ++i) CHECK(est[i].value <= est[i - 1].value);
  CHECK(est.back().value < 0.03);
}

TEST_CASE("never-coalesce estimates fall with the cutoff") {
  Kernel k = nn_kernel(3);
  auto est = estimate_cutoffs(parse_pattern("0|e1|e2", 3), k, {1, 10, 100, 1000}, 5000, 4);
  for (std::size_t i = 1; i < est.size(); ++i) CHECK(est[i].value <= est[i - 1].value);
  for (const auto& e : est) {
    CHECK(e.value >= 0);
    CHECK(e.value <= 1);
  }
}

TEST_CASE("extrapolation reports the cutoff bias") {
  auto e = estimate(parse_pattern("0|e1", 3), nn_kernel(3), 400, 5000, 6, true);
  CHECK(e.tail_bound);
  CHECK(std::isfinite(e.extrapolated));
  CHECK(e.bias == doctest::Approx(e.value - e.extrapolated));
}

TEST_CASE("p2 and p3 from the partition law") {
  Kernel k = nn_kernel(3);
  PartitionLaw law = estimate_nu0(independent_pair_law(k), k, 1000, 20000, 7);
  double total = 0;
  for (std::size_t i = 0; i < law.entries().size(); ++i) total += law.probability(i);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  LvCoalescence c = lv_coalescence(law);
  CHECK(c.p2 + c.p3 <= 1.0);
  CHECK(c.m0() > 0);
  CHECK(c.m0() < 1);
  CHECK(c.p2 == doctest::Approx(0.177).epsilon(0.05));
  CHECK(c.p3 == doctest::Approx(0.304).epsilon(0.05));
}

TEST_CASE("children at one far site start coalesced") {
  Kernel k = nn_kernel(3);
  OffspringLaw q = OffspringLaw::from_atoms(3, {{{20, 0, 0}, {20, 0, 0}}}, {Rational(1)});
  PartitionLaw law = estimate_nu0(q, k, 1.0, 2000, 8);
  std::vector<std::uint8_t> split{0, 1, 1};
  CHECK(law.probability(split) > 0.99);
}

TEST_CASE("neighbour coalescence identities") {
  Kernel k = nn_kernel(3);
  NeighbourIdentityReport r = neighbour_identity_check(k, 1000, 20000, 9);
  CHECK(std::abs(r.residual_a) < 3 * r.stderr_a);
  CHECK(r.target_b == doctest::Approx(7.0 / 6));
  CHECK(std::abs(r.ratio_b - r.target_b) < 3 * r.stderr_b);
  CHECK(neighbour_identity_check(nn_kernel(4), 50, 500, 10).target_b == doctest::Approx(9.0 / 8));

  Kernel skewed(1, {{{1}, Rational(1, 3)}, {{-1}, Rational(1, 3)}, {{2}, Rational(1, 6)}, {{-2}, Rational(1, 6)}});
  try {
    neighbour_identity_check(skewed, 10, 100, 1);
    FAIL("expected NotUniformKernel");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotUniformKernel);
  }
}

TEST_CASE("basis transform") {
  SUBCASE("constant table") {
    std::vector<Rational> g1(8, Rational(5, 2)), g0(8, Rational(0));
    auto b = g_to_basis(g0, g1);
    CHECK(b.beta[0] == Rational(5, 2));
    for (std::size_t s = 1; s < 8; ++s) CHECK(b.beta[s] == 0);
    for (auto x : b.delta) CHECK(x == 0);
  }
  SUBCASE("product of two bits") {
    std::vector<Rational> g1{0, 0, 0, 1}, g0(4, Rational(0));
    auto b = g_to_basis(g0, g1);
    CHECK(b.beta == std::vector<Rational>{0, 0, 0, 1});
  }
  SUBCASE("random tables round-trip exactly") {
    Stream rng(13, 0, StreamKind::trial);
    for (int trial = 0; trial < 200; ++trial) {
      const int n0 = 1 + static_cast<int>(rng.below(4));
      const std::size_t n = std::size_t{1} << n0;
      std::vector<Rational> g0(n), g1(n);
      for (std::size_t i = 0; i < n; ++i) {
        g0[i] = Rational(static_cast<long>(rng.below(1000)), 1 + static_cast<long>(rng.below(97)));
        g1[i] = Rational(static_cast<long>(rng.below(1000)), 1 + static_cast<long>(rng.below(97)));
      }
      auto b = g_to_basis(g0, g1);
      CHECK(basis_to_table(b.beta) == g1);
      CHECK(basis_to_table(b.delta) == g0);
    }
  }
}

TEST_CASE("generic reaction polynomial") {
  Kernel k = nn_kernel(3);

  SUBCASE("zero perturbation") {
    PerturbationSpec p;
    p.offspring = independent_pair_law(k);
    p.g0.assign(4, 0.0);
    p.g1.assign(4, 0.0);
    p.cstar = 1;
    auto f = reaction_poly_mc(p, k, 100, 2000, 1);
    CHECK(f.f.is_zero());
    CHECK(f.provenance == Provenance::monte_carlo);
  }

  SUBCASE("staydead gives f(0) = 0") {
    ModelSpec m = build_lv(-1, 0.5, 0.1, k);
    REQUIRE(m.perturbation->staydead());
    auto f = reaction_poly_mc(*m.perturbation, k, 200, 5000, 2);
    CHECK(f.coeff(0) == 0.0);
    CHECK(f.f.degree() <= 3);
    auto [slope, se] = reaction_slope_at_zero(f);
    CHECK(slope == doctest::Approx(f.coeff(1)));
    CHECK(se >= 0);
  }

  SUBCASE("Lotka-Volterra closed form from the same partitions") {
    ModelSpec m = build_lv(-1, 0.5, 0.1, k);
    PartitionLaw law = estimate_nu0(m.perturbation->offspring, k, 500, 20000, 3);
    auto mc = reaction_poly_from_partitions(*m.perturbation, law);
    auto c = lv_coalescence(law);
    auto cf = lv_f(-1, 0.5, c.p2, c.p3);
    for (std::size_t i = 0; i <= 3; ++i) CHECK(std::abs(mc.coeff(i) - cf.coeff(i)) <= 3 * mc.stderr_of(i));
  }
}
