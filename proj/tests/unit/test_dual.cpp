#include <doctest.h>

#include <cmath>

#include "votersim/dual.hpp"
#include "votersim/error.hpp"
#include "votersim/pde.hpp"

using namespace votersim;

namespace {

EventLog empty_log(const ModelSpec& m, const Torus& t, double T) {
  EventLog log;
  log.torus = t;
  log.horizon = T;
  log.n0 = m.perturbation->n0();
  log.voter.resize(t.sites());
  log.reaction.resize(t.sites());
  return log;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("dual without events stays put") {
  ModelSpec m = build_lv(-1, -1, 0.25, nn_kernel(3));
  Torus t(3, 6);
  EventLog log = empty_log(m, t, 1.0);
  std::vector<Site> z{3, 40, 3, 100};
  DualState d = run_dual(log, m, z, 1.0);
  CHECK(d.particle_count() == 4);
  CHECK(d.reactions().empty());
  for (ParticleIndex k = 0; k < 4; ++k) CHECK(d.position(k, 1.0) == z[k]);
  CHECK(d.live(1.0) == std::vector<ParticleIndex>{0, 1, 3});
  CHECK(d.representative(2, 0.5) == 0);

  std::vector<std::uint8_t> leaf{1, 0, kNoInput, 1};
  auto out = compute(d, *m.perturbation, leaf, 1.0);
  CHECK(out == std::vector<std::uint8_t>{1, 0, 1, 1});
  std::vector<std::uint8_t> missing{1, kNoInput, 0, 1};
  try {
    compute(d, *m.perturbation, missing, 1.0);
    FAIL("expected MissingInput");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingInput);
  }
  CHECK_THROWS_AS(run_dual(log, m, z, 2.0), Error);
}

TEST_CASE("voter duals coalesce") {
  ModelSpec m = build_voter(nn_kernel(3), 1.0);
  Torus t(3, 5);
  EventLog log = gen_log(m, t, 200.0, 4);
  for (auto& r : log.reaction) r.clear();
  std::vector<int> a{0, 0, 0}, b{1, 0, 0};
  std::vector<Site> z{t.index(a), t.index(b)};
  DualState d = run_dual(log, m, z, 200.0);
  CHECK(d.particle_count() == 2);
  CHECK(d.representative(1, 200.0) == 0);
  CHECK(d.position(0, 200.0) == d.position(1, 200.0));
  CHECK(d.live(200.0).size() == 1);
}

TEST_CASE("particle count grows by N0 per reaction") {
  ModelSpec m = build_lv(-1, -1, 0.25, nn_kernel(3));
  Torus t(3, 5);
  for (std::uint64_t s = 0; s < 1000; ++s) {
    EventLog log = gen_log(m, t, 0.3, s);
    Stream rng(s, 0, StreamKind::trial);
    std::vector<Site> z{static_cast<Site>(rng.below(t.sites())), static_cast<Site>(rng.below(t.sites()))};
    DualState d = run_dual(log, m, z, 0.3);
    CHECK(d.particle_count() == z.size() + d.reactions().size() * 2);
    for (std::size_t i = 0; i < d.reactions().size(); ++i)
      CHECK(d.particle_count(d.reactions()[i].s) == z.size() + (i + 1) * 2);
  }
}

TEST_CASE("staydead duals keep zeros") {
  ModelSpec m = build_lv(-1, -1, 0.25, nn_kernel(3));
  Torus t(3, 6);
  Configuration zeros(t);
  for (std::uint64_t s = 0; s < 50; ++s) {
    EventLog log = gen_log(m, t, 1.0, s);
    std::vector<Site> z{0, 7, 99};
    DualState d = run_dual(log, m, z, 1.0);
    for (auto v : compute(d, *m.perturbation, zeros)) CHECK(v == 0);
  }
}

TEST_CASE("forward and dual values agree exactly") {
  ModelSpec m = build_lv(-1, -1, 0.25, nn_kernel(3));
  DualityCheck r = duality_check(m, Torus(3, 6), 1.0, 200, 2024);
  CHECK(r.trials == 200);
  CHECK(r.mismatches == 0);

  ModelSpec nlv = build_nlv({0, {1, 1, 3, 3}}, 1, 0.5, 0.5, 2);
  CHECK(duality_check(nlv, Torus(2, 8), 0.5, 100, 7).mismatches == 0);
}

// One uniform drives both flip directions, so monotonicity needs one table
// to vanish.
TEST_CASE("compute is monotone for one-sided monotone tables") {
  ModelSpec m = build_voter(nn_kernel(3), 0.5);
  PerturbationSpec p;
  p.offspring = independent_pair_law(m.kernel);
  p.g1 = {0, 1, 1, 2};
  p.g0 = {0, 0, 0, 0};
  p.cstar = default_cstar(p.g0, p.g1);
  m.perturbation = p;
  Torus t(3, 6);
  for (std::uint64_t s = 0; s < 100; ++s) {
    EventLog log = gen_log(m, t, 0.5, s);
    std::vector<Site> z{static_cast<Site>(s % t.sites())};
    DualState d = run_dual(log, m, z, 0.5);
    Stream rng(s, 1, StreamKind::trial);
    std::vector<std::uint8_t> lo(d.particle_count()), hi(d.particle_count());
    for (std::size_t k = 0; k < lo.size(); ++k) {
      lo[k] = rng.bernoulli(0.4);
      hi[k] = lo[k] | rng.bernoulli(0.5);
    }
    CHECK(compute(d, p, lo, 0.5)[0] <= compute(d, p, hi, 0.5)[0]);
  }
}

TEST_CASE("live classes grow at most exponentially") {
  ModelSpec m = build_lv(-1, -1, 0.25, nn_kernel(3));
  Torus t(3, 10);
  const double T = 0.5;
  double total = 0;
  const int runs = 200;
  for (int s = 0; s < runs; ++s) {
    EventLog log = gen_log(m, t, T, 500 + s);
    std::vector<Site> z{0};
    total += static_cast<double>(run_dual(log, m, z, T).live(T).size());
  }
  const double cb = m.perturbation->cstar * m.perturbation->n0();
  CHECK(total / runs <= std::exp(cb * T));
}

TEST_CASE("branching Brownian motion") {
  Kernel k = nn_kernel(3);
  const double sigma2 = k.sigma2();

  SUBCASE("no reactions gives the heat kernel") {
    ModelSpec m = build_voter(k, 0.5);
    const auto& p = *m.perturbation;
    PartitionLaw law = estimate_nu0(p.offspring, k, 100, 1000, 3);
    Profile v = [](std::span<const double> y) { return y[0] < 0 ? 1.0 : 0.0; };
    std::vector<double> x{0.3, 0, 0};
    auto e = bbm_estimate_u(p, law, sigma2, v, 1.0, x, 20000, 5);
    const double want = normal_cdf(-0.3 / std::sqrt(sigma2));
    CHECK(std::abs(e.value - want) < 3 * e.std_error);

    auto at0 = bbm_estimate_u(p, law, sigma2, v, 0.0, std::vector<double>{-0.1, 0, 0}, 100, 6);
    CHECK(at0.value == 1.0);
  }

  SUBCASE("constant data follows the ODE") {
    ModelSpec m = build_lv(-1, -1, 0.1, k);
    const auto& p = *m.perturbation;
    PartitionLaw law = estimate_nu0(p.offspring, k, 1000, 20000, 8);
    ReactionPolynomial f = reaction_poly_from_partitions(p, law);
    Profile v = [](std::span<const double>) { return 0.3; };
    auto e = bbm_estimate_u(p, law, sigma2, v, 1.0, std::vector<double>{0, 0, 0}, 20000, 9);
    CHECK(std::abs(e.value - solve_ode(f.f, 0.3, 1.0)) < 3 * e.std_error);
  }
}
