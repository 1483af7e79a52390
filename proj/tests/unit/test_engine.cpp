#include <doctest.h>

#include <cmath>
#include <numeric>

#include "votersim/engine.hpp"
#include "votersim/error.hpp"
#include "votersim/harness.hpp"

using namespace votersim;

namespace {

struct Moments {
  double mean = 0, se = 0;
};

Moments moments(const std::vector<double>& x) {
  double m = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  double v = 0;
  for (double y : x) v += (y - m) * (y - m);
  v /= (x.size() - 1);
  return {m, std::sqrt(v / x.size())};
}

std::vector<double> final_densities(const ModelSpec& m, const Torus& t, double v, double T, int reps,
                                    std::uint64_t seed, Backend b) {
  std::vector<double> out(reps);
  parallel_for(reps, 0, [&](std::size_t r) {
    Configuration xi0 = Configuration::bernoulli(t, v, stream_key(seed, r, StreamKind::initial));
    out[r] = simulate_forward(m, xi0, T, stream_key(seed, r, StreamKind::replicate), b).final.density();
  });
  return out;
}

}  // namespace

TEST_CASE("event logs") {
  ModelSpec m = build_lv(-1, -1, 0.25, nn_kernel(3));
  Torus t(3, 6);

  SUBCASE("empty at T = 0") { CHECK(gen_log(m, t, 0.0, 1).event_count() == 0); }

  SUBCASE("identical for equal seeds") {
    EventLog a = gen_log(m, t, 1.0, 9), b = gen_log(m, t, 1.0, 9);
    REQUIRE(a.event_count() == b.event_count());
    for (Site s = 0; s < t.sites(); ++s) {
      REQUIRE(a.voter[s].size() == b.voter[s].size());
      for (std::size_t i = 0; i < a.voter[s].size(); ++i) {
        CHECK(a.voter[s][i].t == b.voter[s][i].t);
        CHECK(a.voter[s][i].atom == b.voter[s][i].atom);
      }
      REQUIRE(a.reaction[s].size() == b.reaction[s].size());
      for (std::size_t i = 0; i < a.reaction[s].size(); ++i) CHECK(a.reaction[s][i].u == b.reaction[s][i].u);
    }
  }

  SUBCASE("times increase per site") {
    EventLog a = gen_log(m, t, 2.0, 3);
    for (Site s = 0; s < t.sites(); ++s) {
      for (std::size_t i = 1; i < a.voter[s].size(); ++i) CHECK(a.voter[s][i - 1].t < a.voter[s][i].t);
      for (std::size_t i = 1; i < a.reaction[s].size(); ++i) CHECK(a.reaction[s][i - 1].t < a.reaction[s][i].t);
      if (!a.voter[s].empty()) CHECK(a.voter[s].back().t <= 2.0);
    }
  }

  SUBCASE("voter event counts have the Poisson mean") {
    Torus big(3, 22);  // 10648 sites
    EventLog a = gen_log(m, big, 0.1, 17);
    std::vector<double> counts;
    for (Site s = 0; s < big.sites(); ++s) counts.push_back(static_cast<double>(a.voter[s].size()));
    Moments mo = moments(counts);
    const double want = m.voter_rate * 0.1;
    CHECK(std::abs(mo.mean - want) < 4 * std::sqrt(want / big.sites()));
    std::vector<double> rc;
    for (Site s = 0; s < big.sites(); ++s) rc.push_back(static_cast<double>(a.reaction[s].size()));
    const double rw = m.perturbation->cstar * 0.1;
    CHECK(std::abs(moments(rc).mean - rw) < 4 * std::sqrt(rw / big.sites()));
  }
}

TEST_CASE("forward runs are deterministic and match the log replay") {
  ModelSpec m = build_lv(-1, -0.5, 0.25, nn_kernel(3));
  Torus t(3, 6);
  Configuration xi0 = Configuration::bernoulli(t, 0.4, 12);
  auto a = simulate_forward(m, xi0, 1.0, 77, Backend::graphical);
  auto b = simulate_forward(m, xi0, 1.0, 77, Backend::graphical);
  CHECK(a.final == b.final);
  CHECK(a.events == b.events);
  EventLog log = gen_log(m, t, 1.0, 77);
  CHECK(replay(m, xi0, log, 1.0) == a.final);
  auto d1 = simulate_forward(m, xi0, 1.0, 77, Backend::direct);
  auto d2 = simulate_forward(m, xi0, 1.0, 77, Backend::direct);
  CHECK(d1.final == d2.final);
  CHECK_THROWS_AS(replay(m, xi0, log, 2.0), Error);
}

TEST_CASE("absorbing states") {
  Torus t(3, 6);
  ModelSpec voter = build_voter(nn_kernel(3), 0.25);
  ModelSpec lv = build_lv(-1, -1, 0.25, nn_kernel(3));
  REQUIRE(lv.perturbation->staydead());
  for (std::uint64_t s = 0; s < 100; ++s) {
    CHECK(simulate_forward(voter, Configuration(t, true), 1.0, s, Backend::graphical).final.count_ones() ==
          t.sites());
    CHECK(simulate_forward(lv, Configuration(t), 1.0, s, Backend::graphical).final.count_ones() == 0);
    if (s < 10) CHECK(simulate_forward(lv, Configuration(t), 1.0, s, Backend::direct).final.count_ones() == 0);
  }
}

TEST_CASE("voter density is a martingale") {
  ModelSpec voter = build_voter(nn_kernel(3), 0.25);
  Torus t(3, 8);
  auto d = final_densities(voter, t, 0.3, 1.0, 500, 21, Backend::graphical);
  Moments mo = moments(d);
  CHECK(std::abs(mo.mean - 0.3) < 4 * mo.se);
}

TEST_CASE("graphical and direct backends agree in distribution") {
  ModelSpec m = build_lv(-1, -1, 0.125, nn_kernel(3));
  Torus t(3, 16);
  auto g = moments(final_densities(m, t, 0.5, 1.0, 200, 5, Backend::graphical));
  auto d = moments(final_densities(m, t, 0.5, 1.0, 200, 6, Backend::direct));
  CHECK(std::abs(g.mean - d.mean) < 3 * std::hypot(g.se, d.se));
}

TEST_CASE("thinned direct backend agrees with the exact rate sampler") {
  ModelSpec m = build_lv(-1, -1, 0.25, nn_kernel(3));
  ModelSpec thin = m;
  thin.direct_rate_bound = 16.0;  // voter part <= eps^-2 and h_i <= 0 here
  Torus t(3, 8);
  auto a = moments(final_densities(m, t, 0.3, 1.0, 300, 8, Backend::direct));
  auto b = moments(final_densities(thin, t, 0.3, 1.0, 300, 9, Backend::direct));
  CHECK(std::abs(a.mean - b.mean) < 3 * std::hypot(a.se, b.se));

  ModelSpec bad = m;
  bad.direct_rate_bound = 1.0;
  CHECK_THROWS_AS(simulate_forward(bad, Configuration::bernoulli(t, 0.5, 1), 1.0, 1, Backend::direct), Error);
}

TEST_CASE("snapshots") {
  ModelSpec m = build_voter(nn_kernel(2), 0.25);
  Torus t(2, 8);
  Configuration xi0 = Configuration::bernoulli(t, 0.5, 4);
  std::vector<double> times{0.0, 0.5, 1.0};
  auto r = simulate_forward(m, xi0, 1.0, 3, Backend::graphical, times);
  REQUIRE(r.snapshots.size() == 3);
  CHECK(r.snapshots[0].config == xi0);
  CHECK(r.snapshots[2].config == r.final);
  for (std::size_t i = 0; i < 3; ++i) CHECK(r.snapshots[i].t == times[i]);
  std::vector<double> late{2.0};
  CHECK_THROWS_AS(simulate_forward(m, xi0, 1.0, 3, Backend::graphical, late), Error);
}

TEST_CASE("torus size guard") {
  ModelSpec m = build_lv(-1, -1, 0.25, nn_kernel(3));
  try {
    check_torus(m, Torus(3, 4), Backend::graphical);
    FAIL("expected TorusTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TorusTooSmall);
  }
  CHECK_NOTHROW(check_torus(m, Torus(3, 5), Backend::graphical));
}

TEST_CASE("coarse densities") {
  Torus t1(1, 8);
  Configuration checker(t1);
  for (Site s = 0; s < 8; s += 2) checker.set(s, true);
  for (double b : coarse_density(checker, 2)) CHECK(b == 0.5);
  for (double b : coarse_density(Configuration(Torus(2, 6), true), 3)) CHECK(b == 1.0);
  CHECK_THROWS_AS(coarse_density(checker, 3), Error);

  Torus t(3, 32);
  std::vector<double> blocks;
  for (int r = 0; r < 50; ++r) {
    auto b = coarse_density(Configuration::bernoulli(t, 0.3, 300 + r), 8);
    blocks.insert(blocks.end(), b.begin(), b.end());
  }
  Moments mo = moments(blocks);
  const double var = 0.3 * 0.7 / 512;
  CHECK(std::abs(mo.mean - 0.3) < 4 * std::sqrt(var / blocks.size()));
  double s2 = 0;
  for (double b : blocks) s2 += (b - mo.mean) * (b - mo.mean);
  s2 /= blocks.size() - 1;
  // sample variance of n normal-ish values has sd about var * sqrt(2 / n)
  CHECK(std::abs(s2 - var) < 4 * var * std::sqrt(2.0 / blocks.size()));
}
