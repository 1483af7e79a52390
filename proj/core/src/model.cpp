#include "votersim/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

#include "votersim/error.hpp"

namespace votersim {

namespace {

std::vector<Offset> origin_and_support(const Kernel& k) {
  std::vector<Offset> pts{Offset(k.dimension(), 0)};
  for (const auto& a : k.atoms()) pts.push_back(a.offset);
  return pts;
}

// f_1 over local[1..] with kernel weights, for neighbourhoods {0} ∪ supp p
double density_one(const std::vector<double>& w, std::span<const std::uint8_t> local) {
  double f = 0;
  for (std::size_t j = 0; j < w.size(); ++j)
    if (local[j + 1]) f += w[j];
  return f;
}

void check_epsilon(double epsilon) {
  if (!(epsilon > 0 && epsilon <= 1)) throw Error(Errc::InvalidArgument, "epsilon must lie in (0, 1]");
}

}  // namespace

double default_cstar(const std::vector<double>& g0, const std::vector<double>& g1) {
  return *std::max_element(g1.begin(), g1.end()) + *std::max_element(g0.begin(), g0.end()) + 1.0;
}

std::vector<double> PerturbationSpec::g_tilde(int i) const {
  std::vector<double> out = g(i);
  if (eps1_inv2 == 0.0) return out;
  for (std::size_t eta = 0; eta < out.size(); ++eta)
    for (std::size_t j = 0; j < shift_weights.size(); ++j)
      if (static_cast<int>((eta >> j) & 1) == i) out[eta] -= eps1_inv2 * shift_weights[j];
  return out;
}

void check_perturbation(const PerturbationSpec& p) {
  const std::size_t n = std::size_t{1} << p.n0();
  if (p.g0.size() != n || p.g1.size() != n) throw Error(Errc::InvalidArgument, "g tables must have 2^N0 entries");
  for (std::size_t i = 0; i < n; ++i)
    if (p.g0[i] < 0 || p.g1[i] < 0) throw Error(Errc::NegativeRate, "g tables must be non-negative");
  if (p.cstar < default_cstar(p.g0, p.g1)) throw Error(Errc::InvalidArgument, "cstar below max g1 + max g0 + 1");
}

int ModelSpec::interaction_range(Backend b) const {
  int r = 0;
  if (b == Backend::graphical) {
    if (perturbation) r = perturbation->offspring.range();
  } else {
    for (const auto& y : neighbourhood)
      for (int c : y) r = std::max(r, std::abs(c));
  }
  return kernel.range() + r;
}

ModelSpec build_voter(const Kernel& k, double epsilon) {
  validate(k);
  check_epsilon(epsilon);
  ModelSpec m;
  m.family = "voter";
  m.kernel = k;
  m.epsilon = epsilon;
  m.voter_rate = 1.0 / (epsilon * epsilon);
  std::vector<std::vector<Offset>> atoms;
  std::vector<Rational> probs;
  for (const auto& a : k.atoms()) {
    atoms.push_back({a.offset});
    probs.push_back(a.weight);
  }
  PerturbationSpec p;
  p.offspring = OffspringLaw::from_atoms(k.dimension(), atoms, probs);
  p.g0 = {0.0, 0.0};
  p.g1 = {0.0, 0.0};
  p.cstar = 1.0;
  m.perturbation = p;
  m.direct_voter_rate = m.voter_rate;
  m.neighbourhood = origin_and_support(k);
  m.h0 = [](std::span<const std::uint8_t>) { return 0.0; };
  m.h1 = m.h0;
  return m;
}

ModelSpec build_lv(double theta0, double theta1, double epsilon, const Kernel& k) {
  validate(k);
  check_epsilon(epsilon);
  const double e1 = std::max({-theta0, -theta1, 0.0}) + 1.0;
  const double eps_inv2 = 1.0 / (epsilon * epsilon);
  if (!(eps_inv2 > e1))
    throw Error(Errc::EpsilonTooLarge, "need epsilon^-2 > " + std::to_string(e1) + " for these thetas");
  ModelSpec m;
  m.family = "lv";
  m.params = {{"theta0", theta0}, {"theta1", theta1}};
  m.kernel = k;
  m.epsilon = epsilon;
  m.voter_rate = eps_inv2 - e1;

  PerturbationSpec p;
  p.offspring = independent_pair_law(k);
  p.eps1_inv2 = e1;
  p.shift_weights = {1.0, 0.0};
  const double theta[2] = {theta0, theta1};
  for (int i = 0; i < 2; ++i) {
    auto& g = i ? p.g1 : p.g0;
    g.assign(4, 0.0);
    for (int eta = 0; eta < 4; ++eta) {
      int y1 = eta & 1, y2 = (eta >> 1) & 1;
      double v = e1 * y1 * (1 - y2);
      if (y1 == i && y2 == i) v += e1 + theta[1 - i];
      g[eta] = v;
    }
  }
  p.cstar = default_cstar(p.g0, p.g1);
  check_perturbation(p);
  m.perturbation = std::move(p);

  m.direct_voter_rate = eps_inv2;
  m.neighbourhood = origin_and_support(k);
  std::vector<double> w = k.weights();
  m.h1 = [w, theta0](std::span<const std::uint8_t> local) {
    double f1 = density_one(w, local);
    return theta0 * f1 * f1;
  };
  m.h0 = [w, theta1](std::span<const std::uint8_t> local) {
    double f0 = 1.0 - density_one(w, local);
    return theta1 * f0 * f0;
  };
  return m;
}

GameGeometry::GameGeometry(const Kernel& neighbourhood) {
  const int d = neighbourhood.dimension();
  k = static_cast<int>(neighbourhood.size());
  std::map<Offset, int> index;
  auto add = [&](const Offset& y) {
    auto [it, inserted] = index.try_emplace(y, static_cast<int>(points.size()));
    if (inserted) points.push_back(y);
    return it->second;
  };
  add(Offset(d, 0));
  for (const auto& a : neighbourhood.atoms()) nbr.push_back(add(a.offset));
  for (const auto& a : neighbourhood.atoms()) {
    std::vector<int> row;
    for (const auto& b : neighbourhood.atoms()) {
      Offset s(d);
      for (int c = 0; c < d; ++c) s[c] = a.offset[c] + b.offset[c];
      row.push_back(add(s));
    }
    nbr_of_nbr.push_back(std::move(row));
  }
}

std::array<double, 2> game_r(const GameParams& g, const GameGeometry& geo, std::span<const std::uint8_t> local) {
  double num[2] = {0, 0};
  for (int a = 0; a < geo.k; ++a) {
    int n1 = 0;
    for (int idx : geo.nbr_of_nbr[a]) n1 += local[idx];
    int n0 = geo.k - n1;
    int state = local[geo.nbr[a]];
    double rho = state ? 1 - g.w + g.w * (g.alpha * n1 + g.beta * n0) : 1 - g.w + g.w * (g.gamma * n1 + g.delta * n0);
    num[state] += rho;
  }
  double den = num[0] + num[1];
  return {num[0] / den, num[1] / den};
}

std::array<double, 2> game_h(const GameParams& g, const GameGeometry& geo, std::span<const std::uint8_t> local) {
  const double k = geo.k;
  int ones = 0, pairs1 = 0, pairs0 = 0;
  for (int a = 0; a < geo.k; ++a) {
    int s = local[geo.nbr[a]];
    ones += s;
    for (int idx : geo.nbr_of_nbr[a]) {
      if (s == 1 && local[idx] == 1) ++pairs1;
      if (s == 0 && local[idx] == 0) ++pairs0;
    }
  }
  double f1 = ones / k, f0 = 1.0 - f1;
  double f1_2 = pairs1 / (k * k), f0_2 = pairs0 / (k * k);
  double theta1 = (g.beta * k - 1) * f1 + k * (g.alpha - g.beta) * f1_2;
  double theta0 = (g.gamma * k - 1) * f0 + k * (g.delta - g.gamma) * f0_2;
  double phi = theta0 + theta1;
  return {theta0 - f0 * phi, theta1 - f1 * phi};
}

double game_R(const GameParams& g, int k) {
  return 2.0 * k * (1 + std::abs(g.alpha) + std::abs(g.beta) + std::abs(g.gamma) + std::abs(g.delta));
}

ModelSpec build_evolution_game(const GameParams& g, const Kernel& neighbourhood) {
  validate(neighbourhood);
  if (!neighbourhood.uniform()) throw Error(Errc::NotUniformKernel, "game neighbourhood kernel must be uniform");
  if (!(g.w > 0 && g.w < 1)) throw Error(Errc::InvalidArgument, "w must lie in (0, 1)");
  const int k = static_cast<int>(neighbourhood.size());
  for (int n1 = 0; n1 <= k; ++n1) {
    double r1 = 1 - g.w + g.w * (g.alpha * n1 + g.beta * (k - n1));
    double r0 = 1 - g.w + g.w * (g.gamma * n1 + g.delta * (k - n1));
    if (r1 <= 0 || r0 <= 0) throw Error(Errc::NegativeFitness, "fitness can be non-positive at this w");
  }
  if (!(g.w < 1.0 / (2.0 * game_R(g, k))))
    throw Error(Errc::SelectionTooStrong, "need w < 1/(2R) with R = " + std::to_string(game_R(g, k)));

  ModelSpec m;
  m.family = "game";
  m.params = {{"alpha", g.alpha}, {"beta", g.beta}, {"gamma", g.gamma}, {"delta", g.delta}, {"w", g.w}};
  m.kernel = neighbourhood;
  m.epsilon = std::sqrt(g.w);
  m.backend = Backend::direct;
  m.direct_voter_rate = 1.0 / g.w;
  m.direct_rate_bound = 1.0 / g.w;
  auto geo = std::make_shared<GameGeometry>(neighbourhood);
  m.neighbourhood = geo->points;
  auto f1_of = [geo](std::span<const std::uint8_t> local) {
    int ones = 0;
    for (int idx : geo->nbr) ones += local[idx];
    return static_cast<double>(ones) / geo->k;
  };
  m.h1 = [g, geo, f1_of](std::span<const std::uint8_t> local) {
    return (game_r(g, *geo, local)[1] - f1_of(local)) / g.w;
  };
  m.h0 = [g, geo, f1_of](std::span<const std::uint8_t> local) {
    return (game_r(g, *geo, local)[0] - (1.0 - f1_of(local))) / g.w;
  };

  const int n0 = static_cast<int>(geo->points.size());
  if (n0 <= kMaxTableBits) {
    LimitTables lt;
    lt.points = geo->points;
    const std::size_t n = std::size_t{1} << n0;
    lt.h0.resize(n);
    lt.h1.resize(n);
    std::vector<std::uint8_t> local(n0);
    for (std::size_t eta = 0; eta < n; ++eta) {
      for (int j = 0; j < n0; ++j) local[j] = (eta >> j) & 1;
      auto h = game_h(g, *geo, local);
      lt.h0[eta] = h[0];
      lt.h1[eta] = h[1];
    }
    PerturbationSpec p = gform_from_h(lt.h0, lt.h1, lt.points, neighbourhood);
    if (m.direct_voter_rate > p.eps1_inv2) {
      m.voter_rate = m.direct_voter_rate - p.eps1_inv2;
      m.perturbation = std::move(p);
    }
    m.limit = std::move(lt);
  }
  return m;
}

ModelSpec build_nlv(const NlvRates& rates, int L, double lambda, double epsilon, int d) {
  if (rates.a0 != 0) throw Error(Errc::InvalidRates, "a(0) must be 0");
  for (double x : rates.a)
    if (x < 0) throw Error(Errc::InvalidRates, "rates must be non-negative");
  if (lambda < 0) throw Error(Errc::InvalidRates, "lambda must be non-negative");
  double total = rates.a[0] + rates.a[1] + rates.a[2] + rates.a[3];
  if (lambda > 0 && total <= 0) throw Error(Errc::InvalidRates, "need some a(j) > 0 when lambda > 0");
  check_epsilon(epsilon);
  Kernel k = box_kernel(d, L);
  validate(k);

  ModelSpec m;
  m.family = "nlv";
  m.params = {{"a1", rates.a[0]}, {"a2", rates.a[1]}, {"a3", rates.a[2]},
              {"a4", rates.a[3]}, {"L", L},          {"lambda", lambda}};
  m.kernel = k;
  m.epsilon = epsilon;
  m.voter_rate = 1.0 / (epsilon * epsilon);

  std::vector<Offset> pool;
  for (const auto& a : k.atoms()) pool.push_back(a.offset);
  auto a_of = [rates](int j) { return j == 0 ? rates.a0 : rates.a[j - 1]; };
  PerturbationSpec p;
  p.offspring = OffspringLaw::without_replacement(d, pool, 4);
  p.g0.resize(16);
  p.g1.resize(16);
  for (int eta = 0; eta < 16; ++eta) {
    int s = __builtin_popcount(static_cast<unsigned>(eta));
    p.g1[eta] = (1 + lambda) * a_of(s);
    p.g0[eta] = a_of(4 - s);
  }
  p.cstar = default_cstar(p.g0, p.g1);
  check_perturbation(p);
  m.perturbation = p;

  m.direct_voter_rate = m.voter_rate;
  m.neighbourhood = origin_and_support(k);
  const int n = static_cast<int>(pool.size());
  auto mix = [n, a_of](std::span<const std::uint8_t> local, bool ones_side) {
    int ones = 0;
    for (int j = 1; j <= n; ++j) ones += local[j];
    double denom = falling(n, 4), h = 0;
    static const int binom4[5] = {1, 4, 6, 4, 1};
    for (int j = 0; j <= 4; ++j) {
      double pr = binom4[j] * falling(ones, j) * falling(n - ones, 4 - j) / denom;
      h += pr * (ones_side ? a_of(j) : a_of(4 - j));
    }
    return h;
  };
  m.h1 = [mix, lambda](std::span<const std::uint8_t> local) { return (1 + lambda) * mix(local, true); };
  m.h0 = [mix](std::span<const std::uint8_t> local) { return mix(local, false); };
  return m;
}

PerturbationSpec gform_from_h(const std::vector<double>& h0, const std::vector<double>& h1,
                              const std::vector<Offset>& points, const Kernel& k) {
  const int n0 = static_cast<int>(points.size());
  if (n0 < 1 || n0 > kMaxTableBits) throw Error(Errc::TooManyOffsets, "N0 out of range for table construction");
  if (std::any_of(points[0].begin(), points[0].end(), [](int c) { return c != 0; }))
    throw Error(Errc::InvalidArgument, "y_1 must be the origin");
  const std::size_t n = std::size_t{1} << n0;
  if (h0.size() != n || h1.size() != n) throw Error(Errc::InvalidArgument, "h tables must have 2^N0 entries");
  std::vector<double> p(n0, 0.0);
  for (std::size_t a = 0; a < k.size(); ++a) {
    auto it = std::find(points.begin(), points.end(), k.offset(a));
    if (it == points.end()) throw Error(Errc::KernelNotCovered, "kernel support not contained in the offsets");
    p[static_cast<std::size_t>(it - points.begin())] += k.weight(a);
  }
  double pmin = 1.0;
  for (double x : p)
    if (x > 0) pmin = std::min(pmin, x);

  PerturbationSpec out;
  std::vector<double> hat[2] = {std::vector<double>(n), std::vector<double>(n)};
  double M = 0;
  for (int i = 0; i < 2; ++i) {
    const auto& h = i ? h1 : h0;
    for (std::size_t eta = 0; eta < n; ++eta) {
      bool origin = eta & 1;
      hat[i][eta] = (static_cast<int>(origin) == 1 - i) ? h[eta] : 0.0;
      M = std::max(M, std::abs(hat[i][eta]));
    }
  }
  const double e1 = M / pmin;
  for (int i = 0; i < 2; ++i) {
    auto& g = i ? out.g1 : out.g0;
    g.resize(n);
    for (std::size_t eta = 0; eta < n; ++eta) {
      double f = 0;
      for (int j = 0; j < n0; ++j)
        if (static_cast<int>((eta >> j) & 1) == i) f += p[j];
      double v = e1 * f + hat[i][eta];
      if (v < 0 && v > -1e-12 * (1 + M)) v = 0;
      if (v < 0) throw Error(Errc::NegativeRate, "limiting h cannot be made non-negative");
      g[eta] = v;
    }
  }
  out.offspring = OffspringLaw::from_atoms(k.dimension(), {points}, {Rational(1)});
  out.eps1_inv2 = e1;
  out.shift_weights = p;
  out.cstar = default_cstar(out.g0, out.g1);
  return out;
}

double local_density(const ModelSpec& m, const Configuration& c, Site x, int i) {
  const Torus& t = c.torus();
  if (2 * m.kernel.range() >= t.side()) throw Error(Errc::TorusTooSmall, "kernel range must be < torus side / 2");
  double f = 0;
  for (std::size_t a = 0; a < m.kernel.size(); ++a)
    if (static_cast<int>(c.get(t.shift(x, m.kernel.offset(a)))) == i) f += m.kernel.weight(a);
  return f;
}

double expected_g(const PerturbationSpec& p, const Configuration& c, Site x, int i) {
  const Torus& t = c.torus();
  const auto& pts = p.offspring.points();
  return p.offspring.expect(p.g(i), [&](OffspringLaw::PointIndex j) { return c.get(t.shift(x, pts[j])); });
}

double flip_rate(const ModelSpec& m, const Configuration& c, Site x, Backend b) {
  const int state = c.get(x);
  const double cv = local_density(m, c, x, 1 - state);
  if (b == Backend::graphical) {
    if (!m.perturbation) throw Error(Errc::InvalidArgument, "model has no g-form");
    return m.voter_rate * cv + expected_g(*m.perturbation, c, x, 1 - state);
  }
  if (!m.has_direct()) throw Error(Errc::InvalidArgument, "model has no direct rates");
  std::vector<std::uint8_t> local(m.neighbourhood.size());
  for (std::size_t j = 0; j < local.size(); ++j) local[j] = c.get(c.torus().shift(x, m.neighbourhood[j]));
  double rate = m.direct_voter_rate * cv + (state ? m.h0(local) : m.h1(local));
  if (rate < -1e-12) throw Error(Errc::NegativeRate, "direct flip rate is negative");
  return std::max(rate, 0.0);
}

void check_direct_rates(const ModelSpec& m) {
  const int n = static_cast<int>(m.neighbourhood.size());
  if (!m.has_direct() || n > kMaxTableBits) return;
  std::vector<double> w(n, 0.0);
  for (std::size_t a = 0; a < m.kernel.size(); ++a) {
    auto it = std::find(m.neighbourhood.begin(), m.neighbourhood.end(), m.kernel.offset(a));
    w[static_cast<std::size_t>(it - m.neighbourhood.begin())] += m.kernel.weight(a);
  }
  std::vector<std::uint8_t> local(n);
  for (std::size_t eta = 0; eta < (std::size_t{1} << n); ++eta) {
    double f1 = 0;
    for (int j = 0; j < n; ++j) {
      local[j] = (eta >> j) & 1;
      if (local[j]) f1 += w[j];
    }
    int state = local[0];
    double cv = state ? 1.0 - f1 : f1;
    double rate = m.direct_voter_rate * cv + (state ? m.h0(local) : m.h1(local));
    if (rate < -1e-12) throw Error(Errc::NegativeRate, "direct flip rate negative at a local configuration");
  }
}

}  // namespace votersim
