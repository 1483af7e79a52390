#include "votersim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <json.hpp>
#include <mutex>
#include <sstream>
#include <thread>
#include <toml.hpp>

#include "votersim/coalesce.hpp"
#include "votersim/error.hpp"
#include "votersim/io.hpp"
#include "votersim/pde.hpp"

namespace votersim {

namespace {

constexpr std::size_t kMaxSites = std::size_t{1} << 27;

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean_of(v), s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

std::size_t site_count(int d, int side) {
  double n = std::pow(static_cast<double>(side), d);
  if (n > static_cast<double>(kMaxSites)) throw Error(Errc::InvalidArgument, "torus exceeds the 2^27 site limit");
  return static_cast<std::size_t>(n);
}

}  // namespace

double ModelChoice::param(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

double ModelChoice::param(const std::string& key) const {
  auto it = params.find(key);
  if (it == params.end()) throw Error(Errc::InvalidArgument, "model parameter '" + key + "' missing");
  return it->second;
}

ModelSpec ModelChoice::build(double eps) const {
  Kernel k = kernel_from_spec(kernel, dimension);
  ModelSpec m;
  if (family == "voter") {
    m = build_voter(k, eps);
  } else if (family == "lv") {
    m = build_lv(param("theta0"), param("theta1"), eps, k);
  } else if (family == "game") {
    GameParams g;
    if (params.count("b")) {
      double b = param("b"), c = param("c");
      g.alpha = b - c;
      g.beta = -c;
      g.gamma = b;
      g.delta = 0;
    } else {
      g.alpha = param("alpha");
      g.beta = param("beta");
      g.gamma = param("gamma");
      g.delta = param("delta");
    }
    g.w = param("w", eps * eps);
    m = build_evolution_game(g, k);
  } else if (family == "nlv") {
    NlvRates r;
    r.a = {param("a1"), param("a2"), param("a3"), param("a4")};
    m = build_nlv(r, static_cast<int>(param("L", 1)), param("lambda", 0), eps, dimension);
  } else {
    throw Error(Errc::InvalidArgument, "unknown model family '" + family + "'");
  }
  m.backend = backend;
  if (backend == Backend::graphical && !m.perturbation)
    throw Error(Errc::InvalidArgument, "this model has no g-form; use the direct backend");
  return m;
}

int resolve_jobs(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("VOTERSIM_JOBS")) {
    int j = std::atoi(env);
    if (j > 0) return j;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!err) err = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

int block_side(double epsilon, double r, int torus_side) {
  int a = static_cast<int>(std::ceil(std::pow(epsilon, r - 1) - 1e-9));
  a = std::clamp(a, 1, torus_side);
  while (torus_side % a) ++a;
  return a;
}

ReactionPolynomial reference_reaction(const ModelChoice& model, double cutoff, std::size_t samples,
                                      std::uint64_t seed) {
  if (model.family == "voter") {
    ReactionPolynomial r;
    r.source = "voter";
    return r;
  }
  Kernel k = kernel_from_spec(model.kernel, model.dimension);
  if (model.family == "lv") {
    ModelSpec m = model.build(model.epsilon);
    auto c = lv_coalescence(estimate_nu0(m.perturbation->offspring, k, cutoff, samples, seed));
    return lv_f(model.param("theta0"), model.param("theta1"), c.p2, c.p3, c.se2, c.se3);
  }
  if (model.family == "game") {
    ModelSpec m = model.build(model.epsilon);
    const int d = model.dimension;
    double p01 = estimate(parse_pattern("0|e1", d), k, cutoff, samples, seed).value;
    auto q = parse_pattern("e1|e2,e2+e3", d);
    auto shared = estimate_shared(q.points, {{{0}, {1, 2}}, {{0}, {1}, {2}}}, k, cutoff, samples, seed + 1);
    const auto& gp = m.params;
    return coop_f(gp.at("alpha"), gp.at("beta"), gp.at("gamma"), gp.at("delta"), static_cast<int>(k.size()), p01,
                  shared[0].value, shared[1].value);
  }
  ModelSpec m = model.build(model.epsilon);
  if (!m.perturbation) throw Error(Errc::InvalidArgument, "model has no g-form for the generic construction");
  return reaction_poly_mc(*m.perturbation, k, cutoff, samples, seed);
}

std::pair<double, double> HydroReport::discrepancy(double epsilon) const {
  double s = 0, v = 0;
  int n = 0;
  for (const auto& p : points) {
    if (p.epsilon != epsilon) continue;
    s += p.discrepancy;
    v += p.discrepancy_se * p.discrepancy_se;
    ++n;
  }
  if (n == 0) throw Error(Errc::InvalidArgument, "epsilon not in the report");
  return {s / n, std::sqrt(v) / n};
}

HydroReport hydro_experiment(const HydroConfig& cfg) {
  if (cfg.epsilons.empty() || cfg.times.empty()) throw Error(Errc::InvalidArgument, "need epsilons and times");
  if (cfg.replicates < 1) throw Error(Errc::InvalidArgument, "need at least one replicate");
  HydroReport rep;
  rep.config = cfg;
  const int d = cfg.model.dimension;
  const double r = cfg.block_exponent > 0 ? cfg.block_exponent : 1.0 / (16.0 * d);
  if (cfg.reference) {
    rep.f.f = *cfg.reference;
    rep.f.source = "config";
  } else {
    rep.f = reference_reaction(cfg.model, cfg.cutoff, cfg.coalesce_samples, stream_key(cfg.seed, 0, StreamKind::walks));
  }
  rep.sigma2 = kernel_from_spec(cfg.model.kernel, d).sigma2();
  std::vector<double> times = cfg.times;
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  const double T = times.back();

  std::vector<double> eps = cfg.epsilons;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  for (std::size_t ei = 0; ei < eps.size(); ++ei) {
    const double e = eps[ei];
    const int M = static_cast<int>(std::llround(cfg.physical_side / e));
    site_count(d, M);
    ModelSpec m = cfg.model.build(e);
    Torus torus(d, M);
    check_torus(m, torus, cfg.model.backend);
    const int a = block_side(e, r, M);
    Torus blocks(d, M / a);
    const std::size_t nb = blocks.sites();

    // reference per (t, block)
    std::vector<std::vector<double>> ref(times.size(), std::vector<double>(nb));
    if (!cfg.profile) {
      for (std::size_t ti = 0; ti < times.size(); ++ti) {
        double u = solve_ode(rep.f.f, cfg.v, times[ti]);
        std::fill(ref[ti].begin(), ref[ti].end(), u);
      }
    } else {
      const double side = cfg.physical_side;
      const double pad = 2 * side;
      Grid1D grid = Grid1D::make(-pad, side + pad, cfg.pde_dx, rep.sigma2);
      auto v0 = [&](double x) { return cfg.profile(x - side * std::floor(x / side)); };
      auto res = solve_rd_1d(rep.f.f, v0, T, grid, times);
      for (std::size_t ti = 0; ti < times.size(); ++ti) {
        const auto& u = res.frames[ti].u;
        for (Site b = 0; b < nb; ++b) {
          double x = (blocks.coords(b)[0] * a + 0.5 * (a - 1)) * e;
          double pos = (x - grid.x_min) / grid.dx - 0.5;
          auto i = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(u.size() - 2)));
          double w = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
          ref[ti][b] = (1 - w) * u[i] + w * u[i + 1];
        }
      }
    }

    struct RepResult {
      std::vector<std::vector<double>> field;  // per t
      std::vector<double> density;
    };
    std::vector<RepResult> results(cfg.replicates);
    parallel_for(cfg.replicates, resolve_jobs(cfg.jobs), [&](std::size_t ri) {
      const std::uint64_t idx = ei * 1000003ULL + ri;
      const std::uint64_t init_seed = stream_key(cfg.seed, idx, StreamKind::initial);
      const std::uint64_t run_seed = stream_key(cfg.seed, idx, StreamKind::replicate);
      Configuration xi0 =
          cfg.profile ? Configuration::bernoulli(
                            torus, [&](const std::vector<int>& x) { return cfg.profile(x[0] * e); }, init_seed)
                      : Configuration::bernoulli(torus, cfg.v, init_seed);
      SimResult sim = simulate_forward(m, xi0, T, run_seed, cfg.model.backend, times);
      RepResult out;
      for (const auto& s : sim.snapshots) {
        out.field.push_back(coarse_density(s.config, a));
        out.density.push_back(s.config.density());
      }
      results[ri] = std::move(out);
    });

    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      HydroPoint p;
      p.epsilon = e;
      p.t = times[ti];
      p.torus_side = M;
      p.block = a;
      p.replicates = cfg.replicates;
      p.reference = ref[ti];
      p.reference_density = mean_of(ref[ti]);
      p.empirical.assign(nb, 0.0);
      std::vector<double> disc, dens;
      double sq = 0;
      for (const auto& rr : results) {
        const auto& field = rr.field[ti];
        double s = 0;
        for (std::size_t b = 0; b < nb; ++b) {
          double err = std::abs(field[b] - ref[ti][b]);
          s += err;
          sq += err * err;
          p.sup = std::max(p.sup, err);
          p.empirical[b] += field[b] / static_cast<double>(cfg.replicates);
        }
        disc.push_back(s / static_cast<double>(nb));
        dens.push_back(rr.density[ti]);
      }
      p.discrepancy = mean_of(disc);
      p.discrepancy_se = se_of(disc);
      p.l2 = std::sqrt(sq / static_cast<double>(nb * cfg.replicates));
      p.density = mean_of(dens);
      p.density_se = se_of(dens);
      rep.points.push_back(std::move(p));
    }
  }
  return rep;
}

std::string fate_name(Fate f) {
  switch (f) {
    case Fate::coexist: return "coexist";
    case Fate::zeros_take_over: return "zeros_take_over";
    case Fate::ones_take_over: return "ones_take_over";
    case Fate::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Fate classify_replicate(const std::vector<double>& times, const std::vector<double>& density, double window_start,
                        double theta_lo, double theta_hi, std::optional<double>* absorbed_at) {
  if (!(0 < theta_lo && theta_lo < theta_hi && theta_hi < 1))
    throw Error(Errc::InvalidArgument, "need 0 < theta_lo < theta_hi < 1");
  if (times.empty() || times.size() != density.size()) throw Error(Errc::InvalidArgument, "empty density series");
  const double last = density.back();
  if (last == 0.0 || last == 1.0) {
    std::size_t i = density.size();
    while (i > 0 && density[i - 1] == last) --i;
    if (absorbed_at) *absorbed_at = times[i];
    return last == 0.0 ? Fate::zeros_take_over : Fate::ones_take_over;
  }
  bool in = true, below = true, above = true, any = false;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < window_start) continue;
    any = true;
    in = in && density[i] >= theta_lo && density[i] <= theta_hi;
    below = below && density[i] < theta_lo;
    above = above && density[i] > theta_hi;
  }
  if (!any) return Fate::inconclusive;
  if (in) return Fate::coexist;
  if (below) return Fate::zeros_take_over;
  if (above) return Fate::ones_take_over;
  return Fate::inconclusive;
}

Fate classify_overall(const std::vector<Fate>& fates, double quorum) {
  if (fates.empty()) return Fate::inconclusive;
  for (Fate f : {Fate::coexist, Fate::zeros_take_over, Fate::ones_take_over}) {
    auto n = std::count(fates.begin(), fates.end(), f);
    if (static_cast<double>(n) >= quorum * static_cast<double>(fates.size())) return f;
  }
  return Fate::inconclusive;
}

int torus_side_of(const ModelChoice& model) {
  return model.torus_side > 0 ? model.torus_side : static_cast<int>(std::llround(1.0 / model.epsilon));
}

SimResult run_simulation(const SimulateConfig& cfg) {
  if (!(cfg.T > 0)) throw Error(Errc::InvalidArgument, "need T > 0");
  ModelSpec m = cfg.model.build();
  const int d = cfg.model.dimension;
  const int M = torus_side_of(cfg.model);
  site_count(d, M);
  Torus torus(d, M);
  check_torus(m, torus, cfg.model.backend);
  if (cfg.block < 1 || M % cfg.block != 0) throw Error(Errc::BlockMisaligned, "block must divide the torus side");
  std::vector<double> times = cfg.snapshots;
  times.push_back(cfg.T);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  if (times.front() < 0 || times.back() > cfg.T) throw Error(Errc::InvalidArgument, "snapshot times must lie in [0, T]");
  const std::uint64_t init = stream_key(cfg.seed, 0, StreamKind::initial);
  Configuration xi0;
  if (cfg.profile) {
    const double side = M * cfg.model.epsilon;
    xi0 = Configuration::bernoulli(
        torus, [&](const std::vector<int>& x) { return cfg.profile(x[0] * side / M); }, init);
  } else {
    xi0 = Configuration::bernoulli(torus, cfg.v, init);
  }
  return simulate_forward(m, xi0, cfg.T, stream_key(cfg.seed, 0, StreamKind::replicate), cfg.model.backend, times);
}

FateReport fate_experiment(const FateConfig& cfg) {
  if (!(cfg.T > 0) || !(cfg.sample_dt > 0)) throw Error(Errc::InvalidArgument, "need T > 0 and sample_dt > 0");
  if (!(0 < cfg.theta_lo && cfg.theta_lo < cfg.theta_hi && cfg.theta_hi < 1))
    throw Error(Errc::InvalidArgument, "need 0 < theta_lo < theta_hi < 1");
  FateReport rep;
  rep.config = cfg;
  ModelSpec m = cfg.model.build();
  const int d = cfg.model.dimension;
  const int M = torus_side_of(cfg.model);
  site_count(d, M);
  Torus torus(d, M);
  check_torus(m, torus, cfg.model.backend);
  std::vector<double> times;
  const auto steps = static_cast<std::size_t>(std::floor(cfg.T / cfg.sample_dt + 1e-9));
  for (std::size_t i = 0; i <= steps; ++i) times.push_back(static_cast<double>(i) * cfg.sample_dt);
  const double window_start = cfg.T * (1 - cfg.window);

  rep.replicates.resize(cfg.replicates);
  parallel_for(cfg.replicates, resolve_jobs(cfg.jobs), [&](std::size_t ri) {
    FateReplicate fr;
    fr.seed = stream_key(cfg.seed, ri, StreamKind::replicate);
    Configuration xi0 = Configuration::bernoulli(torus, cfg.v, stream_key(cfg.seed, ri, StreamKind::initial));
    SimResult sim = simulate_forward(m, xi0, times.back(), fr.seed, cfg.model.backend, times);
    for (const auto& s : sim.snapshots) {
      fr.times.push_back(s.t);
      fr.density.push_back(s.config.density());
    }
    fr.fate = classify_replicate(fr.times, fr.density, window_start, cfg.theta_lo, cfg.theta_hi, &fr.absorbed_at);
    std::vector<double> win;
    for (std::size_t i = 0; i < fr.times.size(); ++i)
      if (fr.times[i] >= window_start) win.push_back(fr.density[i]);
    fr.terminal = mean_of(win);
    rep.replicates[ri] = std::move(fr);
  });
  std::vector<Fate> fates;
  for (const auto& fr : rep.replicates) {
    fates.push_back(fr.fate);
    ++rep.counts[fr.fate];
  }
  rep.classification = classify_overall(fates, cfg.quorum);
  return rep;
}

namespace {

nlohmann::ordered_json model_json(const ModelChoice& m) {
  nlohmann::ordered_json j;
  j["family"] = m.family;
  j["params"] = m.params;
  j["kernel"] = m.kernel;
  j["dimension"] = m.dimension;
  j["epsilon"] = m.epsilon;
  j["torus_side"] = m.torus_side;
  j["backend"] = m.backend == Backend::graphical ? "graphical" : "direct";
  return j;
}

}  // namespace

std::string hydro_csv(const HydroReport& r) {
  std::ostringstream out;
  const int d = r.config.model.dimension;
  out << "epsilon,t";
  for (int i = 1; i <= d; ++i) out << ",block_x" << i;
  out << ",empirical,reference,abs_err\n";
  for (const auto& p : r.points) {
    Torus blocks(d, p.torus_side / p.block);
    for (Site b = 0; b < blocks.sites(); ++b) {
      out << num(p.epsilon) << ',' << num(p.t);
      for (int c : blocks.coords(b)) out << ',' << c;
      out << ',' << num(p.empirical[b]) << ',' << num(p.reference[b]) << ','
          << num(std::abs(p.empirical[b] - p.reference[b])) << '\n';
    }
  }
  return out.str();
}

std::string hydro_json(const HydroReport& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["experiment"] = "hydro";
  j["seed"] = r.config.seed;
  j["model"] = model_json(r.config.model);
  j["v"] = r.config.v;
  if (!r.config.profile_text.empty()) j["profile"] = r.config.profile_text;
  j["physical_side"] = r.config.physical_side;
  j["replicates"] = r.config.replicates;
  j["sigma2"] = r.sigma2;
  j["f_coefficients"] = r.f.f.coeffs();
  j["f_stderr"] = r.f.stderrs;
  j["f_source"] = r.f.source;
  auto& pts = j["points"] = nlohmann::ordered_json::array();
  for (const auto& p : r.points) {
    nlohmann::ordered_json q;
    q["epsilon"] = p.epsilon;
    q["t"] = p.t;
    q["torus_side"] = p.torus_side;
    q["block"] = p.block;
    q["density"] = p.density;
    q["density_stderr"] = p.density_se;
    q["reference"] = p.reference_density;
    q["discrepancy"] = p.discrepancy;
    q["discrepancy_stderr"] = p.discrepancy_se;
    q["sup"] = p.sup;
    q["l2"] = p.l2;
    pts.push_back(q);
  }
  return j.dump(2) + "\n";
}

std::string simulation_json(const SimulateConfig& cfg, const SimResult& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["experiment"] = "simulate";
  j["seed"] = cfg.seed;
  j["model"] = model_json(cfg.model);
  j["v"] = cfg.v;
  if (!cfg.profile_text.empty()) j["profile"] = cfg.profile_text;
  j["T"] = cfg.T;
  j["torus_side"] = r.final.torus().side();
  j["events"] = r.events;
  j["flips"] = r.flips;
  auto& snaps = j["snapshots"] = nlohmann::ordered_json::array();
  for (const auto& s : r.snapshots) snaps.push_back({{"t", s.t}, {"density", s.config.density()}});
  j["final_density"] = r.final.density();
  return j.dump(2) + "\n";
}

std::string fate_series_csv(const FateReport& r) {
  std::ostringstream out;
  out << "replicate,t,density\n";
  for (std::size_t i = 0; i < r.replicates.size(); ++i) {
    const auto& fr = r.replicates[i];
    for (std::size_t k = 0; k < fr.times.size(); ++k)
      out << i << ',' << num(fr.times[k]) << ',' << num(fr.density[k]) << '\n';
  }
  return out.str();
}

std::string fate_json(const FateReport& r, const std::string& series_path) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["experiment"] = "fate";
  j["seed"] = r.config.seed;
  j["model"] = model_json(r.config.model);
  j["classification"] = fate_name(r.classification);
  j["series_path"] = series_path;
  j["thresholds"] = {r.config.theta_lo, r.config.theta_hi};
  j["quorum"] = r.config.quorum;
  j["T"] = r.config.T;
  j["window"] = r.config.window;
  j["v"] = r.config.v;
  nlohmann::ordered_json counts;
  for (Fate f : {Fate::coexist, Fate::zeros_take_over, Fate::ones_take_over, Fate::inconclusive}) {
    auto it = r.counts.find(f);
    counts[fate_name(f)] = it == r.counts.end() ? 0 : it->second;
  }
  j["counts"] = counts;
  auto& reps = j["replicates"] = nlohmann::ordered_json::array();
  for (const auto& fr : r.replicates) {
    nlohmann::ordered_json q;
    q["fate"] = fate_name(fr.fate);
    q["terminal_density"] = fr.terminal;
    q["absorbed_at"] = fr.absorbed_at ? nlohmann::ordered_json(*fr.absorbed_at) : nlohmann::ordered_json(nullptr);
    reps.push_back(q);
  }
  return j.dump(2) + "\n";
}

namespace {

toml::table parse_toml(const std::string& text) {
  try {
    return toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw Error(Errc::ParseError, std::string(e.description()));
  }
}

std::vector<double> number_list(toml::node_view<toml::node> node, const std::string& key) {
  std::vector<double> out;
  if (!node) return out;
  const toml::array* arr = node.as_array();
  if (!arr) throw Error(Errc::ParseError, "'" + key + "' must be an array");
  for (const auto& x : *arr) {
    auto v = x.value<double>();
    if (!v) throw Error(Errc::ParseError, "'" + key + "' must hold numbers");
    out.push_back(*v);
  }
  return out;
}

ModelChoice model_from_table(const toml::table& root) {
  const toml::table* t = root["model"].as_table();
  if (!t) throw Error(Errc::ParseError, "missing [model] section");
  ModelChoice m;
  for (const auto& [k, v] : *t) {
    std::string key(k.str());
    if (key == "family") m.family = v.value_or(std::string("lv"));
    else if (key == "kernel") m.kernel = v.value_or(std::string("nn"));
    else if (key == "dimension") m.dimension = static_cast<int>(v.value_or(std::int64_t{3}));
    else if (key == "epsilon") m.epsilon = v.value_or(0.25);
    else if (key == "torus_side") m.torus_side = static_cast<int>(v.value_or(std::int64_t{0}));
    else if (key == "backend") {
      std::string b = v.value_or(std::string("graphical"));
      if (b == "graphical") m.backend = Backend::graphical;
      else if (b == "direct") m.backend = Backend::direct;
      else throw Error(Errc::ParseError, "backend must be graphical or direct");
    } else if (auto x = v.value<double>()) {
      m.params[key] = *x;
    } else {
      throw Error(Errc::ParseError, "model key '" + key + "' must be numeric");
    }
  }
  if (m.family == "game" && !t->contains("epsilon") && m.params.count("w")) m.epsilon = std::sqrt(m.params["w"]);
  return m;
}

}  // namespace

std::function<double(double)> parse_profile(const std::string& text, double side) {
  auto parts = std::vector<std::string>{};
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3) throw Error(Errc::ParseError, "profile must be 'cos:mean:amp' or 'step:left:right'");
  double a = std::stod(parts[1]), b = std::stod(parts[2]);
  if (parts[0] == "cos") {
    if (a - std::abs(b) < 0 || a + std::abs(b) > 1) throw Error(Errc::InvalidArgument, "profile leaves [0, 1]");
    return [a, b, side](double x) { return a + b * std::cos(2 * M_PI * x / side); };
  }
  if (parts[0] == "step") {
    if (a < 0 || a > 1 || b < 0 || b > 1) throw Error(Errc::InvalidArgument, "profile leaves [0, 1]");
    return [a, b, side](double x) { return x < side / 2 ? a : b; };
  }
  throw Error(Errc::ParseError, "unknown profile kind '" + parts[0] + "'");
}

ModelChoice parse_model_config(const std::string& toml_text) { return model_from_table(parse_toml(toml_text)); }

HydroConfig parse_hydro_config(const std::string& toml_text) {
  toml::table root = parse_toml(toml_text);
  HydroConfig c;
  c.model = model_from_table(root);
  auto ex = root["experiment"];
  c.v = ex["v"].value_or(c.v);
  c.epsilons = number_list(ex["epsilons"], "epsilons");
  if (c.epsilons.empty()) c.epsilons = {c.model.epsilon};
  c.times = number_list(ex["times"], "times");
  c.physical_side = ex["physical_side"].value_or(c.physical_side);
  c.block_exponent = ex["block_exponent"].value_or(c.block_exponent);
  c.replicates = static_cast<std::size_t>(ex["replicates"].value_or(std::int64_t{20}));
  c.seed = static_cast<std::uint64_t>(ex["seed"].value_or(std::int64_t{1}));
  c.jobs = static_cast<int>(ex["jobs"].value_or(std::int64_t{0}));
  c.cutoff = ex["cutoff"].value_or(c.cutoff);
  c.coalesce_samples = static_cast<std::size_t>(ex["coalesce_samples"].value_or(std::int64_t{20000}));
  if (auto p = ex["profile"].value<std::string>()) {
    c.profile_text = *p;
    c.profile = parse_profile(*p, c.physical_side);
  }
  auto ref = number_list(ex["reference_f"], "reference_f");
  if (!ref.empty()) c.reference = RealPoly(ref);
  c.pde_dx = root["grid"]["dx"].value_or(c.pde_dx);
  return c;
}

FateConfig parse_fate_config(const std::string& toml_text) {
  toml::table root = parse_toml(toml_text);
  FateConfig c;
  c.model = model_from_table(root);
  auto ex = root["experiment"];
  c.v = ex["v"].value_or(c.v);
  c.T = ex["T"].value_or(c.T);
  c.sample_dt = ex["sample_dt"].value_or(c.sample_dt);
  c.window = ex["window"].value_or(c.window);
  c.theta_lo = ex["theta_lo"].value_or(c.theta_lo);
  c.theta_hi = ex["theta_hi"].value_or(c.theta_hi);
  c.quorum = ex["quorum"].value_or(c.quorum);
  c.replicates = static_cast<std::size_t>(ex["replicates"].value_or(std::int64_t{20}));
  c.seed = static_cast<std::uint64_t>(ex["seed"].value_or(std::int64_t{1}));
  c.jobs = static_cast<int>(ex["jobs"].value_or(std::int64_t{0}));
  return c;
}

SimulateConfig parse_simulate_config(const std::string& toml_text) {
  toml::table root = parse_toml(toml_text);
  SimulateConfig c;
  c.model = model_from_table(root);
  auto ex = root["experiment"];
  c.v = ex["v"].value_or(c.v);
  c.T = ex["T"].value_or(c.T);
  c.snapshots = number_list(ex["snapshots"], "snapshots");
  c.block = static_cast<int>(ex["block"].value_or(std::int64_t{1}));
  c.seed = static_cast<std::uint64_t>(ex["seed"].value_or(std::int64_t{1}));
  if (auto p = ex["profile"].value<std::string>()) {
    c.profile_text = *p;
    c.profile = parse_profile(*p, torus_side_of(c.model) * c.model.epsilon);
  }
  return c;
}

}  // namespace votersim
