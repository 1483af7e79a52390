#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "votersim/coalesce.hpp"
#include "votersim/dual.hpp"
#include "votersim/error.hpp"
#include "votersim/harness.hpp"
#include "votersim/io.hpp"
#include "votersim/pde.hpp"
#include "votersim/reaction.hpp"

using namespace votersim;
using json = nlohmann::ordered_json;

namespace {

struct RunOptions {
  std::string config;
  std::string out = ".";
  std::string format = "both";
  std::int64_t seed = -1;
  int jobs = 0;
};

void add_run_options(CLI::App* sub, RunOptions& o) {
  sub->add_option("--config", o.config, "experiment config file")->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", o.seed, "override the config seed");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--jobs", o.jobs, "worker threads (default VOTERSIM_JOBS or all cores)");
  sub->add_option("--format", o.format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));
}

std::string out_path(const RunOptions& o, const std::string& name) {
  std::filesystem::create_directories(o.out);
  return (std::filesystem::path(o.out) / name).string();
}

bool wants(const RunOptions& o, const char* f) { return o.format == "both" || o.format == f; }

int run_hydro(const RunOptions& o) {
  HydroConfig cfg = parse_hydro_config(read_file(o.config));
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  if (o.jobs > 0) cfg.jobs = o.jobs;
  HydroReport r = hydro_experiment(cfg);
  if (wants(o, "csv")) write_file(out_path(o, "hydro.csv"), hydro_csv(r));
  if (wants(o, "json")) write_file(out_path(o, "hydro.json"), hydro_json(r));
  for (const auto& p : r.points)
    std::cout << "eps=" << p.epsilon << " t=" << p.t << " density=" << p.density << " reference=" << p.reference_density
              << " discrepancy=" << p.discrepancy << " +- " << p.discrepancy_se << '\n';
  return 0;
}

int run_fate(const RunOptions& o) {
  FateConfig cfg = parse_fate_config(read_file(o.config));
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  if (o.jobs > 0) cfg.jobs = o.jobs;
  FateReport r = fate_experiment(cfg);
  const std::string series = out_path(o, "fate_series.csv");
  write_file(series, fate_series_csv(r));
  if (wants(o, "json")) write_file(out_path(o, "fate.json"), fate_json(r, "fate_series.csv"));
  for (const auto& [f, n] : r.counts) std::cout << fate_name(f) << ' ' << n << '\n';
  std::cout << "classification " << fate_name(r.classification) << '\n';
  return 0;
}

int run_simulate(const RunOptions& o) {
  SimulateConfig cfg = parse_simulate_config(read_file(o.config));
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  SimResult r = run_simulation(cfg);
  if (wants(o, "csv")) {
    std::ofstream out(out_path(o, "snapshots.csv"));
    if (!out) throw Error(Errc::IOFailure, "cannot open snapshots.csv");
    write_snapshots_csv(out, r.snapshots, cfg.block);
  }
  if (wants(o, "json")) write_file(out_path(o, "simulate.json"), simulation_json(cfg, r));
  std::ofstream bin(out_path(o, "final.vsnp"), std::ios::binary);
  if (!bin) throw Error(Errc::IOFailure, "cannot open final.vsnp");
  write_snapshot_binary(bin, Snapshot{cfg.T, r.final});
  std::cout << "events " << r.events << " flips " << r.flips << " final density " << r.final.density() << '\n';
  return 0;
}

struct DualOptions {
  std::string model_config;
  int torus = 6;
  double epsilon = 0;
  double time = 1;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  double v = 0.5;
};

int run_dual_check(const DualOptions& o) {
  ModelChoice mc = parse_model_config(read_file(o.model_config));
  if (o.epsilon > 0) mc.epsilon = o.epsilon;
  mc.backend = Backend::graphical;
  ModelSpec m = mc.build();
  Torus torus(mc.dimension, o.torus);
  check_torus(m, torus, Backend::graphical);
  DualityCheck r = duality_check(m, torus, o.time, o.trials, o.seed, o.v);
  json j;
  j["trials"] = r.trials;
  j["mismatches"] = r.mismatches;
  if (r.first_mismatch) {
    const auto& f = *r.first_mismatch;
    j["first_mismatch"] = {{"trial", f.trial}, {"seed", f.seed}, {"site", f.site}, {"forward", f.forward},
                           {"dual", f.dual}};
  } else {
    j["first_mismatch"] = nullptr;
  }
  j["max_particles"] = r.max_particles;
  std::cout << j.dump(2) << '\n';
  return r.mismatches == 0 ? 0 : 1;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

struct CoalesceOptions {
  std::string kernel = "nn";
  int dimension = 3;
  std::vector<std::string> patterns{"0|e1"};
  double cutoff = 1e4;
  std::size_t n = 100000;
  std::uint64_t seed = 1;
  bool extrapolate = false;
};

int run_coalesce(const CoalesceOptions& o) {
  Kernel k = kernel_from_spec(o.kernel, o.dimension);
  validate(k);
  std::cout << "pattern,value,stderr,n,cutoff" << (o.extrapolate ? ",extrapolated,bias" : "") << '\n';
  std::cout.precision(10);
  for (std::size_t i = 0; i < o.patterns.size(); ++i) {
    auto q = parse_pattern(o.patterns[i], k.dimension());
    auto e = estimate(q, k, o.cutoff, o.n, stream_key(o.seed, i, StreamKind::walks), o.extrapolate);
    std::cout << csv_field(o.patterns[i]) << ',' << e.value << ',' << e.std_error << ',' << e.n << ',' << e.cutoff;
    if (o.extrapolate) std::cout << ',' << e.extrapolated << ',' << e.bias;
    std::cout << '\n';
  }
  return 0;
}

struct PhaseOptions {
  std::string family = "lv";
  double theta0 = 0, theta1 = 0;
  double b = 0, c = 1;
  int k = 0;
  std::vector<std::string> a{"0", "0", "0", "0"};
  std::string lambda = "0";
  double m0 = 0, p2 = 0, p3 = 0;
  double p01 = 0, p122 = 0, p123 = 0;
  bool auto_coalesce = false;
  std::string kernel = "nn";
  int dimension = 3;
  double cutoff = 1e4;
  std::size_t n = 100000;
  std::uint64_t seed = 1;
};

std::vector<double> interior_roots(const RealPoly& f) {
  try {
    return roots_in_unit_interval(f);
  } catch (const Error& e) {
    if (e.code() == Errc::IdenticallyZero) return {};
    throw;
  }
}

int run_phase(const PhaseOptions& o) {
  json j;
  j["family"] = o.family;
  std::optional<ReactionPolynomial> f;
  if (o.family == "lv") {
    double p2 = o.p2, p3 = o.p3;
    if (o.auto_coalesce) {
      Kernel k = kernel_from_spec(o.kernel, o.dimension);
      auto c = lv_coalescence(estimate_nu0(independent_pair_law(k), k, o.cutoff, o.n, o.seed));
      p2 = c.p2;
      p3 = c.p3;
      f = lv_f(o.theta0, o.theta1, p2, p3, c.se2, c.se3);
    } else if (p2 > 0 && p3 > 0) {
      f = lv_f(o.theta0, o.theta1, p2, p3);
    }
    double m0 = o.m0 > 0 ? o.m0 : (p2 + p3 > 0 ? p2 / (p2 + p3) : 0);
    if (m0 <= 0) throw Error(Errc::InvalidArgument, "lv needs --m0, --p2/--p3 or --auto-coalesce");
    j["params"] = {{"theta0", o.theta0}, {"theta1", o.theta1}, {"m0", m0}};
    j["label"] = label_name(lv_phase(o.theta0, o.theta1, m0));
    if (auto u = lv_ustar(o.theta0, o.theta1, p2 > 0 ? p2 : m0, p3 > 0 ? p3 : 1 - m0)) j["ustar"] = *u;
  } else if (o.family == "game") {
    Kernel nbhd = kernel_from_spec(o.kernel, o.dimension);
    const int k = o.k > 0 ? o.k : static_cast<int>(nbhd.size());
    j["params"] = {{"b", o.b}, {"c", o.c}, {"k", k}};
    j["label"] = label_name(coop_rule(o.b, o.c, k));
    double p01 = o.p01, p122 = o.p122, p123 = o.p123;
    if (o.auto_coalesce) {
      p01 = estimate(parse_pattern("0|e1", o.dimension), nbhd, o.cutoff, o.n, o.seed).value;
      auto q = parse_pattern("e1|e2,e2+e3", o.dimension);
      auto shared = estimate_shared(q.points, {{{0}, {1, 2}}, {{0}, {1}, {2}}}, nbhd, o.cutoff, o.n, o.seed + 1);
      p122 = shared[0].value;
      p123 = shared[1].value;
    }
    if (p01 > 0) f = coop_f(o.b - o.c, -o.c, o.b, 0, k, p01, p122, p123);
  } else if (o.family == "nlv") {
    std::array<Rational, 4> a;
    for (int i = 0; i < 4; ++i) a[i] = parse_rational(o.a.at(i));
    auto nb = nlv_b(a);
    Rational lambda = parse_rational(o.lambda);
    j["params"] = {{"a", o.a}, {"lambda", o.lambda}, {"b1", to_string(nb.b1)}, {"b2", to_string(nb.b2)}};
    j["label"] = label_name(nlv_phase(nb.b1, nb.b2));
    f = exact_reaction(nlv_flambda(a, lambda), "nlv");
  } else {
    throw Error(Errc::InvalidArgument, "family must be lv, game or nlv");
  }
  if (f) {
    j["f_coefficients"] = f->f.coeffs();
    if (!f->stderrs.empty()) j["f_stderr"] = f->stderrs;
    j["interior_roots"] = interior_roots(f->f);
  } else {
    j["f_coefficients"] = nullptr;
    j["interior_roots"] = nullptr;
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

struct PdeOptions {
  std::string f;
  double sigma2 = 1;
  double dx = 0.1;
  double T = 10;
  std::string mode = "line";
  double u0 = 0.5;
  std::string init = "step";
  double half_width = 20;
  double frame_every = 1;
  int d = 3;
  double rho = 1;
};

RealPoly parse_f(const std::string& text) {
  if (!text.empty() && text[0] == '@') {
    auto j = json::parse(read_file(text.substr(1)));
    if (!j.contains("f_coefficients") || j["f_coefficients"].is_null())
      throw Error(Errc::ParseError, "phase output has no f_coefficients");
    return RealPoly(j["f_coefficients"].get<std::vector<double>>());
  }
  std::vector<double> c;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) c.push_back(std::stod(item));
  if (c.empty()) throw Error(Errc::ParseError, "--f needs coefficients c0,c1,...");
  return RealPoly(c);
}

// "step" (1 on x < 0), "bump:height:width" or "const:value"
std::function<double(double)> parse_init(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() == 1 && parts[0] == "step") return [](double x) { return x < 0 ? 1.0 : 0.0; };
  if (parts.size() == 3 && parts[0] == "bump") {
    double h = std::stod(parts[1]), w = std::stod(parts[2]);
    return [h, w](double x) { return std::abs(x) < w ? h : 0.0; };
  }
  if (parts.size() == 2 && parts[0] == "const") {
    double v = std::stod(parts[1]);
    return [v](double) { return v; };
  }
  throw Error(Errc::ParseError, "--init must be step, bump:height:width or const:value");
}

std::vector<double> frame_times(double T, double every) {
  std::vector<double> t;
  for (double s = 0; s <= T + 1e-12; s += every) t.push_back(s);
  return t;
}

int run_pde(const PdeOptions& o) {
  RealPoly f = parse_f(o.f);
  std::cout.precision(10);
  std::cout << "t,x,u\n";
  if (o.mode == "ode") {
    double u = o.u0, t = 0;
    std::cout << 0.0 << ",0," << u << '\n';
    while (t < o.T - 1e-12) {
      double step = std::min(o.frame_every, o.T - t);
      u = solve_ode(f, u, step);
      t += step;
      std::cout << t << ",0," << u << '\n';
    }
    return 0;
  }
  auto times = frame_times(o.T, o.frame_every);
  if (o.mode == "line") {
    Grid1D grid = Grid1D::make(-o.half_width, o.half_width, o.dx, o.sigma2);
    auto r = solve_rd_1d(f, parse_init(o.init), o.T, grid, times);
    for (const auto& fr : r.frames)
      for (std::size_t i = 0; i < fr.u.size(); ++i) std::cout << fr.t << ',' << grid.x(i) << ',' << fr.u[i] << '\n';
    return 0;
  }
  if (o.mode == "radial") {
    RadialGrid grid = RadialGrid::make(o.half_width, o.dx, o.sigma2, o.d);
    auto init = parse_init(o.init);
    std::vector<double> v(grid.points());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = init(grid.r(i));
    auto r = solve_rd_radial(f, v, o.T, grid, times);
    for (const auto& fr : r.frames)
      for (std::size_t i = 0; i < fr.u.size(); ++i) std::cout << fr.t << ',' << grid.r(i) << ',' << fr.u[i] << '\n';
    return 0;
  }
  WaveOptions w;
  w.sigma2 = o.sigma2;
  w.dx = o.dx;
  w.T = o.T;
  w.rho = o.rho;
  w.sample_every = o.frame_every;
  WaveSpeed ws = wave_speed(f, w);
  for (std::size_t i = 0; i < ws.times.size(); ++i) std::cout << ws.times[i] << ',' << ws.positions[i] << ',' << 0.5 * o.rho << '\n';
  std::cerr << "speed " << ws.speed << " half_width " << ws.half_width << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Voter model perturbation simulator"};
  app.require_subcommand(1);

  RunOptions hydro, fate, simulate;
  auto* h = app.add_subcommand("hydro", "hydrodynamic limit experiment");
  add_run_options(h, hydro);
  auto* fa = app.add_subcommand("fate", "coexistence and takeover classification");
  add_run_options(fa, fate);
  auto* si = app.add_subcommand("simulate", "single forward run with snapshots");
  add_run_options(si, simulate);

  DualOptions dual;
  auto* dc = app.add_subcommand("dual-check", "compare forward runs with the dual computation");
  dc->add_option("--model-config", dual.model_config)->required()->check(CLI::ExistingFile);
  dc->add_option("--torus", dual.torus, "torus side");
  dc->add_option("--epsilon", dual.epsilon, "override the model epsilon");
  dc->add_option("--time", dual.time);
  dc->add_option("--trials", dual.trials);
  dc->add_option("--seed", dual.seed);
  dc->add_option("--v", dual.v, "initial density");

  CoalesceOptions co;
  auto* cs = app.add_subcommand("coalesce", "coalescing random walk probabilities");
  cs->add_option("--kernel", co.kernel, "nn, box:L or a kernel file");
  cs->add_option("--dimension", co.dimension);
  cs->add_option("--pattern", co.patterns, "e.g. \"0|e1,e2\"; repeatable");
  cs->add_option("--cutoff", co.cutoff);
  cs->add_option("--n", co.n);
  cs->add_option("--seed", co.seed);
  cs->add_flag("--extrapolate", co.extrapolate, "also report the two-cutoff extrapolation");

  PhaseOptions ph;
  auto* pa = app.add_subcommand("phase", "phase label and reaction polynomial");
  pa->add_option("--family", ph.family)->check(CLI::IsMember({"lv", "game", "nlv"}));
  pa->add_option("--theta0", ph.theta0);
  pa->add_option("--theta1", ph.theta1);
  pa->add_option("--b", ph.b);
  pa->add_option("--c", ph.c);
  pa->add_option("--k", ph.k, "neighbourhood size (default from the kernel)");
  pa->add_option("--a", ph.a, "a1 a2 a3 a4 as rationals")->expected(4);
  pa->add_option("--lambda", ph.lambda);
  pa->add_option("--m0", ph.m0);
  pa->add_option("--p2", ph.p2);
  pa->add_option("--p3", ph.p3);
  pa->add_option("--p01", ph.p01);
  pa->add_option("--p122", ph.p122);
  pa->add_option("--p123", ph.p123);
  pa->add_flag("--auto-coalesce", ph.auto_coalesce, "estimate coalescence probabilities");
  pa->add_option("--kernel", ph.kernel);
  pa->add_option("--dimension", ph.dimension);
  pa->add_option("--cutoff", ph.cutoff);
  pa->add_option("--n", ph.n);
  pa->add_option("--seed", ph.seed);

  PdeOptions pd;
  auto* pe = app.add_subcommand("pde", "reaction-diffusion and ODE solves");
  pe->add_option("--f", pd.f, "c0,c1,... or @phase.json")->required();
  pe->add_option("--sigma2", pd.sigma2);
  pe->add_option("--dx", pd.dx);
  pe->add_option("--T", pd.T);
  pe->add_option("--mode", pd.mode)->check(CLI::IsMember({"ode", "line", "radial", "speed"}));
  pe->add_option("--u0", pd.u0, "ode start value");
  pe->add_option("--init", pd.init, "step, bump:h:w or const:v");
  pe->add_option("--half-width", pd.half_width, "domain half-width or radius");
  pe->add_option("--frame-every", pd.frame_every);
  pe->add_option("--d", pd.d, "dimension for radial mode");
  pe->add_option("--rho", pd.rho, "left state for speed mode");

  CLI11_PARSE(app, argc, argv);
  try {
    if (h->parsed()) return run_hydro(hydro);
    if (fa->parsed()) return run_fate(fate);
    if (si->parsed()) return run_simulate(simulate);
    if (dc->parsed()) return run_dual_check(dual);
    if (cs->parsed()) return run_coalesce(co);
    if (pa->parsed()) return run_phase(ph);
    if (pe->parsed()) return run_pde(pd);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
