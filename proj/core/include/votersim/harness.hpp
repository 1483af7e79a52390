#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "votersim/engine.hpp"
#include "votersim/model.hpp"
#include "votersim/reaction.hpp"

namespace votersim {

// Family name plus parameters; builds a ModelSpec for any epsilon.
struct ModelChoice {
  std::string family = "lv";  // voter | lv | game | nlv
  std::map<std::string, double> params;
  std::string kernel = "nn";  // nn, box:L, or a kernel file
  int dimension = 3;
  double epsilon = 0.25;
  int torus_side = 0;
  Backend backend = Backend::graphical;

  double param(const std::string& key, double fallback) const;
  double param(const std::string& key) const;
  ModelSpec build(double eps) const;
  ModelSpec build() const { return build(epsilon); }
};

// Number of worker threads: explicit value, else VOTERSIM_JOBS, else the
// hardware concurrency.
int resolve_jobs(int requested);
// Runs body(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

// Side of the coarse-graining block in sites: ceil(eps^(r-1)) rounded up
// to a divisor of the torus side.
int block_side(double epsilon, double r, int torus_side);

// Limiting reaction polynomial for the chosen model: closed form for the
// voter model and LV (with p2, p3 from coalescing walks), the generic
// partition construction otherwise.
ReactionPolynomial reference_reaction(const ModelChoice& model, double cutoff, std::size_t samples,
                                      std::uint64_t seed);

struct HydroConfig {
  ModelChoice model;
  double v = 0.5;
  // optional profile along the first coordinate, physical x in [0, side)
  std::function<double(double)> profile;
  std::string profile_text;
  std::vector<double> epsilons;
  std::vector<double> times;
  double physical_side = 1.0;
  double block_exponent = 0;  // 0 means 1/(16d)
  std::size_t replicates = 20;
  std::uint64_t seed = 1;
  int jobs = 0;
  double cutoff = 1e4;
  std::size_t coalesce_samples = 20000;
  std::optional<RealPoly> reference;  // overrides reference_reaction
  double pde_dx = 0.01;
};

struct HydroPoint {
  double epsilon = 0, t = 0;
  int torus_side = 0, block = 0;
  std::size_t replicates = 0;
  std::vector<double> empirical;  // per block, averaged over replicates
  std::vector<double> reference;  // per block
  double discrepancy = 0;         // mean over replicates of the block-average |empirical - reference|
  double discrepancy_se = 0;
  double sup = 0;  // max over replicates and blocks
  double l2 = 0;   // root mean square over replicates and blocks
  double density = 0, density_se = 0;  // global density over replicates
  double reference_density = 0;        // block average of the reference
};

struct HydroReport {
  HydroConfig config;
  ReactionPolynomial f;
  double sigma2 = 0;
  std::vector<HydroPoint> points;  // sorted by (epsilon descending, t)

  // mean discrepancy over the time list at one epsilon, with its standard error
  std::pair<double, double> discrepancy(double epsilon) const;
};

HydroReport hydro_experiment(const HydroConfig& cfg);

enum class Fate { coexist, zeros_take_over, ones_take_over, inconclusive };
std::string fate_name(Fate f);

struct FateConfig {
  ModelChoice model;
  double v = 0.5;
  double T = 10;
  double sample_dt = 0.25;
  double window = 0.25;  // final fraction of [0, T]
  double theta_lo = 0.2, theta_hi = 0.8;
  double quorum = 0.8;
  std::size_t replicates = 20;
  std::uint64_t seed = 1;
  int jobs = 0;
};

struct FateReplicate {
  std::uint64_t seed = 0;
  std::vector<double> times, density;
  Fate fate = Fate::inconclusive;
  std::optional<double> absorbed_at;
  double terminal = 0;        // mean density over the final window
};

struct FateReport {
  FateConfig config;
  std::vector<FateReplicate> replicates;
  Fate classification = Fate::inconclusive;
  std::map<Fate, std::size_t> counts;
};

Fate classify_replicate(const std::vector<double>& times, const std::vector<double>& density, double window_start,
                        double theta_lo, double theta_hi, std::optional<double>* absorbed_at = nullptr);
Fate classify_overall(const std::vector<Fate>& fates, double quorum);
FateReport fate_experiment(const FateConfig& cfg);

struct SimulateConfig {
  ModelChoice model;
  double v = 0.5;
  std::function<double(double)> profile;  // physical x along the first coordinate
  std::string profile_text;
  double T = 1;
  std::vector<double> snapshots;  // empty means only T
  int block = 1;
  std::uint64_t seed = 1;
};

// Torus side is model.torus_side, else round(1/epsilon).
int torus_side_of(const ModelChoice& model);
SimResult run_simulation(const SimulateConfig& cfg);
std::string simulation_json(const SimulateConfig& cfg, const SimResult& r);

// Long-format CSV and a JSON summary; identical reports give identical bytes.
std::string hydro_csv(const HydroReport& r);
std::string hydro_json(const HydroReport& r);
std::string fate_series_csv(const FateReport& r);
std::string fate_json(const FateReport& r, const std::string& series_path);

constexpr int kReportSchemaVersion = 1;

// Config files: [model], [experiment] and [grid] sections.
ModelChoice parse_model_config(const std::string& toml_text);
HydroConfig parse_hydro_config(const std::string& toml_text);
FateConfig parse_fate_config(const std::string& toml_text);
SimulateConfig parse_simulate_config(const std::string& toml_text);
// "cos:mean:amplitude" or "step:left:right" on a box of the given side
std::function<double(double)> parse_profile(const std::string& text, double side);

}  // namespace votersim
