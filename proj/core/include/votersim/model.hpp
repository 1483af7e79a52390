#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "votersim/kernel.hpp"
#include "votersim/lattice.hpp"

namespace votersim {

enum class Backend { graphical, direct };

// Offspring law plus non-negative rate tables. Bit j of a table index is the
// value at Y^{j+1}.
struct PerturbationSpec {
  OffspringLaw offspring;
  std::vector<double> g0, g1;
  double cstar = 1.0;
  // ε1^{-2} used to shift the tables non-negative; 0 means ε1 = ∞
  double eps1_inv2 = 0.0;
  // g̃_i(η) = g_i(η) - eps1_inv2 · Σ_j shift_weights[j]·1{η_j = i}, so that
  // E_Y g̃_i = h_i
  std::vector<double> shift_weights;

  int n0() const { return offspring.n0(); }
  bool staydead() const { return g1.at(0) == 0.0; }
  const std::vector<double>& g(int i) const { return i ? g1 : g0; }
  std::vector<double> g_tilde(int i) const;
};

double default_cstar(const std::vector<double>& g0, const std::vector<double>& g1);
void check_perturbation(const PerturbationSpec& p);

// Rate closure over a local pattern: local[j] = ξ(x + neighbourhood[j]).
using LocalRate = std::function<double(std::span<const std::uint8_t>)>;

// Tables of the limiting ĥ_i over fixed offsets (points[0] is the origin).
struct LimitTables {
  std::vector<Offset> points;
  std::vector<double> h0, h1;
};

struct ModelSpec {
  std::string family;
  std::map<std::string, double> params;
  Kernel kernel;
  double epsilon = 1.0;
  // graphical backend voter rate, ε^{-2} - ε1^{-2}
  double voter_rate = 1.0;
  std::optional<PerturbationSpec> perturbation;
  Backend backend = Backend::graphical;

  // direct backend: flip rate = direct_voter_rate·c^v + (1-ξ(x))h1 + ξ(x)h0
  double direct_voter_rate = 1.0;
  std::vector<Offset> neighbourhood;
  LocalRate h0, h1;
  // when positive, every direct flip rate is at most this and the direct
  // backend thins uniform proposals at this rate per site
  double direct_rate_bound = 0;

  std::optional<LimitTables> limit;

  bool has_direct() const { return static_cast<bool>(h0); }
  // largest |offset|_inf any rate or event reads, for the given backend
  int interaction_range(Backend b) const;
};

ModelSpec build_voter(const Kernel& k, double epsilon);
ModelSpec build_lv(double theta0, double theta1, double epsilon, const Kernel& k);

struct GameParams {
  double alpha = 0, beta = 0, gamma = 0, delta = 0;
  double w = 0;
};

// Offsets {0} ∪ N ∪ (N+N) and the index maps the game rates need.
struct GameGeometry {
  std::vector<Offset> points;
  std::vector<int> nbr;                    // index of each y ∈ N
  std::vector<std::vector<int>> nbr_of_nbr;  // for each y ∈ N, indices of y+z, z ∈ N
  int k = 0;
  explicit GameGeometry(const Kernel& neighbourhood);
};

// Exact r_0, r_1 from a local pattern over GameGeometry::points.
std::array<double, 2> game_r(const GameParams& g, const GameGeometry& geo, std::span<const std::uint8_t> local);
// Limiting ĥ_0, ĥ_1 = θ_i - f_i φ from a local pattern.
std::array<double, 2> game_h(const GameParams& g, const GameGeometry& geo, std::span<const std::uint8_t> local);
double game_R(const GameParams& g, int k);

// Tables over 2^N0 patterns are built only when N0 is at most this.
constexpr int kMaxTableBits = 20;

ModelSpec build_evolution_game(const GameParams& g, const Kernel& neighbourhood);

struct NlvRates {
  double a0 = 0;
  std::array<double, 4> a{};  // a(1)..a(4)
};

ModelSpec build_nlv(const NlvRates& a, int L, double lambda, double epsilon, int d = 3);

// Non-negative g-form from limiting tables over offsets y_1 = 0, y_2, ...
PerturbationSpec gform_from_h(const std::vector<double>& h0, const std::vector<double>& h1,
                              const std::vector<Offset>& points, const Kernel& k);

// f_i(x, ξ) = Σ p(y) 1{ξ(x+y) = i}
double local_density(const ModelSpec& m, const Configuration& c, Site x, int i);
double flip_rate(const ModelSpec& m, const Configuration& c, Site x, Backend b);

// h̃_i(x, ξ) = E_Y g_i(ξ(x+Y^1..N0)) for the graphical backend
double expected_g(const PerturbationSpec& p, const Configuration& c, Site x, int i);

// Exhaustive check that direct rates are non-negative when the neighbourhood
// has at most kMaxTableBits sites. Throws NegativeRate.
void check_direct_rates(const ModelSpec& m);

}  // namespace votersim
