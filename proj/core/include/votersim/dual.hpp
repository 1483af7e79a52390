#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "votersim/coalesce.hpp"
#include "votersim/engine.hpp"
#include "votersim/lattice.hpp"
#include "votersim/model.hpp"

namespace votersim {

using ParticleIndex = std::uint32_t;
constexpr ParticleIndex kNoParticle = std::numeric_limits<ParticleIndex>::max();

struct DualReaction {
  double s;  // dual time T - t
  ParticleIndex parent;
  ParticleIndex first_child;  // children are first_child .. first_child + N0 - 1
  Site site;
  double u;
};

struct DualMerge {
  double s;
  ParticleIndex keep;  // representative of the surviving class
  ParticleIndex gone;
};

// One particle: birth time, site at birth and every later move until it
// joins another class.
struct DualPath {
  double birth = 0;
  std::vector<std::pair<double, Site>> steps;
  double merged_at = std::numeric_limits<double>::infinity();
  ParticleIndex merged_into = kNoParticle;
};

class DualState {
 public:
  const Torus& torus() const { return torus_; }
  double horizon() const { return T_; }
  int n0() const { return n0_; }
  std::size_t starts() const { return starts_; }
  std::size_t particle_count() const { return paths_.size(); }
  // K(s): indices created by dual time s
  std::size_t particle_count(double s) const;
  const std::vector<DualPath>& paths() const { return paths_; }
  const std::vector<DualReaction>& reactions() const { return reactions_; }
  // merges and reactions in the order they happened in dual time
  const std::vector<DualMerge>& merges() const { return merges_; }

  // representative of k's class at dual time s
  ParticleIndex representative(ParticleIndex k, double s) const;
  // site of particle k at dual time s (its class site after it merges)
  Site position(ParticleIndex k, double s) const;
  // J(s): class representatives alive at dual time s, ascending
  std::vector<ParticleIndex> live(double s) const;

 private:
  friend DualState run_dual(const EventLog& log, const ModelSpec& m, std::span<const Site> z, double T);
  friend std::vector<std::uint8_t> compute(const DualState&, const PerturbationSpec&, std::span<const std::uint8_t>,
                                           double);

  struct Record {
    bool reaction;
    std::size_t idx;
  };

  Torus torus_{1, 1};
  double T_ = 0;
  int n0_ = 0;
  std::size_t starts_ = 0;
  std::vector<DualPath> paths_;
  std::vector<DualReaction> reactions_;
  std::vector<DualMerge> merges_;
  std::vector<Record> order_;
  std::vector<OffspringLaw::PointIndex> offspring_;
};

// Runs the coalescing branching walk backward from forward time T through
// the events of the log.
DualState run_dual(const EventLog& log, const ModelSpec& m, std::span<const Site> z, double T);

constexpr std::uint8_t kNoInput = 0xFF;

// Outputs at the start indices. leaf[k] is the input value of particle k
// at dual depth `depth`; only the classes live at that depth are read.
std::vector<std::uint8_t> compute(const DualState& dual, const PerturbationSpec& p, std::span<const std::uint8_t> leaf,
                                  double depth);
// Inputs ξ0(X^k_T) from an initial configuration.
std::vector<std::uint8_t> compute(const DualState& dual, const PerturbationSpec& p, const Configuration& xi0);

struct DualityMismatch {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  Site site = 0;
  int forward = 0, dual = 0;
};

struct DualityCheck {
  std::size_t trials = 0;
  std::size_t mismatches = 0;
  std::optional<DualityMismatch> first_mismatch;
  std::size_t max_particles = 0;
};

// Per trial: a Bernoulli(v) start, a forward graphical run and the dual from
// one random site, compared at time T.
DualityCheck duality_check(const ModelSpec& m, const Torus& torus, double T, std::size_t trials, std::uint64_t seed,
                           double v = 0.5);

struct BbmEstimate {
  double value = 0;
  double std_error = 0;
  std::size_t n = 0;
  std::size_t max_particles = 0;
};

using Profile = std::function<double(std::span<const double>)>;

// Branching Brownian motion computation process: branch rate c* per
// particle, partitions drawn from the law, leaf inputs Bernoulli(v).
BbmEstimate bbm_estimate_u(const PerturbationSpec& p, const PartitionLaw& nu0, double sigma2, const Profile& v,
                           double T, std::span<const double> x, std::size_t n, std::uint64_t seed);

}  // namespace votersim
