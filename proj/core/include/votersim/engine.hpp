#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "votersim/lattice.hpp"
#include "votersim/model.hpp"

namespace votersim {

struct VoterEvent {
  double t;
  std::uint32_t atom;  // index into the kernel support
};

struct ReactionEvent {
  double t;
  double u;
  std::uint32_t first;  // offspring point indices live at EventLog::offspring[first, first + N0)
};

// Poisson voter stream of one site: exponential gap, then the kernel mark.
class VoterStream {
 public:
  VoterStream() = default;
  VoterStream(std::uint64_t seed, Site s, double rate) : rng_(seed, s, StreamKind::voter), rate_(rate) {}

  double next_time() {
    t_ = rate_ > 0 ? t_ + rng_.exponential(rate_) : std::numeric_limits<double>::infinity();
    return t_;
  }
  std::uint32_t mark(const Kernel& k) { return static_cast<std::uint32_t>(k.sample_index(rng_)); }

 private:
  Stream rng_;
  double rate_ = 0;
  double t_ = 0;
};

// Poisson reaction stream of one site: exponential gap, offspring vector, uniform.
class ReactionStream {
 public:
  ReactionStream() = default;
  ReactionStream(std::uint64_t seed, Site s, double rate) : rng_(seed, s, StreamKind::reaction), rate_(rate) {}

  double next_time() {
    t_ = rate_ > 0 ? t_ + rng_.exponential(rate_) : std::numeric_limits<double>::infinity();
    return t_;
  }
  double mark(const OffspringLaw& q, std::span<OffspringLaw::PointIndex> y) {
    q.sample(rng_, y);
    return rng_.uniform();
  }

 private:
  Stream rng_;
  double rate_ = 0;
  double t_ = 0;
};

struct EventLog {
  Torus torus;
  double horizon = 0;
  std::uint64_t seed = 0;
  int n0 = 0;
  std::vector<std::vector<VoterEvent>> voter;
  std::vector<std::vector<ReactionEvent>> reaction;
  std::vector<OffspringLaw::PointIndex> offspring;

  std::size_t event_count() const;
  std::span<const OffspringLaw::PointIndex> offspring_of(const ReactionEvent& e) const {
    return {offspring.data() + e.first, static_cast<std::size_t>(n0)};
  }
};

EventLog gen_log(const ModelSpec& m, const Torus& torus, double T, std::uint64_t seed);

struct Snapshot {
  double t;
  Configuration config;
};

struct SimResult {
  Configuration final;
  std::vector<Snapshot> snapshots;
  std::uint64_t events = 0;
  std::uint64_t flips = 0;
};

// Times are in the model's rescaled units. Snapshots are taken at each
// requested time (sorted, <= T).
SimResult simulate_forward(const ModelSpec& m, const Configuration& xi0, double T, std::uint64_t seed,
                           Backend backend, std::span<const double> snapshot_times = {});

// Forward run driven by an eager log; must agree with simulate_forward on the
// graphical backend for the same seed.
Configuration replay(const ModelSpec& m, const Configuration& xi0, const EventLog& log, double T);

void check_torus(const ModelSpec& m, const Torus& torus, Backend backend);

// block averages, blocks ordered like sites of the block torus of side M/a
std::vector<double> coarse_density(const Configuration& c, int a);

}  // namespace votersim
