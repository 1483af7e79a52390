#include "votersim/dual.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

#include "votersim/error.hpp"

namespace votersim {

std::size_t DualState::particle_count(double s) const {
  std::size_t n = 0;
  for (const auto& p : paths_) n += p.birth <= s;
  return n;
}

ParticleIndex DualState::representative(ParticleIndex k, double s) const {
  while (paths_[k].merged_at <= s) k = paths_[k].merged_into;
  return k;
}

Site DualState::position(ParticleIndex k, double s) const {
  k = representative(k, s);
  const auto& steps = paths_[k].steps;
  auto it = std::upper_bound(steps.begin(), steps.end(), s,
                             [](double v, const std::pair<double, Site>& st) { return v < st.first; });
  if (it == steps.begin()) throw Error(Errc::InvalidArgument, "particle not born at this dual time");
  return std::prev(it)->second;
}

std::vector<ParticleIndex> DualState::live(double s) const {
  std::vector<ParticleIndex> out;
  for (ParticleIndex k = 0; k < paths_.size(); ++k)
    if (paths_[k].birth <= s && paths_[k].merged_at > s) out.push_back(k);
  return out;
}

namespace {

struct Pending {
  double t;
  Site x;
  int kind;  // 1 reaction, 0 voter: a reaction precedes a voter event at the same time in reverse
  std::size_t idx;
  std::uint32_t gen;
  bool operator<(const Pending& o) const { return std::tie(t, x, kind) < std::tie(o.t, o.x, o.kind); }
};

}  // namespace

DualState run_dual(const EventLog& log, const ModelSpec& m, std::span<const Site> z, double T) {
  if (T > log.horizon) throw Error(Errc::HorizonExceeded, "dual horizon beyond the log");
  if (!m.perturbation) throw Error(Errc::InvalidArgument, "model has no g-form");
  const Torus& torus = log.torus;
  const auto& points = m.perturbation->offspring.points();
  DualState d;
  d.torus_ = torus;
  d.T_ = T;
  d.n0_ = log.n0;
  d.starts_ = z.size();

  std::vector<ParticleIndex> occupant(torus.sites(), kNoParticle);
  std::vector<std::uint32_t> gen(torus.sites(), 0);
  std::priority_queue<Pending> heap;

  // latest event at x strictly before t (or at or before t when inclusive)
  auto schedule = [&](Site x, double t, bool inclusive) {
    auto before = [&](const auto& list) -> std::ptrdiff_t {
      auto it = inclusive ? std::upper_bound(list.begin(), list.end(), t,
                                             [](double v, const auto& e) { return v < e.t; })
                          : std::lower_bound(list.begin(), list.end(), t,
                                             [](const auto& e, double v) { return e.t < v; });
      return (it - list.begin()) - 1;
    };
    std::ptrdiff_t iv = before(log.voter[x]), ir = before(log.reaction[x]);
    double tv = iv >= 0 ? log.voter[x][iv].t : -1.0;
    double tr = ir >= 0 ? log.reaction[x][ir].t : -1.0;
    if (iv < 0 && ir < 0) return;
    if (tr >= tv && ir >= 0)
      heap.push({tr, x, 1, static_cast<std::size_t>(ir), gen[x]});
    else
      heap.push({tv, x, 0, static_cast<std::size_t>(iv), gen[x]});
  };
  auto merge = [&](double s, ParticleIndex keep, ParticleIndex gone) {
    d.paths_[gone].merged_at = s;
    d.paths_[gone].merged_into = keep;
    d.order_.push_back({false, d.merges_.size()});
    d.merges_.push_back({s, keep, gone});
  };

  for (std::size_t k = 0; k < z.size(); ++k) {
    if (z[k] >= torus.sites()) throw Error(Errc::InvalidArgument, "start site outside the torus");
    DualPath path;
    path.steps.push_back({0.0, z[k]});
    d.paths_.push_back(std::move(path));
    ParticleIndex idx = static_cast<ParticleIndex>(k);
    if (occupant[z[k]] != kNoParticle) {
      merge(0.0, occupant[z[k]], idx);
    } else {
      occupant[z[k]] = idx;
      schedule(z[k], T, true);
    }
  }

  while (!heap.empty()) {
    Pending e = heap.top();
    heap.pop();
    const Site x = e.x;
    if (e.gen != gen[x] || occupant[x] == kNoParticle) continue;
    const double s = T - e.t;
    const ParticleIndex c = occupant[x];
    if (e.kind == 0) {
      const Site y = torus.shift(x, m.kernel.offset(log.voter[x][e.idx].atom));
      occupant[x] = kNoParticle;
      ++gen[x];
      if (occupant[y] != kNoParticle) {
        ParticleIndex other = occupant[y];
        ParticleIndex keep = std::min(c, other), gone = std::max(c, other);
        if (keep == c) d.paths_[c].steps.push_back({s, y});
        merge(s, keep, gone);
        occupant[y] = keep;
      } else {
        d.paths_[c].steps.push_back({s, y});
        occupant[y] = c;
        ++gen[y];
        schedule(y, e.t, false);
      }
    } else {
      const ReactionEvent& r = log.reaction[x][e.idx];
      auto ys = log.offspring_of(r);
      const ParticleIndex first = static_cast<ParticleIndex>(d.paths_.size());
      d.order_.push_back({true, d.reactions_.size()});
      d.reactions_.push_back({s, c, first, x, r.u});
      for (int j = 0; j < log.n0; ++j) {
        const Site y = torus.shift(x, points[ys[j]]);
        const ParticleIndex k = static_cast<ParticleIndex>(d.paths_.size());
        DualPath path;
        path.birth = s;
        path.steps.push_back({s, y});
        d.paths_.push_back(std::move(path));
        if (occupant[y] != kNoParticle) {
          merge(s, occupant[y], k);
        } else {
          occupant[y] = k;
          ++gen[y];
          schedule(y, e.t, false);
        }
      }
      schedule(x, e.t, false);
    }
  }
  return d;
}

std::vector<std::uint8_t> compute(const DualState& dual, const PerturbationSpec& p, std::span<const std::uint8_t> leaf,
                                  double depth) {
  std::vector<std::uint8_t> value(dual.paths_.size(), kNoInput);
  for (ParticleIndex k : dual.live(depth)) {
    if (k >= leaf.size() || leaf[k] == kNoInput) throw Error(Errc::MissingInput, "no input for a live leaf class");
    value[k] = leaf[k] ? 1 : 0;
  }
  for (auto it = dual.order_.rbegin(); it != dual.order_.rend(); ++it) {
    if (it->reaction) {
      const DualReaction& r = dual.reactions_[it->idx];
      if (r.s > depth) continue;
      std::size_t pattern = 0;
      for (int j = 0; j < dual.n0_; ++j) pattern |= static_cast<std::size_t>(value[r.first_child + j]) << j;
      const int i = value[r.parent];
      if (r.u < p.g(1 - i)[pattern] / p.cstar) value[r.parent] = static_cast<std::uint8_t>(1 - i);
    } else {
      const DualMerge& mg = dual.merges_[it->idx];
      if (mg.s > depth) continue;
      value[mg.gone] = value[mg.keep];
    }
  }
  return {value.begin(), value.begin() + static_cast<std::ptrdiff_t>(dual.starts_)};
}

std::vector<std::uint8_t> compute(const DualState& dual, const PerturbationSpec& p, const Configuration& xi0) {
  if (!(xi0.torus() == dual.torus())) throw Error(Errc::InvalidArgument, "configuration lives on another torus");
  std::vector<std::uint8_t> leaf(dual.particle_count(), kNoInput);
  const double T = dual.horizon();
  for (ParticleIndex k : dual.live(T)) leaf[k] = xi0.get(dual.position(k, T));
  return compute(dual, p, leaf, T);
}

DualityCheck duality_check(const ModelSpec& m, const Torus& torus, double T, std::size_t trials, std::uint64_t seed,
                           double v) {
  if (!m.perturbation) throw Error(Errc::InvalidArgument, "duality needs a graphical model");
  DualityCheck out;
  out.trials = trials;
  for (std::size_t i = 0; i < trials; ++i) {
    const std::uint64_t s = stream_key(seed, i, StreamKind::trial);
    Configuration xi0 = Configuration::bernoulli(torus, v, stream_key(seed, i, StreamKind::initial));
    Stream pick(seed, i, StreamKind::replicate);
    const Site z = static_cast<Site>(pick.below(torus.sites()));
    Configuration fwd = simulate_forward(m, xi0, T, s, Backend::graphical).final;
    EventLog log = gen_log(m, torus, T, s);
    DualState d = run_dual(log, m, std::span<const Site>(&z, 1), T);
    out.max_particles = std::max(out.max_particles, d.particle_count());
    const int dual = compute(d, *m.perturbation, xi0)[0];
    const int forward = fwd.get(z);
    if (dual != forward) {
      if (!out.first_mismatch) out.first_mismatch = DualityMismatch{i, s, z, forward, dual};
      ++out.mismatches;
    }
  }
  return out;
}

BbmEstimate bbm_estimate_u(const PerturbationSpec& p, const PartitionLaw& nu0, double sigma2, const Profile& v,
                           double T, std::span<const double> x, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error(Errc::InvalidArgument, "need n >= 1");
  if (nu0.elements() != p.n0() + 1) throw Error(Errc::InvalidArgument, "partition law does not match N0");
  constexpr std::size_t kMaxParticles = 1u << 22;
  const std::size_t d = x.size();
  const int n0 = p.n0();
  struct Branch {
    std::uint32_t parent, first_new;
    const std::vector<std::uint8_t>* labels;
    double u;
  };
  BbmEstimate est;
  est.n = n;
  double sum = 0, sum2 = 0;
  std::vector<double> pos, last;
  std::vector<Branch> branches;
  std::vector<std::uint8_t> value;
  for (std::size_t r = 0; r < n; ++r) {
    Stream rng(seed, r, StreamKind::bbm);
    pos.assign(x.begin(), x.end());
    last.assign(1, 0.0);
    branches.clear();
    auto advance = [&](std::size_t q, double s) {
      double sd = std::sqrt(sigma2 * (s - last[q]));
      for (std::size_t c = 0; c < d; ++c) pos[q * d + c] += sd * rng.normal();
      last[q] = s;
    };
    double s = 0;
    if (p.cstar > 0) {
      for (;;) {
        s += rng.exponential(p.cstar * static_cast<double>(last.size()));
        if (s > T) break;
        std::size_t q = rng.below(last.size());
        advance(q, s);
        const auto& labels = nu0.sample(rng);
        const int blocks = *std::max_element(labels.begin(), labels.end()) + 1;
        Branch b{static_cast<std::uint32_t>(q), static_cast<std::uint32_t>(last.size()), &labels, rng.uniform()};
        for (int k = 1; k < blocks; ++k) {
          for (std::size_t c = 0; c < d; ++c) pos.push_back(pos[q * d + c]);
          last.push_back(s);
        }
        branches.push_back(b);
        if (last.size() > kMaxParticles) throw Error(Errc::InvalidArgument, "branching Brownian motion exploded");
      }
    }
    est.max_particles = std::max(est.max_particles, last.size());
    value.assign(last.size(), 0);
    for (std::size_t q = 0; q < last.size(); ++q) {
      advance(q, T);
      double pv = v(std::span<const double>(pos.data() + q * d, d));
      value[q] = rng.uniform() < pv;
    }
    for (auto it = branches.rbegin(); it != branches.rend(); ++it) {
      const auto& labels = *it->labels;
      std::size_t pattern = 0;
      for (int j = 0; j < n0; ++j) {
        std::uint8_t l = labels[j + 1];
        std::uint8_t vj = l == labels[0] ? value[it->parent] : value[it->first_new + l - 1];
        pattern |= static_cast<std::size_t>(vj) << j;
      }
      const int i = value[it->parent];
      if (it->u < p.g(1 - i)[pattern] / p.cstar) value[it->parent] = static_cast<std::uint8_t>(1 - i);
    }
    sum += value[0];
    sum2 += value[0];
  }
  const double nn = static_cast<double>(n);
  est.value = sum / nn;
  est.std_error = std::sqrt(std::max(0.0, sum2 / nn - est.value * est.value) / nn);
  return est;
}

}  // namespace votersim
