#include "votersim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "votersim/error.hpp"

namespace votersim {

namespace {

using HeapEntry = std::pair<double, Site>;

// Exact (time, site) order over [0, T]: entries are bucketed into time
// slices and each slice is drained through a small heap.
class SlicedQueue {
 public:
  SlicedQueue(std::vector<HeapEntry> init, double T, double total_rate) : T_(T) {
    if (!(T > 0)) {
      done_ = true;
      return;
    }
    double expected = total_rate * T / 64.0;
    slices_ = static_cast<std::size_t>(std::clamp(expected, 1.0, 64.0 * static_cast<double>(init.size() + 1)));
    width_ = T / static_cast<double>(slices_);
    buckets_.resize(slices_ + 1);
    for (const auto& e : init) place(e);
    load();
  }

  // next entry with time <= T
  bool pop(HeapEntry& e) {
    if (done_) return false;
    while (heap_.empty()) {
      if (++cur_ > slices_) {
        done_ = true;
        return false;
      }
      load();
    }
    std::pop_heap(heap_.begin(), heap_.end(), std::greater<>{});
    e = heap_.back();
    heap_.pop_back();
    return true;
  }

  void push(HeapEntry e) {
    if (!(e.first <= T_)) return;
    if (e.first < end_) {
      heap_.push_back(e);
      std::push_heap(heap_.begin(), heap_.end(), std::greater<>{});
    } else {
      place(e);
    }
  }

 private:
  void place(const HeapEntry& e) {
    if (!(e.first <= T_)) return;
    auto b = std::min(slices_, static_cast<std::size_t>(e.first / width_));
    buckets_[std::max(b, cur_)].push_back(e);
  }
  void load() {
    heap_.swap(buckets_[cur_]);
    buckets_[cur_].clear();
    std::make_heap(heap_.begin(), heap_.end(), std::greater<>{});
    end_ = cur_ == slices_ ? std::numeric_limits<double>::infinity() : static_cast<double>(cur_ + 1) * width_;
  }

  double T_;
  double width_ = 1;
  double end_ = 0;
  std::size_t slices_ = 0, cur_ = 0;
  bool done_ = false;
  std::vector<std::vector<HeapEntry>> buckets_;
  std::vector<HeapEntry> heap_;
};

std::vector<Offset> kernel_offsets(const Kernel& k) {
  std::vector<Offset> out;
  for (const auto& a : k.atoms()) out.push_back(a.offset);
  return out;
}

class SnapshotTaker {
 public:
  SnapshotTaker(std::span<const double> times, double T, std::vector<Snapshot>& out) : out_(out) {
    for (double s : times) {
      if (s < 0 || s > T) throw Error(Errc::InvalidArgument, "snapshot time outside [0, T]");
      times_.push_back(s);
    }
    std::sort(times_.begin(), times_.end());
  }

  // record every pending snapshot strictly before time t
  void before(double t, const std::vector<std::uint8_t>& st, const Torus& torus) {
    while (next_ < times_.size() && times_[next_] < t) {
      out_.push_back({times_[next_], Configuration::from_bytes(torus, st)});
      ++next_;
    }
  }

 private:
  std::vector<double> times_;
  std::size_t next_ = 0;
  std::vector<Snapshot>& out_;
};

SimResult run_graphical(const ModelSpec& m, const Configuration& xi0, double T, std::uint64_t seed,
                        std::span<const double> snaps) {
  if (!m.perturbation) throw Error(Errc::InvalidArgument, "model has no g-form for the graphical backend");
  const PerturbationSpec& p = *m.perturbation;
  const Torus& torus = xi0.torus();
  const std::size_t N = torus.sites();
  const std::size_t K = m.kernel.size();
  const std::size_t P = p.offspring.points().size();
  const int n0 = p.n0();
  const auto nbr_k = neighbour_table(torus, kernel_offsets(m.kernel));
  const auto nbr_p = neighbour_table(torus, p.offspring.points());
  const double cstar = p.cstar;

  SimResult res;
  SnapshotTaker snap(snaps, T, res.snapshots);
  std::vector<std::uint8_t> st = xi0.to_bytes();
  std::vector<VoterStream> vs(N);
  std::vector<ReactionStream> rs(N);
  std::vector<double> nv(N), nr(N);
  std::vector<HeapEntry> init;
  init.reserve(N);
  for (Site s = 0; s < N; ++s) {
    vs[s] = VoterStream(seed, s, m.voter_rate);
    rs[s] = ReactionStream(seed, s, cstar);
    nv[s] = vs[s].next_time();
    nr[s] = rs[s].next_time();
    init.emplace_back(std::min(nv[s], nr[s]), s);
  }
  SlicedQueue queue(std::move(init), T, static_cast<double>(N) * (m.voter_rate + cstar));
  std::vector<OffspringLaw::PointIndex> y(n0);

  HeapEntry top;
  while (queue.pop(top)) {
    auto [t, s] = top;
    snap.before(t, st, torus);
    ++res.events;
    if (nv[s] <= nr[s]) {
      std::uint32_t a = vs[s].mark(m.kernel);
      std::uint8_t v = st[nbr_k[s * K + a]];
      res.flips += v != st[s];
      st[s] = v;
      nv[s] = vs[s].next_time();
    } else {
      double u = rs[s].mark(p.offspring, y);
      std::size_t pattern = 0;
      for (int j = 0; j < n0; ++j) pattern |= static_cast<std::size_t>(st[nbr_p[s * P + y[j]]]) << j;
      int i = st[s];
      if (u < p.g(1 - i)[pattern] / cstar) {
        st[s] = static_cast<std::uint8_t>(1 - i);
        ++res.flips;
      }
      nr[s] = rs[s].next_time();
    }
    queue.push({std::min(nv[s], nr[s]), s});
  }
  snap.before(std::numeric_limits<double>::infinity(), st, torus);
  res.final = Configuration::from_bytes(torus, st);
  return res;
}

// Site rates with per-block partial sums. Updates adjust the sums by the
// difference; resum() recomputes them exactly.
class RateTable {
 public:
  static constexpr std::size_t kBlock = 64;
  explicit RateTable(std::size_t n) : rate_(n, 0.0), block_((n + kBlock - 1) / kBlock, 0.0) {}

  void set(std::size_t i, double v) {
    double delta = v - rate_[i];
    rate_[i] = v;
    block_[i / kBlock] += delta;
    total_ += delta;
  }
  double get(std::size_t i) const { return rate_[i]; }
  double total() const { return total_; }
  void resum() {
    total_ = 0;
    for (std::size_t b = 0; b < block_.size(); ++b) {
      double s = 0;
      const std::size_t end = std::min(rate_.size(), (b + 1) * kBlock);
      for (std::size_t i = b * kBlock; i < end; ++i) s += rate_[i];
      block_[b] = s;
      total_ += s;
    }
  }
  // site i with the partial sum before i <= u < partial sum through i
  std::size_t find(double u) const {
    std::size_t b = 0;
    while (b + 1 < block_.size() && u >= block_[b]) u -= block_[b++];
    const std::size_t end = std::min(rate_.size(), (b + 1) * kBlock);
    std::size_t last = rate_.size();
    for (std::size_t i = b * kBlock; i < end; ++i) {
      if (rate_[i] <= 0) continue;
      if (u < rate_[i]) return i;
      u -= rate_[i];
      last = i;
    }
    return last;
  }

 private:
  std::vector<double> rate_, block_;
  double total_ = 0;
};

SimResult run_direct(const ModelSpec& m, const Configuration& xi0, double T, std::uint64_t seed,
                     std::span<const double> snaps) {
  if (!m.has_direct()) throw Error(Errc::InvalidArgument, "model has no direct rates");
  const Torus& torus = xi0.torus();
  const std::size_t N = torus.sites();
  const std::size_t D = m.neighbourhood.size();
  const auto nbr = neighbour_table(torus, m.neighbourhood);
  std::vector<Offset> negated = m.neighbourhood;
  for (auto& y : negated)
    for (int& c : y) c = -c;
  const auto dependents = neighbour_table(torus, negated);
  std::vector<double> w(D, 0.0);
  for (std::size_t a = 0; a < m.kernel.size(); ++a) {
    auto it = std::find(m.neighbourhood.begin(), m.neighbourhood.end(), m.kernel.offset(a));
    if (it == m.neighbourhood.end()) throw Error(Errc::InvalidArgument, "neighbourhood must contain the kernel");
    w[static_cast<std::size_t>(it - m.neighbourhood.begin())] += m.kernel.weight(a);
  }

  SimResult res;
  SnapshotTaker snap(snaps, T, res.snapshots);
  std::vector<std::uint8_t> st = xi0.to_bytes();
  std::vector<std::uint8_t> local(D);
  auto rate_at = [&](Site s) {
    double f1 = 0;
    for (std::size_t j = 0; j < D; ++j) {
      local[j] = st[nbr[s * D + j]];
      if (local[j]) f1 += w[j];
    }
    int state = local[0];
    double r = m.direct_voter_rate * (state ? 1.0 - f1 : f1) + (state ? m.h0(local) : m.h1(local));
    if (r < -1e-9) throw Error(Errc::NegativeRate, "direct flip rate is negative");
    return r > 0 ? r : 0.0;
  };
  if (m.direct_rate_bound > 0) {
    // uniformized clock: proposals at rate N * bound, accepted with rate / bound
    const double bound = m.direct_rate_bound;
    Stream rng(seed, 0, StreamKind::direct);
    std::size_t ones = xi0.count_ones();
    auto frozen = [&] {
      for (Site z = 0; z < N; ++z)
        if (rate_at(z) > 0) return false;
      return true;
    };
    double t = 0;
    bool checked = false;
    while (true) {
      if ((ones == 0 || ones == N) && !checked) {
        checked = true;
        if (frozen()) break;
      }
      t += rng.exponential(bound * static_cast<double>(N));
      if (t > T) break;
      Site s = static_cast<Site>(rng.below(N));
      double r = rate_at(s);
      if (r > bound * (1 + 1e-9)) throw Error(Errc::InvalidRates, "direct flip rate exceeds the declared bound");
      if (rng.uniform() * bound >= r) continue;
      snap.before(t, st, torus);
      ones = st[s] ? ones - 1 : ones + 1;
      st[s] ^= 1;
      checked = false;
      ++res.events;
      ++res.flips;
    }
    snap.before(std::numeric_limits<double>::infinity(), st, torus);
    res.final = Configuration::from_bytes(torus, st);
    return res;
  }

  RateTable tree(N);
  for (Site s = 0; s < N; ++s) tree.set(s, rate_at(s));
  tree.resum();
  Stream rng(seed, 0, StreamKind::direct);
  double t = 0;
  while (true) {
    double total = tree.total();
    if (!(total > 0)) break;
    t += rng.exponential(total);
    if (t > T) break;
    snap.before(t, st, torus);
    Site s;
    do {
      s = static_cast<Site>(tree.find(rng.uniform() * total));
    } while (s >= N || tree.get(s) <= 0);
    st[s] ^= 1;
    ++res.events;
    ++res.flips;
    for (std::size_t j = 0; j < D; ++j) {
      Site z = dependents[s * D + j];
      tree.set(z, rate_at(z));
    }
    if (res.flips % 4096 == 0) tree.resum();
  }
  snap.before(std::numeric_limits<double>::infinity(), st, torus);
  res.final = Configuration::from_bytes(torus, st);
  return res;
}

}  // namespace

std::size_t EventLog::event_count() const {
  std::size_t n = 0;
  for (const auto& v : voter) n += v.size();
  for (const auto& r : reaction) n += r.size();
  return n;
}

void check_torus(const ModelSpec& m, const Torus& torus, Backend backend) {
  if (torus.dimension() != m.kernel.dimension()) throw Error(Errc::InvalidArgument, "torus and kernel dimensions differ");
  if (torus.side() <= 2 * m.interaction_range(backend))
    throw Error(Errc::TorusTooSmall, "torus side must exceed twice the interaction range (" +
                                         std::to_string(m.interaction_range(backend)) + ")");
}

EventLog gen_log(const ModelSpec& m, const Torus& torus, double T, std::uint64_t seed) {
  if (!m.perturbation) throw Error(Errc::InvalidArgument, "model has no g-form");
  const PerturbationSpec& p = *m.perturbation;
  EventLog log;
  log.torus = torus;
  log.horizon = T;
  log.seed = seed;
  log.n0 = p.n0();
  log.voter.resize(torus.sites());
  log.reaction.resize(torus.sites());
  if (!(T > 0)) return log;
  std::vector<OffspringLaw::PointIndex> y(log.n0);
  for (Site s = 0; s < torus.sites(); ++s) {
    VoterStream vs(seed, s, m.voter_rate);
    for (double t = vs.next_time(); t <= T; t = vs.next_time()) log.voter[s].push_back({t, vs.mark(m.kernel)});
    ReactionStream rs(seed, s, p.cstar);
    for (double t = rs.next_time(); t <= T; t = rs.next_time()) {
      double u = rs.mark(p.offspring, y);
      log.reaction[s].push_back({t, u, static_cast<std::uint32_t>(log.offspring.size())});
      log.offspring.insert(log.offspring.end(), y.begin(), y.end());
    }
  }
  return log;
}

SimResult simulate_forward(const ModelSpec& m, const Configuration& xi0, double T, std::uint64_t seed,
                           Backend backend, std::span<const double> snapshot_times) {
  check_torus(m, xi0.torus(), backend);
  if (backend == Backend::graphical) return run_graphical(m, xi0, T, seed, snapshot_times);
  return run_direct(m, xi0, T, seed, snapshot_times);
}

Configuration replay(const ModelSpec& m, const Configuration& xi0, const EventLog& log, double T) {
  check_torus(m, xi0.torus(), Backend::graphical);
  if (T > log.horizon) throw Error(Errc::HorizonExceeded, "replay beyond the log horizon");
  const PerturbationSpec& p = *m.perturbation;
  struct Item {
    double t;
    Site s;
    int kind;
    std::size_t idx;
  };
  std::vector<Item> items;
  for (Site s = 0; s < log.torus.sites(); ++s) {
    for (std::size_t i = 0; i < log.voter[s].size(); ++i) items.push_back({log.voter[s][i].t, s, 0, i});
    for (std::size_t i = 0; i < log.reaction[s].size(); ++i) items.push_back({log.reaction[s][i].t, s, 1, i});
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.s != b.s) return a.s < b.s;
    return a.kind < b.kind;
  });
  const Torus& torus = xi0.torus();
  std::vector<std::uint8_t> st = xi0.to_bytes();
  for (const Item& it : items) {
    if (it.t > T) break;
    if (it.kind == 0) {
      st[it.s] = st[torus.shift(it.s, m.kernel.offset(log.voter[it.s][it.idx].atom))];
    } else {
      const ReactionEvent& e = log.reaction[it.s][it.idx];
      auto y = log.offspring_of(e);
      std::size_t pattern = 0;
      for (int j = 0; j < log.n0; ++j)
        pattern |= static_cast<std::size_t>(st[torus.shift(it.s, p.offspring.points()[y[j]])]) << j;
      int i = st[it.s];
      if (e.u < p.g(1 - i)[pattern] / p.cstar) st[it.s] = static_cast<std::uint8_t>(1 - i);
    }
  }
  return Configuration::from_bytes(torus, st);
}

std::vector<double> coarse_density(const Configuration& c, int a) {
  const Torus& t = c.torus();
  if (a < 1 || t.side() % a) throw Error(Errc::BlockMisaligned, "block side must divide the torus side");
  const int nb = t.side() / a;
  Torus blocks(t.dimension(), nb);
  std::vector<double> sum(blocks.sites(), 0.0);
  std::vector<int> bc(t.dimension());
  for (Site s = 0; s < t.sites(); ++s) {
    if (!c.get(s)) continue;
    auto x = t.coords(s);
    for (int i = 0; i < t.dimension(); ++i) bc[i] = x[i] / a;
    sum[blocks.index(bc)] += 1.0;
  }
  double vol = std::pow(static_cast<double>(a), t.dimension());
  for (double& v : sum) v /= vol;
  return sum;
}

}  // namespace votersim
