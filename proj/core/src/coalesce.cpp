#include "votersim/coalesce.hpp"

#include <algorithm>
#include <boost/random/beta_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "votersim/error.hpp"

namespace votersim {

namespace {

// time of the j-th of J uniform points on (t0, t1]
double order_statistic_time(double t0, double t1, std::int64_t j, std::int64_t J, Stream& rng) {
  boost::random::beta_distribution<double> beta(static_cast<double>(j), static_cast<double>(J - j + 1));
  return t0 + (t1 - t0) * beta(rng);
}

std::int64_t poisson_count(double mean, Stream& rng) {
  if (!(mean > 0)) return 0;
  boost::random::poisson_distribution<std::int64_t, double> pois(mean);
  return pois(rng);
}

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0U); }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

Offset realize(const StartTerm& term, const std::vector<Offset>& e, int d) {
  Offset x = term.fixed.empty() ? Offset(d, 0) : term.fixed;
  for (int k : term.e)
    for (int c = 0; c < d; ++c) x[c] += e[k - 1][c];
  return x;
}

int max_e(const std::vector<StartTerm>& pts) {
  int m = 0;
  for (const auto& p : pts)
    for (int k : p.e) m = std::max(m, k);
  return m;
}

bool grouping_holds(const std::vector<std::vector<int>>& groups, UnionFind& uf) {
  std::vector<std::uint32_t> roots;
  for (const auto& g : groups) {
    std::uint32_t r = uf.find(static_cast<std::uint32_t>(g[0]));
    for (int i : g)
      if (uf.find(static_cast<std::uint32_t>(i)) != r) return false;
    if (std::find(roots.begin(), roots.end(), r) != roots.end()) return false;
    roots.push_back(r);
  }
  return true;
}

CoalescenceEstimate make_estimate(std::size_t hits, std::size_t n, double cutoff) {
  CoalescenceEstimate e;
  e.n = n;
  e.cutoff = cutoff;
  e.value = static_cast<double>(hits) / static_cast<double>(n);
  e.std_error = std::sqrt(e.value * (1 - e.value) / static_cast<double>(n));
  return e;
}

// hits[q][c] over shared realizations
std::vector<std::vector<std::size_t>> run_queries(const std::vector<StartTerm>& points,
                                                  const std::vector<std::vector<std::vector<int>>>& groupings,
                                                  const Kernel& k, const std::vector<double>& cutoffs, std::size_t n,
                                                  std::uint64_t seed) {
  if (points.empty()) throw Error(Errc::InvalidArgument, "pattern has no points");
  if (n < 1) throw Error(Errc::InvalidArgument, "need n >= 1");
  for (double c : cutoffs)
    if (!(c > 0)) throw Error(Errc::InvalidArgument, "cutoff must be positive");
  const int d = k.dimension();
  const int ne = max_e(points);
  const double horizon = *std::max_element(cutoffs.begin(), cutoffs.end());
  std::vector<std::vector<std::size_t>> hits(groupings.size(), std::vector<std::size_t>(cutoffs.size(), 0));
  std::vector<Offset> e(static_cast<std::size_t>(ne));
  std::vector<Offset> starts(points.size());
  for (std::size_t r = 0; r < n; ++r) {
    Stream rng(seed, r, StreamKind::walks);
    for (int i = 0; i < ne; ++i) e[i] = k.sample_step(rng);
    for (std::size_t i = 0; i < points.size(); ++i) starts[i] = realize(points[i], e, d);
    std::vector<MergeEvent> merges;
    if (points.size() == 2) {
      Offset diff(d);
      for (int c = 0; c < d; ++c) diff[c] = starts[1][c] - starts[0][c];
      double t = pair_meeting_time(k, diff, horizon, rng);
      if (std::isfinite(t)) merges.push_back({t, 0, 1});
    } else {
      merges = run_coalescing_walks(k, starts, horizon, rng);
    }
    for (std::size_t c = 0; c < cutoffs.size(); ++c) {
      UnionFind uf(points.size());
      for (const auto& m : merges)
        if (m.t <= cutoffs[c]) uf.unite(m.keep, m.gone);
      for (std::size_t q = 0; q < groupings.size(); ++q)
        if (grouping_holds(groupings[q], uf)) ++hits[q][c];
    }
  }
  return hits;
}

}  // namespace

std::vector<MergeEvent> run_coalescing_walks(const Kernel& k, std::span<const Offset> starts, double cutoff,
                                             Stream& rng) {
  const int d = k.dimension();
  const std::size_t n = starts.size();
  std::vector<int> pos(n * d);
  std::vector<std::uint32_t> id;  // original index of each live walker
  std::vector<MergeEvent> merges;
  for (std::size_t i = 0; i < n; ++i) {
    bool merged = false;
    for (std::size_t a = 0; a < id.size(); ++a)
      if (std::equal(starts[i].begin(), starts[i].end(), pos.begin() + static_cast<long>(a * d))) {
        merges.push_back({0.0, id[a], static_cast<std::uint32_t>(i)});
        merged = true;
        break;
      }
    if (merged) continue;
    std::copy(starts[i].begin(), starts[i].end(), pos.begin() + static_cast<long>(id.size() * d));
    id.push_back(static_cast<std::uint32_t>(i));
  }
  double t = 0;
  while (id.size() > 1) {
    const std::size_t m = id.size();
    const std::int64_t J = poisson_count(static_cast<double>(m) * (cutoff - t), rng);
    bool met = false;
    for (std::int64_t j = 1; j <= J; ++j) {
      std::size_t w = rng.below(m);
      const Offset& z = k.sample_step(rng);
      int* p = pos.data() + w * d;
      for (int c = 0; c < d; ++c) p[c] += z[c];
      for (std::size_t a = 0; a < m; ++a) {
        if (a == w || !std::equal(p, p + d, pos.data() + a * d)) continue;
        double tau = order_statistic_time(t, cutoff, j, J, rng);
        std::uint32_t keep = std::min(id[a], id[w]), gone = std::max(id[a], id[w]);
        merges.push_back({tau, keep, gone});
        // the surviving slot keeps the smaller original index
        id[a] = keep;
        std::size_t last = m - 1;
        if (w != last) {
          std::copy(pos.begin() + static_cast<long>(last * d), pos.begin() + static_cast<long>((last + 1) * d),
                    pos.begin() + static_cast<long>(w * d));
          id[w] = id[last];
        }
        id.pop_back();
        t = tau;
        met = true;
        break;
      }
      if (met) break;
    }
    if (!met) break;
  }
  return merges;
}

double pair_meeting_time(const Kernel& k, const Offset& diff, double cutoff, Stream& rng) {
  const int d = k.dimension();
  Offset x = diff;
  auto at_zero = [&] { return std::all_of(x.begin(), x.end(), [](int c) { return c == 0; }); };
  if (at_zero()) return 0.0;
  const std::int64_t J = poisson_count(2.0 * cutoff, rng);
  for (std::int64_t j = 1; j <= J; ++j) {
    const Offset& z = k.sample_step(rng);
    for (int c = 0; c < d; ++c) x[c] += z[c];
    if (at_zero()) return order_statistic_time(0.0, cutoff, j, J, rng);
  }
  return std::numeric_limits<double>::infinity();
}

std::vector<std::uint8_t> partition_at(std::size_t n, const std::vector<MergeEvent>& merges, double t) {
  UnionFind uf(n);
  for (const auto& m : merges)
    if (m.t <= t) uf.unite(m.keep, m.gone);
  std::vector<std::uint8_t> labels(n);
  std::vector<std::uint32_t> seen;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t r = uf.find(static_cast<std::uint32_t>(i));
    auto it = std::find(seen.begin(), seen.end(), r);
    if (it == seen.end()) {
      labels[i] = static_cast<std::uint8_t>(seen.size());
      seen.push_back(r);
    } else {
      labels[i] = static_cast<std::uint8_t>(it - seen.begin());
    }
  }
  return labels;
}

std::vector<std::vector<int>> blocks_of(std::span<const std::uint8_t> labels) {
  std::vector<std::vector<int>> blocks;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= blocks.size()) blocks.resize(labels[i] + 1);
    blocks[labels[i]].push_back(static_cast<int>(i));
  }
  return blocks;
}

PatternQuery parse_pattern(const std::string& text, int d) {
  PatternQuery q;
  q.text = text;
  auto split = [](const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == sep) {
        out.push_back(cur);
        cur.clear();
      } else if (c != ' ') {
        cur += c;
      }
    }
    out.push_back(cur);
    return out;
  };
  for (const auto& group : split(text, '|')) {
    std::vector<int> members;
    for (const auto& member : split(group, ',')) {
      if (member.empty()) throw Error(Errc::ParseError, "empty member in pattern '" + text + "'");
      StartTerm term{Offset(d, 0), {}};
      for (const auto& atom : split(member, '+')) {
        if (atom == "0") continue;
        if (atom.size() > 1 && atom[0] == 'e') {
          int kidx = 0;
          try {
            kidx = std::stoi(atom.substr(1));
          } catch (const std::exception&) {
            throw Error(Errc::ParseError, "bad term '" + atom + "'");
          }
          if (kidx < 1) throw Error(Errc::ParseError, "e indices start at 1");
          term.e.push_back(kidx);
        } else if (atom.size() > 2 && atom.front() == '[' && atom.back() == ']') {
          auto coords = split(atom.substr(1, atom.size() - 2), ';');
          if (static_cast<int>(coords.size()) != d) throw Error(Errc::ParseError, "offset has wrong dimension");
          for (int c = 0; c < d; ++c) term.fixed[c] += std::stoi(coords[c]);
        } else {
          throw Error(Errc::ParseError, "bad term '" + atom + "'");
        }
      }
      members.push_back(static_cast<int>(q.points.size()));
      q.points.push_back(term);
    }
    q.groups.push_back(members);
  }
  return q;
}

CoalescenceEstimate estimate(const PatternQuery& q, const Kernel& k, double cutoff, std::size_t n,
                             std::uint64_t seed, bool extrapolate) {
  if (!extrapolate) return estimate_cutoffs(q, k, {cutoff}, n, seed)[0];
  auto both = estimate_cutoffs(q, k, {cutoff, cutoff / 4}, n, seed);
  CoalescenceEstimate e = both[0];
  // the tail of the meeting time decays like t^{-1/2} in d = 3
  e.extrapolated = 2 * both[0].value - both[1].value;
  e.bias = both[0].value - e.extrapolated;
  e.tail_bound = true;
  return e;
}

std::vector<CoalescenceEstimate> estimate_cutoffs(const PatternQuery& q, const Kernel& k,
                                                  const std::vector<double>& cutoffs, std::size_t n,
                                                  std::uint64_t seed) {
  auto hits = run_queries(q.points, {q.groups}, k, cutoffs, n, seed);
  std::vector<CoalescenceEstimate> out;
  for (std::size_t c = 0; c < cutoffs.size(); ++c) out.push_back(make_estimate(hits[0][c], n, cutoffs[c]));
  return out;
}

std::vector<CoalescenceEstimate> estimate_shared(const std::vector<StartTerm>& points,
                                                 const std::vector<std::vector<std::vector<int>>>& groupings,
                                                 const Kernel& k, double cutoff, std::size_t n, std::uint64_t seed) {
  auto hits = run_queries(points, groupings, k, {cutoff}, n, seed);
  std::vector<CoalescenceEstimate> out;
  for (const auto& h : hits) out.push_back(make_estimate(h[0], n, cutoff));
  return out;
}

NeighbourIdentityReport neighbour_identity_check(const Kernel& k, double cutoff, std::size_t n, std::uint64_t seed) {
  const int d = k.dimension();
  NeighbourIdentityReport r;
  r.p0_e1 = estimate(parse_pattern("0|e1", d), k, cutoff, n, stream_key(seed, 0, 11));
  r.pe1_e2 = estimate(parse_pattern("e1|e2", d), k, cutoff, n, stream_key(seed, 1, 11));
  r.residual_a = r.pe1_e2.value - r.p0_e1.value;
  r.stderr_a = std::hypot(r.pe1_e2.std_error, r.p0_e1.std_error);
  if (!k.uniform()) throw Error(Errc::NotUniformKernel, "part (b) needs equal kernel weights");
  r.pe1_e23 = estimate(parse_pattern("e1|e2+e3", d), k, cutoff, n, stream_key(seed, 2, 11));
  r.target_b = 1.0 + 1.0 / static_cast<double>(k.size());
  r.ratio_b = r.pe1_e23.value / r.p0_e1.value;
  r.stderr_b = r.ratio_b * std::hypot(r.pe1_e23.std_error / r.pe1_e23.value, r.p0_e1.std_error / r.p0_e1.value);
  return r;
}

PartitionLaw::PartitionLaw(int elements, std::vector<Entry> entries)
    : elements_(elements), entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) { return a.labels < b.labels; });
  std::vector<double> w;
  for (const auto& e : entries_) {
    n_ += e.count;
    w.push_back(static_cast<double>(e.count));
  }
  if (n_ == 0) throw Error(Errc::InvalidArgument, "empty partition law");
  alias_ = AliasTable(w);
}

double PartitionLaw::std_error(std::size_t i) const {
  double p = probability(i);
  return std::sqrt(p * (1 - p) / static_cast<double>(n_));
}

double PartitionLaw::probability(std::span<const std::uint8_t> labels) const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (std::equal(labels.begin(), labels.end(), entries_[i].labels.begin(), entries_[i].labels.end()))
      return probability(i);
  return 0.0;
}

PartitionLaw estimate_nu0(const OffspringLaw& q, const Kernel& k, double cutoff, std::size_t n, std::uint64_t seed) {
  if (n < 1 || !(cutoff > 0)) throw Error(Errc::InvalidArgument, "estimate_nu0 needs n >= 1 and cutoff > 0");
  const int n0 = q.n0();
  std::map<std::vector<std::uint8_t>, std::uint64_t> counts;
  std::vector<OffspringLaw::PointIndex> y(n0);
  std::vector<Offset> starts(n0 + 1, Offset(k.dimension(), 0));
  for (std::size_t r = 0; r < n; ++r) {
    Stream rng(seed, r, StreamKind::walks);
    q.sample(rng, y);
    for (int j = 0; j < n0; ++j) starts[j + 1] = q.points()[y[j]];
    auto merges = run_coalescing_walks(k, starts, cutoff, rng);
    ++counts[partition_at(starts.size(), merges, cutoff)];
  }
  std::vector<PartitionLaw::Entry> entries;
  for (auto& [labels, c] : counts) entries.push_back({labels, c});
  return PartitionLaw(n0 + 1, std::move(entries));
}

namespace {

// contribution of one partition of {0..N0} to the coefficients of f
std::vector<double> partition_contribution(std::span<const std::uint8_t> labels, const Basis<double>& b, int n0) {
  std::vector<double> c(static_cast<std::size_t>(n0) + 2, 0.0);
  const std::size_t subsets = std::size_t{1} << n0;
  for (std::size_t S = 0; S < subsets; ++S) {
    unsigned used = 0;
    bool touches_zero = false;
    for (int j = 0; j < n0; ++j) {
      if (!((S >> j) & 1)) continue;
      std::uint8_t l = labels[j + 1];
      if (l == labels[0]) touches_zero = true;
      used |= 1U << l;
    }
    int blocks = __builtin_popcount(used);
    if (!touches_zero && b.beta[S] != 0) {
      c[blocks] += b.beta[S];
      c[blocks + 1] -= b.beta[S];
    }
    int with_zero = __builtin_popcount(used | (1U << labels[0]));
    c[with_zero] -= b.delta[S];
  }
  return c;
}

}  // namespace

ReactionPolynomial reaction_poly_from_partitions(const PerturbationSpec& p, const PartitionLaw& law) {
  const int n0 = p.n0();
  if (law.elements() != n0 + 1) throw Error(Errc::InvalidArgument, "partition law does not match N0");
  Basis<double> b = g_to_basis(p.g_tilde(0), p.g_tilde(1));
  const std::size_t m = static_cast<std::size_t>(n0) + 2;
  std::vector<double> mean(m, 0.0), sq(m, 0.0);
  const double n = static_cast<double>(law.samples());
  for (const auto& e : law.entries()) {
    auto c = partition_contribution(e.labels, b, n0);
    double w = static_cast<double>(e.count) / n;
    for (std::size_t i = 0; i < m; ++i) {
      mean[i] += w * c[i];
      sq[i] += w * c[i] * c[i];
    }
  }
  ReactionPolynomial r;
  r.stderrs.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    double var = std::max(0.0, sq[i] - mean[i] * mean[i]);
    r.stderrs[i] = std::sqrt(var / n);
  }
  r.f = RealPoly(mean);
  r.provenance = Provenance::monte_carlo;
  r.source = "reaction_poly_mc";
  return r;
}

ReactionPolynomial reaction_poly_mc(const PerturbationSpec& p, const Kernel& k, double cutoff, std::size_t n,
                                    std::uint64_t seed) {
  return reaction_poly_from_partitions(p, estimate_nu0(p.offspring, k, cutoff, n, seed));
}

std::pair<double, double> reaction_slope_at_zero(const ReactionPolynomial& f) {
  if (f.coeff(0) != 0) throw Error(Errc::InvalidArgument, "f(0) != 0: the slope formula needs beta(empty) = 0");
  return {f.coeff(1), f.stderr_of(1)};
}

LvCoalescence lv_coalescence(const PartitionLaw& law) {
  if (law.elements() != 3) throw Error(Errc::InvalidArgument, "need the partition law of {0, e1, e2}");
  const std::uint8_t two[3] = {0, 1, 1}, three[3] = {0, 1, 2};
  LvCoalescence c{};
  for (std::size_t i = 0; i < law.entries().size(); ++i) {
    const auto& l = law.entries()[i].labels;
    if (std::equal(l.begin(), l.end(), two)) {
      c.p2 = law.probability(i);
      c.se2 = law.std_error(i);
    }
    if (std::equal(l.begin(), l.end(), three)) {
      c.p3 = law.probability(i);
      c.se3 = law.std_error(i);
    }
  }
  return c;
}

}  // namespace votersim
