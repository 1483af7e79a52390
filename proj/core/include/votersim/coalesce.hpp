#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "votersim/kernel.hpp"
#include "votersim/model.hpp"
#include "votersim/random.hpp"
#include "votersim/reaction.hpp"

namespace votersim {

struct MergeEvent {
  double t;
  std::uint32_t keep;  // smaller original index of the two classes
  std::uint32_t gone;
};

// Rate-1 coalescing random walks on Z^d from the given starts, run to the
// cutoff. Coinciding starts merge at time 0. Returns merges in time order.
std::vector<MergeEvent> run_coalescing_walks(const Kernel& k, std::span<const Offset> starts, double cutoff,
                                             Stream& rng);

// First time the rate-2 difference walk from `diff` hits 0, or +inf if it
// does not by the cutoff.
double pair_meeting_time(const Kernel& k, const Offset& diff, double cutoff, Stream& rng);

// Canonical restricted-growth labels of the partition after merges up to t.
std::vector<std::uint8_t> partition_at(std::size_t n, const std::vector<MergeEvent>& merges, double t);
std::vector<std::vector<int>> blocks_of(std::span<const std::uint8_t> labels);

// A start point fixed + e_{i1} + e_{i2} + ..., where the e_i are independent
// kernel draws shared across the points of one realization.
struct StartTerm {
  Offset fixed;
  std::vector<int> e;
};

struct PatternQuery {
  std::vector<StartTerm> points;
  std::vector<std::vector<int>> groups;  // indices into points
  std::string text;
};

// Syntax: groups separated by '|', members by ','; a member is a '+'-sum of
// "0", "e<k>" or an explicit "[x1;x2;...]" offset. Example "0|e1,e2".
PatternQuery parse_pattern(const std::string& text, int d);

struct CoalescenceEstimate {
  double value = 0;
  double std_error = 0;
  std::size_t n = 0;
  double cutoff = 0;
  bool tail_bound = false;
  double extrapolated = std::numeric_limits<double>::quiet_NaN();
  double bias = std::numeric_limits<double>::quiet_NaN();
};

// Fraction of n realizations in which, by the cutoff, each group has fully
// coalesced and no two groups have met.
CoalescenceEstimate estimate(const PatternQuery& q, const Kernel& k, double cutoff, std::size_t n,
                             std::uint64_t seed, bool extrapolate = false);
// Same realizations evaluated at several cutoffs (nested).
std::vector<CoalescenceEstimate> estimate_cutoffs(const PatternQuery& q, const Kernel& k,
                                                  const std::vector<double>& cutoffs, std::size_t n,
                                                  std::uint64_t seed);
// Several groupings of one point set on shared realizations.
std::vector<CoalescenceEstimate> estimate_shared(const std::vector<StartTerm>& points,
                                                 const std::vector<std::vector<std::vector<int>>>& groupings,
                                                 const Kernel& k, double cutoff, std::size_t n, std::uint64_t seed);

// (a) p(e1|e2) - p(0|e1) should vanish; (b) p(e1|e2+e3)/p(0|e1) should be
// 1 + 1/|N| for a kernel uniform on N.
struct NeighbourIdentityReport {
  CoalescenceEstimate p0_e1, pe1_e2, pe1_e23;
  double residual_a = 0, stderr_a = 0;
  double ratio_b = 0, stderr_b = 0, target_b = 0;
};

NeighbourIdentityReport neighbour_identity_check(const Kernel& k, double cutoff, std::size_t n, std::uint64_t seed);

// Empirical law of set partitions of {0..N0}.
class PartitionLaw {
 public:
  struct Entry {
    std::vector<std::uint8_t> labels;
    std::uint64_t count;
  };

  PartitionLaw() = default;
  PartitionLaw(int elements, std::vector<Entry> entries);

  int elements() const { return elements_; }
  std::uint64_t samples() const { return n_; }
  const std::vector<Entry>& entries() const { return entries_; }
  double probability(std::size_t i) const { return static_cast<double>(entries_[i].count) / static_cast<double>(n_); }
  double std_error(std::size_t i) const;
  double probability(std::span<const std::uint8_t> labels) const;
  const std::vector<std::uint8_t>& sample(Stream& rng) const { return entries_[alias_.sample(rng)].labels; }

 private:
  int elements_ = 0;
  std::uint64_t n_ = 0;
  std::vector<Entry> entries_;
  AliasTable alias_;
};

PartitionLaw estimate_nu0(const OffspringLaw& q, const Kernel& k, double cutoff, std::size_t n, std::uint64_t seed);

template <class T>
struct Basis {
  std::vector<T> beta, delta;  // indexed by subset bitmask S of {1..N0}
};

// Inclusion-exclusion: β̂(S) = Σ_{V⊆S} (-1)^{|S|-|V|} g1(1_V), likewise δ̂ from g0.
template <class T>
Basis<T> g_to_basis(const std::vector<T>& g0, const std::vector<T>& g1);
// Σ_{S⊆η} c(S), the inverse transform
template <class T>
std::vector<T> basis_to_table(const std::vector<T>& coeffs);

// f(u) from g̃ and a partition law, per-coefficient standard errors from the
// per-sample contributions.
ReactionPolynomial reaction_poly_from_partitions(const PerturbationSpec& p, const PartitionLaw& law);
ReactionPolynomial reaction_poly_mc(const PerturbationSpec& p, const Kernel& k, double cutoff, std::size_t n,
                                    std::uint64_t seed);
// f'(0) when β(∅) = 0, with its standard error
std::pair<double, double> reaction_slope_at_zero(const ReactionPolynomial& f);

// p2 = p(0|e1,e2), p3 = p(0|e1|e2) from the partition law of {0, e1, e2}
struct LvCoalescence {
  double p2, p3, se2, se3;
  double m0() const { return p2 / (p2 + p3); }
};
LvCoalescence lv_coalescence(const PartitionLaw& law);

template <class T>
Basis<T> g_to_basis(const std::vector<T>& g0, const std::vector<T>& g1) {
  auto mobius = [](std::vector<T> a) {
    for (std::size_t bit = 1; bit < a.size(); bit <<= 1)
      for (std::size_t m = 0; m < a.size(); ++m)
        if (m & bit) a[m] -= a[m ^ bit];
    return a;
  };
  return {mobius(g1), mobius(g0)};
}

template <class T>
std::vector<T> basis_to_table(const std::vector<T>& coeffs) {
  std::vector<T> a = coeffs;
  for (std::size_t bit = 1; bit < a.size(); bit <<= 1)
    for (std::size_t m = 0; m < a.size(); ++m)
      if (m & bit) a[m] += a[m ^ bit];
  return a;
}

}  // namespace votersim
