#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "votersim/random.hpp"
#include "votersim/rational.hpp"

namespace votersim {

using Offset = std::vector<int>;

struct KernelAtom {
  Offset offset;
  Rational weight;
};

// Finite-support random-walk step law on Z^d. Construction does not validate;
// call validate() to check the standing assumptions.
class Kernel {
 public:
  Kernel() = default;
  Kernel(int dimension, std::vector<KernelAtom> atoms);

  int dimension() const { return dim_; }
  std::size_t size() const { return atoms_.size(); }
  const std::vector<KernelAtom>& atoms() const { return atoms_; }
  const Offset& offset(std::size_t i) const { return atoms_[i].offset; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }

  // Σ p(x) x_1^2, exact
  Rational sigma2_exact() const;
  double sigma2() const { return to_double(sigma2_exact()); }

  // max |x|_inf over the support
  int range() const;
  bool uniform() const;

  std::size_t sample_index(Stream& rng) const { return alias_.sample(rng); }
  const Offset& sample_step(Stream& rng) const { return atoms_[sample_index(rng)].offset; }

 private:
  int dim_ = 0;
  std::vector<KernelAtom> atoms_;
  std::vector<double> weights_;
  AliasTable alias_;
};

Kernel nn_kernel(int d);
Kernel box_kernel(int d, int L);

// Returns sigma2 or throws Error with one of Asymmetric, NonIsotropic,
// OriginInSupport, NotNormalized, Reducible.
Rational validate(const Kernel& k);

// True when the integer vectors generate Z^d as an additive group.
bool generates_lattice(int d, const std::vector<Offset>& vectors);

// Law q of (Y^1..Y^N0). Offsets are stored once in points(); atoms refer to
// them by index. Two representations: an explicit atom list, or uniform
// ordered k-samples without replacement from a pool (used for the box
// neighbourhood, where enumerating atoms is impractical).
class OffspringLaw {
 public:
  using PointIndex = std::uint16_t;
  enum class Kind { explicit_atoms, without_replacement };

  OffspringLaw() = default;

  static OffspringLaw from_atoms(int dimension, const std::vector<std::vector<Offset>>& atoms,
                                 std::vector<Rational> probabilities);
  static OffspringLaw without_replacement(int dimension, std::vector<Offset> pool, int k);

  Kind kind() const { return kind_; }
  int dimension() const { return dim_; }
  int n0() const { return n0_; }
  const std::vector<Offset>& points() const { return points_; }
  int range() const;

  std::size_t atom_count() const;
  // Explicit atoms only.
  std::span<const PointIndex> atom(std::size_t a) const {
    return {atom_points_.data() + a * n0_, static_cast<std::size_t>(n0_)};
  }
  const Rational& atom_probability(std::size_t a) const { return probs_[a]; }

  void sample(Stream& rng, std::span<PointIndex> out) const;

  // E[table(eta)] where eta_j = bit(point of Y^j); bit j of the table index
  // is the value at Y^{j+1}.
  template <class BitOf>
  double expect(std::span<const double> table, BitOf&& bit) const;

  Rational total_probability() const;
  // law of Y^j (j is 0-based) as probabilities over points()
  std::vector<Rational> marginal(int j) const;

 private:
  Kind kind_ = Kind::explicit_atoms;
  int dim_ = 0;
  int n0_ = 0;
  std::vector<Offset> points_;
  std::vector<PointIndex> atom_points_;
  std::vector<Rational> probs_;
  std::vector<double> probs_f_;
  AliasTable alias_;
};

OffspringLaw independent_pair_law(const Kernel& k);

// falling factorial n(n-1)...(n-j+1) as double
inline double falling(int n, int j) {
  double r = 1.0;
  for (int i = 0; i < j; ++i) r *= static_cast<double>(n - i);
  return r;
}

template <class BitOf>
double OffspringLaw::expect(std::span<const double> table, BitOf&& bit) const {
  if (kind_ == Kind::explicit_atoms) {
    double total = 0.0;
    for (std::size_t a = 0; a < probs_f_.size(); ++a) {
      std::size_t pattern = 0;
      for (int j = 0; j < n0_; ++j)
        if (bit(atom_points_[a * n0_ + j])) pattern |= std::size_t{1} << j;
      total += probs_f_[a] * table[pattern];
    }
    return total;
  }
  const int n = static_cast<int>(points_.size());
  int m = 0;
  for (int i = 0; i < n; ++i)
    if (bit(static_cast<PointIndex>(i))) ++m;
  const double denom = falling(n, n0_);
  double total = 0.0;
  for (std::size_t pattern = 0; pattern < table.size(); ++pattern) {
    int j = __builtin_popcountll(pattern);
    double p = falling(m, j) * falling(n - m, n0_ - j) / denom;
    if (p > 0) total += p * table[pattern];
  }
  return total;
}

}  // namespace votersim
