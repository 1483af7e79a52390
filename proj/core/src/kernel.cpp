#include "votersim/kernel.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <numeric>

#include "votersim/error.hpp"

namespace votersim {

Kernel::Kernel(int dimension, std::vector<KernelAtom> atoms) : dim_(dimension), atoms_(std::move(atoms)) {
  if (dim_ < 1) throw Error(Errc::InvalidArgument, "kernel dimension must be >= 1");
  if (atoms_.empty()) throw Error(Errc::InvalidArgument, "kernel has empty support");
  for (const auto& a : atoms_) {
    if (static_cast<int>(a.offset.size()) != dim_)
      throw Error(Errc::InvalidArgument, "kernel offset has wrong dimension");
    weights_.push_back(to_double(a.weight));
  }
  bool positive = std::all_of(weights_.begin(), weights_.end(), [](double w) { return w >= 0; });
  if (positive && std::accumulate(weights_.begin(), weights_.end(), 0.0) > 0) alias_ = AliasTable(weights_);
}

Rational Kernel::sigma2_exact() const {
  Rational s = 0;
  for (const auto& a : atoms_) s += a.weight * a.offset[0] * a.offset[0];
  return s;
}

int Kernel::range() const {
  int r = 0;
  for (const auto& a : atoms_)
    for (int c : a.offset) r = std::max(r, std::abs(c));
  return r;
}

bool Kernel::uniform() const {
  return std::all_of(atoms_.begin(), atoms_.end(), [&](const KernelAtom& a) { return a.weight == atoms_[0].weight; });
}

Kernel nn_kernel(int d) {
  if (d < 1) throw Error(Errc::InvalidArgument, "nn_kernel: d must be >= 1");
  std::vector<KernelAtom> atoms;
  Rational w(1, 2 * d);
  for (int i = 0; i < d; ++i)
    for (int s : {1, -1}) {
      Offset x(d, 0);
      x[i] = s;
      atoms.push_back({x, w});
    }
  return Kernel(d, std::move(atoms));
}

Kernel box_kernel(int d, int L) {
  if (d < 1 || L < 1) throw Error(Errc::InvalidArgument, "box_kernel: need d >= 1 and L >= 1");
  long long side = 2 * L + 1, count = 1;
  for (int i = 0; i < d; ++i) count *= side;
  Rational w(1, count - 1);
  std::vector<KernelAtom> atoms;
  Offset x(d, -L);
  for (long long n = 0; n < count; ++n) {
    if (std::any_of(x.begin(), x.end(), [](int c) { return c != 0; })) atoms.push_back({x, w});
    for (int i = 0; i < d; ++i) {
      if (++x[i] <= L) break;
      x[i] = -L;
    }
  }
  return Kernel(d, std::move(atoms));
}

bool generates_lattice(int d, const std::vector<Offset>& vectors) {
  std::vector<std::vector<long long>> vs;
  for (const auto& v : vectors) vs.emplace_back(v.begin(), v.end());
  for (int row = 0; row < d; ++row) {
    // Euclid on the row entries until a single vector carries the gcd.
    while (true) {
      std::size_t pivot = vs.size();
      for (std::size_t i = 0; i < vs.size(); ++i)
        if (vs[i][row] != 0 && (pivot == vs.size() || std::llabs(vs[i][row]) < std::llabs(vs[pivot][row])))
          pivot = i;
      if (pivot == vs.size()) return false;
      bool reduced = true;
      for (std::size_t i = 0; i < vs.size(); ++i) {
        if (i == pivot || vs[i][row] == 0) continue;
        long long q = vs[i][row] / vs[pivot][row];
        for (int c = 0; c < d; ++c) vs[i][c] -= q * vs[pivot][c];
        if (vs[i][row] != 0) reduced = false;
      }
      if (reduced) {
        if (std::llabs(vs[pivot][row]) != 1) return false;
        vs.erase(vs.begin() + static_cast<long>(pivot));
        break;
      }
    }
  }
  return true;
}

Rational validate(const Kernel& k) {
  const int d = k.dimension();
  Rational total = 0;
  for (const auto& a : k.atoms()) {
    if (a.weight <= 0) throw Error(Errc::NotNormalized, "kernel weight must be positive");
    total += a.weight;
  }
  if (total != 1) throw Error(Errc::NotNormalized, "kernel weights sum to " + to_string(total));
  std::map<Offset, Rational> law;
  for (const auto& a : k.atoms()) {
    if (std::all_of(a.offset.begin(), a.offset.end(), [](int c) { return c == 0; }))
      throw Error(Errc::OriginInSupport, "p(0) must be 0");
    law[a.offset] += a.weight;
  }
  for (const auto& [x, w] : law) {
    Offset neg(x);
    for (int& c : neg) c = -c;
    auto it = law.find(neg);
    if (it == law.end() || it->second != w) throw Error(Errc::Asymmetric, "p(x) != p(-x)");
  }
  Rational s2 = k.sigma2_exact();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Rational m = 0;
      for (const auto& [x, w] : law) m += w * x[i] * x[j];
      if (m != (i == j ? s2 : Rational(0))) throw Error(Errc::NonIsotropic, "covariance is not sigma2 * I");
    }
  std::vector<Offset> support;
  for (const auto& [x, w] : law) support.push_back(x);
  if (!generates_lattice(d, support)) throw Error(Errc::Reducible, "support does not generate Z^d");
  return s2;
}

OffspringLaw OffspringLaw::from_atoms(int dimension, const std::vector<std::vector<Offset>>& atoms,
                                      std::vector<Rational> probabilities) {
  if (atoms.empty() || atoms.size() != probabilities.size())
    throw Error(Errc::InvalidArgument, "offspring law needs one probability per atom");
  OffspringLaw q;
  q.kind_ = Kind::explicit_atoms;
  q.dim_ = dimension;
  q.n0_ = static_cast<int>(atoms[0].size());
  if (q.n0_ < 1) throw Error(Errc::InvalidArgument, "offspring law needs N0 >= 1");
  std::map<Offset, PointIndex> index;
  for (const auto& atom : atoms) {
    if (static_cast<int>(atom.size()) != q.n0_) throw Error(Errc::InvalidArgument, "atoms differ in N0");
    for (const auto& y : atom) {
      if (static_cast<int>(y.size()) != dimension) throw Error(Errc::InvalidArgument, "offset has wrong dimension");
      auto [it, inserted] = index.try_emplace(y, static_cast<PointIndex>(q.points_.size()));
      if (inserted) q.points_.push_back(y);
      q.atom_points_.push_back(it->second);
    }
  }
  q.probs_ = std::move(probabilities);
  for (const auto& p : q.probs_) {
    if (p < 0) throw Error(Errc::NotNormalized, "negative offspring probability");
    q.probs_f_.push_back(to_double(p));
  }
  q.alias_ = AliasTable(q.probs_f_);
  return q;
}

OffspringLaw OffspringLaw::without_replacement(int dimension, std::vector<Offset> pool, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > pool.size())
    throw Error(Errc::InvalidArgument, "cannot draw k distinct points from the pool");
  OffspringLaw q;
  q.kind_ = Kind::without_replacement;
  q.dim_ = dimension;
  q.n0_ = k;
  q.points_ = std::move(pool);
  return q;
}

int OffspringLaw::range() const {
  int r = 0;
  for (const auto& y : points_)
    for (int c : y) r = std::max(r, std::abs(c));
  return r;
}

std::size_t OffspringLaw::atom_count() const {
  if (kind_ == Kind::explicit_atoms) return probs_.size();
  return static_cast<std::size_t>(falling(static_cast<int>(points_.size()), n0_));
}

void OffspringLaw::sample(Stream& rng, std::span<PointIndex> out) const {
  if (kind_ == Kind::explicit_atoms) {
    std::size_t a = alias_.sample(rng);
    std::copy_n(atom_points_.begin() + static_cast<long>(a * n0_), n0_, out.begin());
    return;
  }
  const auto n = points_.size();
  for (int j = 0; j < n0_; ++j) {
    PointIndex p;
    do {
      p = static_cast<PointIndex>(rng.below(n));
    } while (std::find(out.begin(), out.begin() + j, p) != out.begin() + j);
    out[j] = p;
  }
}

Rational OffspringLaw::total_probability() const {
  if (kind_ == Kind::without_replacement) return 1;
  Rational t = 0;
  for (const auto& p : probs_) t += p;
  return t;
}

std::vector<Rational> OffspringLaw::marginal(int j) const {
  std::vector<Rational> m(points_.size(), Rational(0));
  if (kind_ == Kind::without_replacement) {
    for (auto& x : m) x = Rational(1, static_cast<long>(points_.size()));
    return m;
  }
  for (std::size_t a = 0; a < probs_.size(); ++a) m[atom_points_[a * n0_ + j]] += probs_[a];
  return m;
}

OffspringLaw independent_pair_law(const Kernel& k) {
  std::vector<std::vector<Offset>> atoms;
  std::vector<Rational> probs;
  for (const auto& a : k.atoms())
    for (const auto& b : k.atoms()) {
      atoms.push_back({a.offset, b.offset});
      probs.push_back(a.weight * b.weight);
    }
  return OffspringLaw::from_atoms(k.dimension(), atoms, std::move(probs));
}

}  // namespace votersim
