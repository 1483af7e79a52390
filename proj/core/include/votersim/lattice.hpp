#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "votersim/kernel.hpp"

namespace votersim {

using Site = std::uint32_t;

class Torus {
 public:
  Torus() = default;
  Torus(int dimension, int side);

  int dimension() const { return dim_; }
  int side() const { return side_; }
  std::size_t sites() const { return sites_; }

  Site index(std::span<const int> coords) const;
  std::vector<int> coords(Site s) const;
  Site shift(Site s, std::span<const int> offset) const;

  bool operator==(const Torus&) const = default;

 private:
  int dim_ = 0;
  int side_ = 0;
  std::size_t sites_ = 0;
};

// Packed {0,1} configuration on a torus.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(Torus torus, bool value = false);

  static Configuration bernoulli(Torus torus, double p, std::uint64_t seed);
  static Configuration bernoulli(Torus torus, const std::function<double(const std::vector<int>&)>& profile,
                                 std::uint64_t seed);
  static Configuration from_bytes(Torus torus, std::span<const std::uint8_t> values);

  const Torus& torus() const { return torus_; }
  std::size_t size() const { return torus_.sites(); }

  bool get(Site s) const { return (words_[s >> 6] >> (s & 63)) & 1U; }
  void set(Site s, bool v) {
    if (v) words_[s >> 6] |= (std::uint64_t{1} << (s & 63));
    else words_[s >> 6] &= ~(std::uint64_t{1} << (s & 63));
  }
  void flip(Site s) { words_[s >> 6] ^= (std::uint64_t{1} << (s & 63)); }

  std::size_t count_ones() const;
  double density() const { return static_cast<double>(count_ones()) / static_cast<double>(size()); }

  std::vector<std::uint8_t> to_bytes() const;
  const std::vector<std::uint64_t>& words() const { return words_; }

  bool operator==(const Configuration&) const = default;

 private:
  Torus torus_;
  std::vector<std::uint64_t> words_;
};

// table[s * offsets.size() + j] = s + offsets[j] on the torus
std::vector<Site> neighbour_table(const Torus& torus, const std::vector<Offset>& offsets);

}  // namespace votersim
