#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace votersim {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream keys for the per-site event streams and other consumers.
enum class StreamKind : std::uint64_t {
  voter = 1,
  reaction = 2,
  initial = 3,
  direct = 4,
  walks = 5,
  bbm = 6,
  replicate = 7,
  offspring = 8,
  trial = 9,
};

constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index, std::uint64_t kind) {
  std::uint64_t h = mix64(seed + kGolden);
  h = mix64(h ^ (index * 0xd6e8feb86659fd93ULL + 0x2545f4914f6cdd1dULL));
  h = mix64(h ^ (kind * 0xa0761d6478bd642fULL + 0xe7037ed1a0b428dbULL));
  return h;
}

constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index, StreamKind kind) {
  return stream_key(seed, index, static_cast<std::uint64_t>(kind));
}

// SplitMix64: the n-th output is mix64(key + n * golden), so any element of a
// stream can be regenerated from (key, n) alone.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream() = default;
  explicit Stream(std::uint64_t key) : state_(key) {}
  Stream(std::uint64_t seed, std::uint64_t index, StreamKind kind)
      : state_(stream_key(seed, index, kind)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next(); }

  std::uint64_t next() {
    state_ += kGolden;
    return mix64(state_);
  }

  // [0, 1) on a 2^-53 grid
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // (0, 1]
  double uniform_open() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log(uniform_open()) / rate; }

  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    double u1 = uniform_open();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_ = 0;
};

// Walker/Vose alias table over non-negative weights.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(std::span<const double> weights);

  std::size_t size() const { return prob_.size(); }

  std::size_t sample(Stream& rng) const {
    double x = rng.uniform() * static_cast<double>(prob_.size());
    auto i = static_cast<std::size_t>(x);
    if (i >= prob_.size()) i = prob_.size() - 1;
    return (x - static_cast<double>(i)) < prob_[i] ? i : alias_[i];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

}  // namespace votersim
