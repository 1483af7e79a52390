#include "votersim/lattice.hpp"

#include <bit>

#include "votersim/error.hpp"

namespace votersim {

Torus::Torus(int dimension, int side) : dim_(dimension), side_(side) {
  if (dim_ < 1 || side_ < 1) throw Error(Errc::InvalidArgument, "torus needs d >= 1 and side >= 1");
  sites_ = 1;
  for (int i = 0; i < dim_; ++i) {
    sites_ *= static_cast<std::size_t>(side_);
    if (sites_ > (std::size_t{1} << 32)) throw Error(Errc::InvalidArgument, "torus too large");
  }
}

Site Torus::index(std::span<const int> coords) const {
  std::size_t s = 0;
  for (int i = dim_ - 1; i >= 0; --i) {
    int c = coords[i] % side_;
    if (c < 0) c += side_;
    s = s * static_cast<std::size_t>(side_) + static_cast<std::size_t>(c);
  }
  return static_cast<Site>(s);
}

std::vector<int> Torus::coords(Site s) const {
  std::vector<int> c(dim_);
  std::size_t r = s;
  for (int i = 0; i < dim_; ++i) {
    c[i] = static_cast<int>(r % static_cast<std::size_t>(side_));
    r /= static_cast<std::size_t>(side_);
  }
  return c;
}

Site Torus::shift(Site s, std::span<const int> offset) const {
  std::size_t r = s, out = 0, stride = 1;
  for (int i = 0; i < dim_; ++i) {
    int c = static_cast<int>(r % static_cast<std::size_t>(side_)) + offset[i] % side_;
    r /= static_cast<std::size_t>(side_);
    if (c < 0) c += side_;
    if (c >= side_) c -= side_;
    out += static_cast<std::size_t>(c) * stride;
    stride *= static_cast<std::size_t>(side_);
  }
  return static_cast<Site>(out);
}

Configuration::Configuration(Torus torus, bool value)
    : torus_(torus), words_((torus.sites() + 63) / 64, value ? ~std::uint64_t{0} : 0) {
  if (value && torus.sites() % 64) words_.back() = (std::uint64_t{1} << (torus.sites() % 64)) - 1;
}

Configuration Configuration::bernoulli(Torus torus, double p, std::uint64_t seed) {
  Configuration c(torus);
  for (Site s = 0; s < torus.sites(); ++s) {
    Stream rng(seed, s, StreamKind::initial);
    if (rng.uniform() < p) c.set(s, true);
  }
  return c;
}

Configuration Configuration::bernoulli(Torus torus, const std::function<double(const std::vector<int>&)>& profile,
                                       std::uint64_t seed) {
  Configuration c(torus);
  for (Site s = 0; s < torus.sites(); ++s) {
    Stream rng(seed, s, StreamKind::initial);
    if (rng.uniform() < profile(torus.coords(s))) c.set(s, true);
  }
  return c;
}

Configuration Configuration::from_bytes(Torus torus, std::span<const std::uint8_t> values) {
  if (values.size() != torus.sites()) throw Error(Errc::InvalidArgument, "value count does not match torus");
  Configuration c(torus);
  for (Site s = 0; s < torus.sites(); ++s)
    if (values[s]) c.set(s, true);
  return c;
}

std::size_t Configuration::count_ones() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::vector<std::uint8_t> Configuration::to_bytes() const {
  std::vector<std::uint8_t> out(size());
  for (Site s = 0; s < size(); ++s) out[s] = get(s);
  return out;
}

std::vector<Site> neighbour_table(const Torus& torus, const std::vector<Offset>& offsets) {
  std::vector<Site> table(torus.sites() * offsets.size());
  for (Site s = 0; s < torus.sites(); ++s)
    for (std::size_t j = 0; j < offsets.size(); ++j) table[s * offsets.size() + j] = torus.shift(s, offsets[j]);
  return table;
}

}  // namespace votersim
