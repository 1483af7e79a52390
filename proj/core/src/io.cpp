#include "votersim/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <toml.hpp>

#include "votersim/error.hpp"

namespace votersim {

namespace {

Kernel kernel_from_builder(const std::string& name, int d) {
  if (name == "nn") return nn_kernel(d);
  if (name.rfind("box:", 0) == 0) {
    int L = 0;
    try {
      L = std::stoi(name.substr(4));
    } catch (const std::exception&) {
      throw Error(Errc::ParseError, "bad box size in '" + name + "'");
    }
    return box_kernel(d, L);
  }
  throw Error(Errc::ParseError, "unknown kernel builder '" + name + "'");
}

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_le(std::istream& in, int bytes) {
  unsigned char b[8] = {};
  if (!in.read(reinterpret_cast<char*>(b), bytes)) throw Error(Errc::IOFailure, "truncated snapshot");
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

}  // namespace

Kernel kernel_from_spec(const std::string& spec, int dimension) {
  if (spec == "nn" || spec.rfind("box:", 0) == 0) {
    Kernel k = kernel_from_builder(spec, dimension);
    validate(k);
    return k;
  }
  Kernel k = load_kernel_file(spec);
  if (k.dimension() != dimension) throw Error(Errc::InvalidArgument, "kernel file has another dimension");
  return k;
}

Kernel parse_kernel_file(const std::string& text) {
  toml::table tbl;
  try {
    tbl = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw Error(Errc::ParseError, std::string(e.description()));
  }
  auto d = tbl["dimension"].value<std::int64_t>();
  if (!d || *d < 1) throw Error(Errc::ParseError, "kernel file needs a positive 'dimension'");
  const int dim = static_cast<int>(*d);
  if (auto b = tbl["builder"].value<std::string>()) {
    Kernel k = kernel_from_builder(*b, dim);
    validate(k);
    return k;
  }
  {
    const toml::array* atoms = tbl["atom"].as_array();
    if (!atoms || atoms->empty()) throw Error(Errc::ParseError, "kernel file needs 'builder' or [[atom]] entries");
    std::vector<KernelAtom> list;
    for (const auto& node : *atoms) {
      const toml::table* a = node.as_table();
      if (!a) throw Error(Errc::ParseError, "atom must be a table");
      const toml::array* off = (*a)["offset"].as_array();
      if (!off || static_cast<int>(off->size()) != dim) throw Error(Errc::ParseError, "atom offset has wrong length");
      Offset o;
      for (const auto& c : *off) {
        auto v = c.value<std::int64_t>();
        if (!v) throw Error(Errc::ParseError, "offset entries must be integers");
        o.push_back(static_cast<int>(*v));
      }
      Rational w;
      if (auto ws = (*a)["weight"].value<std::string>()) w = parse_rational(*ws);
      else if (auto wi = (*a)["weight"].value<std::int64_t>()) w = Rational(*wi);
      else if (auto wd = (*a)["weight"].value<double>()) w = exact_rational(*wd);
      else throw Error(Errc::ParseError, "atom needs a weight");
      list.push_back({o, w});
    }
    Kernel k(dim, std::move(list));
    validate(k);
    return k;
  }
}

Kernel load_kernel_file(const std::string& path) { return parse_kernel_file(read_file(path)); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IOFailure, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IOFailure, "cannot write '" + path + "'");
  out << data;
  if (!out) throw Error(Errc::IOFailure, "write to '" + path + "' failed");
}

void write_snapshots_csv(std::ostream& out, const std::vector<Snapshot>& snaps, int block) {
  if (snaps.empty()) return;
  const int d = snaps[0].config.torus().dimension();
  out << "t";
  for (int i = 1; i <= d; ++i) out << ",block_x" << i;
  out << ",density\n";
  char buf[64];
  for (const auto& s : snaps) {
    auto field = coarse_density(s.config, block);
    Torus blocks(d, s.config.torus().side() / block);
    for (Site b = 0; b < blocks.sites(); ++b) {
      std::snprintf(buf, sizeof buf, "%.17g", s.t);
      out << buf;
      for (int c : blocks.coords(b)) out << ',' << c;
      std::snprintf(buf, sizeof buf, "%.17g", field[b]);
      out << ',' << buf << '\n';
    }
  }
}

void write_snapshot_binary(std::ostream& out, const Snapshot& snap) {
  const Torus& t = snap.config.torus();
  out.write("VSNP", 4);
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(t.dimension()));
  put_u32(out, static_cast<std::uint32_t>(t.side()));
  put_u64(out, static_cast<std::uint64_t>(std::llround(snap.t * 1e6)));
  put_u64(out, 0);
  for (std::uint64_t w : snap.config.words()) put_u64(out, w);
  if (!out) throw Error(Errc::IOFailure, "snapshot write failed");
}

Snapshot read_snapshot_binary(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "VSNP", 4) != 0) throw Error(Errc::IOFailure, "not a snapshot file");
  auto version = get_le(in, 4);
  if (version != 1) throw Error(Errc::IOFailure, "unsupported snapshot version");
  int d = static_cast<int>(get_le(in, 4));
  int M = static_cast<int>(get_le(in, 4));
  auto micro = static_cast<std::int64_t>(get_le(in, 8));
  get_le(in, 8);
  Torus torus(d, M);
  std::vector<std::uint8_t> bytes(torus.sites());
  const std::size_t words = (torus.sites() + 63) / 64;
  for (std::size_t w = 0; w < words; ++w) {
    std::uint64_t v = get_le(in, 8);
    for (std::size_t b = 0; b < 64 && w * 64 + b < bytes.size(); ++b) bytes[w * 64 + b] = (v >> b) & 1;
  }
  return {static_cast<double>(micro) / 1e6, Configuration::from_bytes(torus, bytes)};
}

}  // namespace votersim
