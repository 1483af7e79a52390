#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "votersim/engine.hpp"
#include "votersim/kernel.hpp"

namespace votersim {

// "nn", "box:L", or the path of a kernel file.
Kernel kernel_from_spec(const std::string& spec, int dimension);

// Kernel file:
//   dimension = 3
//   builder = "nn"            (or "box:2")
// or explicit atoms
//   [[atom]]
//   offset = [1, 0, 0]
//   weight = "1/6"
Kernel parse_kernel_file(const std::string& text);
Kernel load_kernel_file(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& data);

// Snapshot CSV: t, block_x1..block_xd, density
void write_snapshots_csv(std::ostream& out, const std::vector<Snapshot>& snaps, int block);

// Binary snapshot: 32-byte header (magic "VSNP", u32 version, u32 d, u32 M,
// i64 t in micro-units, u64 reserved), then the packed words little-endian.
void write_snapshot_binary(std::ostream& out, const Snapshot& snap);
Snapshot read_snapshot_binary(std::istream& in);

}  // namespace votersim
