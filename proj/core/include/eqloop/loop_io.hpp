#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "eqloop/loopmeasure.hpp"

namespace eqloop {

/// Columnar text format:
///   # eqloop-loop v1
///   manifold <name>
///   n <grid size>
///   seed <u64>
///   <ambient coordinates of point j, one row per grid point>
struct LoopRecord {
  std::string manifold;
  std::uint64_t seed = 0;
  Loop loop;
};

void write_loop(std::ostream& os, const LoopRecord& r);
LoopRecord read_loop(std::istream& is);

}  // namespace eqloop
