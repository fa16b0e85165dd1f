#pragma once

#include <iosfwd>
#include <string>

#include "fides/neural/network.hpp"

namespace fides::nn {

// Snapshot layout, little-endian:
//   uint32 layer count L, then L x uint32 layer sizes,
//   then parameter_count() x float64 in the flat parameter order.
void write_snapshot(std::ostream& out, const Network& net);
Network read_snapshot(std::istream& in);

void save_snapshot(const std::string& path, const Network& net);
Network load_snapshot(const std::string& path);

}  // namespace fides::nn
