#pragma once

#include <string>

#include "chq/grid.hpp"

namespace chq {

// Field snapshot format: magic "CHQF", then u32 little-endian version (= 1),
// N, M, s, then n float64 little-endian values row-major (x1 slowest).
void write_snapshot(const std::string& path, const Field& u);
Field read_snapshot(const std::string& path);

}  // namespace chq
