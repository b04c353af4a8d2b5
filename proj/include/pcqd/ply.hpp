#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcqd/pointcloud.hpp"

namespace pcqd {

// Parses ASCII or binary little-endian PLY 1.0. Honors the vertex element's
// float x/y/z and optional uchar red/green/blue; other scalar vertex
// properties are skipped, elements after vertex are ignored. Every malformed
// input raises PlyError; no input crashes.
PointCloud parse_ply(const std::vector<uint8_t>& bytes);
PointCloud parse_ply_file(const std::string& path);

std::vector<uint8_t> write_ply(const PointCloud& pc, bool binary = true);
void write_ply_file(const std::string& path, const PointCloud& pc, bool binary = true);

}  // namespace pcqd
