#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace pcqd {

// Positions in arbitrary units; colors optional 8-bit RGB per point.
struct PointCloud {
    std::vector<std::array<double, 3>> positions;
    std::vector<std::array<uint8_t, 3>> colors;

    size_t size() const { return positions.size(); }
    bool has_colors() const { return !colors.empty(); }
    void validate() const;  // finite positions, color count matches
};

// Centroid to the origin, max radius scaled to exactly 1. Colors untouched.
// Requires at least two distinct positions.
PointCloud normalize_unit_sphere(const PointCloud& pc);

using Mat3 = std::array<std::array<double, 3>, 3>;

// Uniform random rotation (quaternion method); seed 0 is reserved for the
// identity.
Mat3 rotation_from_seed(uint64_t seed);
PointCloud rotate(const PointCloud& pc, uint64_t seed);
PointCloud apply_rotation(const PointCloud& pc, const Mat3& r);

}  // namespace pcqd
