#include "pcqd/pointcloud.hpp"

#include <cmath>

#include "pcqd/common.hpp"
#include "pcqd/rng.hpp"

namespace pcqd {

void PointCloud::validate() const {
    if (positions.empty()) throw Error("point cloud: no points");
    for (const auto& p : positions)
        for (double v : p)
            if (!std::isfinite(v)) throw NumericError("point cloud: non-finite position");
    if (!colors.empty() && colors.size() != positions.size())
        throw Error("point cloud: color count does not match point count");
}

PointCloud normalize_unit_sphere(const PointCloud& pc) {
    pc.validate();
    if (pc.size() < 2) throw Error("normalize: need at least two points");
    std::array<double, 3> centroid{0, 0, 0};
    for (const auto& p : pc.positions)
        for (int k = 0; k < 3; ++k) centroid[k] += p[k];
    for (int k = 0; k < 3; ++k) centroid[k] /= static_cast<double>(pc.size());
    double max_norm = 0.0;
    PointCloud out = pc;
    for (auto& p : out.positions) {
        for (int k = 0; k < 3; ++k) p[k] -= centroid[k];
        max_norm = std::max(max_norm, std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]));
    }
    if (max_norm == 0.0) throw Error("normalize: all points coincident");
    double inv = 1.0 / max_norm;
    for (auto& p : out.positions)
        for (int k = 0; k < 3; ++k) p[k] *= inv;
    return out;
}

Mat3 rotation_from_seed(uint64_t seed) {
    if (seed == 0) return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    Rng rng(seed);
    double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
    double two_pi = 6.283185307179586476925286766559;
    double qx = std::sqrt(1.0 - u1) * std::sin(two_pi * u2);
    double qy = std::sqrt(1.0 - u1) * std::cos(two_pi * u2);
    double qz = std::sqrt(u1) * std::sin(two_pi * u3);
    double qw = std::sqrt(u1) * std::cos(two_pi * u3);
    Mat3 r;
    r[0] = {1 - 2 * (qy * qy + qz * qz), 2 * (qx * qy - qz * qw), 2 * (qx * qz + qy * qw)};
    r[1] = {2 * (qx * qy + qz * qw), 1 - 2 * (qx * qx + qz * qz), 2 * (qy * qz - qx * qw)};
    r[2] = {2 * (qx * qz - qy * qw), 2 * (qy * qz + qx * qw), 1 - 2 * (qx * qx + qy * qy)};
    return r;
}

PointCloud apply_rotation(const PointCloud& pc, const Mat3& r) {
    PointCloud out = pc;
    for (size_t i = 0; i < pc.positions.size(); ++i) {
        const auto& p = pc.positions[i];
        for (int k = 0; k < 3; ++k)
            out.positions[i][k] = r[k][0] * p[0] + r[k][1] * p[1] + r[k][2] * p[2];
    }
    return out;
}

PointCloud rotate(const PointCloud& pc, uint64_t seed) {
    pc.validate();
    if (seed == 0) return pc;
    return apply_rotation(pc, rotation_from_seed(seed));
}

}  // namespace pcqd
