#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pcqd/image.hpp"
#include "pcqd/pointcloud.hpp"

namespace pcqd {

constexpr uint8_t kBackgroundGray = 128;

struct ViewSet {
    std::vector<ViewImage> views;
    uint64_t pose_seed = 0;
    Mat3 global_rotation{};
};

// Orthographic z-buffered square-splat renderer. Each view applies the
// seeded global rotation followed by one of six canonical axis poses, then
// projects [-1,1]^2 onto the raster. Depth ties keep the lower point index.
// The cloud must be normalized (max radius <= 1).
ViewSet render_views(const PointCloud& pc, size_t n_views, size_t resolution,
                     uint64_t pose_seed, int splat_radius = 2, size_t threads = 1);

// Renders both clouds under the identical rotation/pose sequence so the
// rasters are pixel-aligned.
std::pair<ViewSet, ViewSet> render_pair(const PointCloud& distorted, const PointCloud& reference,
                                        size_t n_views, size_t resolution, uint64_t pose_seed,
                                        int splat_radius = 2, size_t threads = 1);

}  // namespace pcqd
