#include "pcqd/render.hpp"

#include <cmath>
#include <limits>

#include "pcqd/common.hpp"
#include "pcqd/threading.hpp"

namespace pcqd {

namespace {

// World-to-camera rotations for the six canonical axis views (+Z, -Z, +X,
// -X, +Y, -Y); the camera looks along -z_cam.
const Mat3 kAxisViews[6] = {
    {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}},
    {{{-1, 0, 0}, {0, 1, 0}, {0, 0, -1}}},
    {{{0, 0, -1}, {0, 1, 0}, {1, 0, 0}}},
    {{{0, 0, 1}, {0, 1, 0}, {-1, 0, 0}}},
    {{{1, 0, 0}, {0, 0, -1}, {0, 1, 0}}},
    {{{1, 0, 0}, {0, 0, 1}, {0, -1, 0}}},
};

Mat3 compose(const Mat3& a, const Mat3& b) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
    return r;
}

void render_one_view(const PointCloud& pc, const Mat3& rot, size_t res, int radius,
                     ViewImage& img) {
    img = ViewImage::background(res, res, kBackgroundGray, kBackgroundGray, kBackgroundGray);
    std::vector<double> zbuf(res * res, std::numeric_limits<double>::infinity());
    double half = static_cast<double>(res) / 2.0;
    long lres = static_cast<long>(res);
    for (size_t i = 0; i < pc.size(); ++i) {
        const auto& p = pc.positions[i];
        double cx = rot[0][0] * p[0] + rot[0][1] * p[1] + rot[0][2] * p[2];
        double cy = rot[1][0] * p[0] + rot[1][1] * p[1] + rot[1][2] * p[2];
        double cz = rot[2][0] * p[0] + rot[2][1] * p[1] + rot[2][2] * p[2];
        long px = static_cast<long>(std::floor((cx + 1.0) * half));
        long py = static_cast<long>(std::floor((1.0 - cy) * half));
        px = std::clamp(px, 0L, lres - 1);
        py = std::clamp(py, 0L, lres - 1);
        double depth = -cz;
        uint8_t r = 255, g = 255, b = 255;
        if (pc.has_colors()) {
            r = pc.colors[i][0];
            g = pc.colors[i][1];
            b = pc.colors[i][2];
        }
        for (long dy = -radius; dy <= radius; ++dy) {
            long y = py + dy;
            if (y < 0 || y >= lres) continue;
            for (long dx = -radius; dx <= radius; ++dx) {
                long x = px + dx;
                if (x < 0 || x >= lres) continue;
                size_t pix = static_cast<size_t>(y) * res + static_cast<size_t>(x);
                if (depth < zbuf[pix]) {
                    zbuf[pix] = depth;
                    img.rgb[3 * pix] = r;
                    img.rgb[3 * pix + 1] = g;
                    img.rgb[3 * pix + 2] = b;
                    img.mask[pix] = 0;
                }
            }
        }
    }
}

}  // namespace

ViewSet render_views(const PointCloud& pc, size_t n_views, size_t resolution,
                     uint64_t pose_seed, int splat_radius, size_t threads) {
    pc.validate();
    if (n_views < 1 || n_views > 6) throw Error("render: n_views must be in [1,6]");
    if (resolution < 8) throw Error("render: resolution too small");
    if (splat_radius < 0) throw Error("render: negative splat radius");
    for (const auto& p : pc.positions)
        if (p[0] * p[0] + p[1] * p[1] + p[2] * p[2] > 1.0 + 1e-6)
            throw Error("render: cloud not normalized to the unit sphere");

    ViewSet set;
    set.pose_seed = pose_seed;
    set.global_rotation = rotation_from_seed(pose_seed);
    set.views.resize(n_views);
    parallel_for(n_views, threads, [&](size_t n) {
        Mat3 rot = compose(kAxisViews[n], set.global_rotation);
        render_one_view(pc, rot, resolution, splat_radius, set.views[n]);
    });
    return set;
}

std::pair<ViewSet, ViewSet> render_pair(const PointCloud& distorted, const PointCloud& reference,
                                        size_t n_views, size_t resolution, uint64_t pose_seed,
                                        int splat_radius, size_t threads) {
    ViewSet d = render_views(distorted, n_views, resolution, pose_seed, splat_radius, threads);
    ViewSet r = render_views(reference, n_views, resolution, pose_seed, splat_radius, threads);
    return {std::move(d), std::move(r)};
}

}  // namespace pcqd
