#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pcqd/common.hpp"
#include "pcqd/corpus.hpp"
#include "pcqd/render.hpp"
#include "pcqd/rng.hpp"
#include "testutil.hpp"

using namespace pcqd;

namespace {

PointCloud normalized_shape(const std::string& name, size_t n, uint64_t seed) {
    return normalize_unit_sphere(make_shape(name, n, seed));
}

}  // namespace

TEST_CASE("single point at the origin splats a centered block") {
    PointCloud pc;
    pc.positions = {{0, 0, 0}, {0, 0, 1e-12}};  // normalize needs two distinct points
    pc.positions[1] = {0, 0, 0};
    // Build directly: one point at the origin, already inside the sphere.
    PointCloud single;
    single.positions = {{0.0, 0.0, 0.0}};
    single.colors = {{10, 200, 30}};
    ViewSet set = render_views(single, 1, 512, 0, 2);
    const ViewImage& img = set.views[0];
    size_t lit = 0;
    for (size_t y = 0; y < 512; ++y)
        for (size_t x = 0; x < 512; ++x) {
            bool inside = y >= 254 && y <= 258 && x >= 254 && x <= 258;
            if (!img.is_background(y, x)) {
                ++lit;
                CHECK(inside);
                CHECK(img.px(y, x)[0] == 10);
                CHECK(img.px(y, x)[1] == 200);
                CHECK(img.px(y, x)[2] == 30);
            } else {
                CHECK_FALSE(inside);
                CHECK(img.px(y, x)[0] == kBackgroundGray);
            }
        }
    CHECK(lit == 25);
}

TEST_CASE("coincident points: nearer depth wins, ties keep the lower index") {
    PointCloud pc;
    pc.positions = {{0, 0, 0.5}, {0, 0, 0.5}};  // identical depth
    pc.colors = {{255, 0, 0}, {0, 0, 255}};
    ViewSet set = render_views(pc, 1, 64, 0, 0);
    CHECK(set.views[0].px(32, 32)[0] == 255);  // first point kept

    pc.positions = {{0, 0, 0.2}, {0, 0, 0.8}};  // second is nearer to the +Z camera
    set = render_views(pc, 1, 64, 0, 0);
    CHECK(set.views[0].px(32, 32)[2] == 255);
}

TEST_CASE("rendering is bit-deterministic per pose seed") {
    PointCloud pc = normalized_shape("torus0", 800, 5);
    ViewSet a = render_views(pc, 6, 128, 42);
    ViewSet b = render_views(pc, 6, 128, 42);
    for (size_t n = 0; n < 6; ++n) {
        CHECK(a.views[n].rgb == b.views[n].rgb);
        CHECK(a.views[n].mask == b.views[n].mask);
    }
    ViewSet c = render_views(pc, 6, 128, 43);
    bool any_diff = false;
    for (size_t n = 0; n < 6; ++n) any_diff = any_diff || a.views[n].rgb != c.views[n].rgb;
    CHECK(any_diff);
}

TEST_CASE("parallel rendering matches serial output exactly") {
    PointCloud pc = normalized_shape("blob0", 600, 6);
    ViewSet serial = render_views(pc, 6, 96, 17, 2, 1);
    ViewSet parallel = render_views(pc, 6, 96, 17, 2, 4);
    for (size_t n = 0; n < 6; ++n) {
        CHECK(serial.views[n].rgb == parallel.views[n].rgb);
        CHECK(serial.views[n].mask == parallel.views[n].mask);
    }
}

TEST_CASE("identical pair renders to identical images") {
    PointCloud pc = normalized_shape("sphere0", 500, 7);
    auto [d, r] = render_pair(pc, pc, 6, 96, 9);
    for (size_t n = 0; n < 6; ++n) {
        CHECK(d.views[n].rgb == r.views[n].rgb);
        CHECK(d.views[n].mask == r.views[n].mask);
    }
}

TEST_CASE("color-only distortion leaves the background masks identical") {
    PointCloud ref = normalized_shape("cube0", 700, 8);
    PointCloud noisy = distort(ref, DistortionType::ColorNoise, 5, 77);
    auto [d, r] = render_pair(noisy, ref, 6, 128, 11);
    for (size_t n = 0; n < 6; ++n) CHECK(d.views[n].mask == r.views[n].mask);
}

TEST_CASE("subset cloud never shrinks the background mask") {
    PointCloud ref = normalized_shape("torus1", 900, 9);
    // Drop half the points of the normalized cloud directly so both clouds
    // share the exact same frame.
    PointCloud half = ref;
    half.positions.resize(ref.size() / 2);
    half.colors.resize(ref.size() / 2);
    auto [d, r] = render_pair(half, ref, 6, 128, 13);
    for (size_t n = 0; n < 6; ++n)
        for (size_t i = 0; i < d.views[n].mask.size(); ++i)
            if (r.views[n].mask[i]) CHECK(d.views[n].mask[i]);
}

TEST_CASE("splat locality: lit pixels stay within the chebyshev radius") {
    PointCloud pc;
    Rng rng(15);
    for (int i = 0; i < 30; ++i)
        pc.positions.push_back({rng.uniform_in(-0.6, 0.6), rng.uniform_in(-0.6, 0.6),
                                rng.uniform_in(-0.6, 0.6)});
    size_t res = 128;
    int radius = 3;
    ViewSet set = render_views(pc, 1, res, 0, radius);
    // Recompute projected centers for view 0 (identity pose, identity seed).
    std::vector<std::pair<long, long>> centers;
    for (const auto& p : pc.positions) {
        long px = static_cast<long>(std::floor((p[0] + 1.0) * res / 2.0));
        long py = static_cast<long>(std::floor((1.0 - p[1]) * res / 2.0));
        centers.push_back({py, px});
    }
    for (size_t y = 0; y < res; ++y)
        for (size_t x = 0; x < res; ++x) {
            if (set.views[0].is_background(y, x)) continue;
            long best = 1 << 20;
            for (auto [cy, cx] : centers)
                best = std::min(best, std::max(std::labs(cy - static_cast<long>(y)),
                                               std::labs(cx - static_cast<long>(x))));
            CHECK(best <= radius);
        }
}

TEST_CASE("render validates inputs") {
    PointCloud pc;
    pc.positions = {{2.0, 0, 0}};  // outside the unit sphere
    CHECK_THROWS_AS(render_views(pc, 1, 64, 0), Error);
    PointCloud ok;
    ok.positions = {{0.1, 0, 0}};
    CHECK_THROWS_AS(render_views(ok, 0, 64, 0), Error);
    CHECK_THROWS_AS(render_views(ok, 7, 64, 0), Error);
}

TEST_CASE("png and mask round-trip") {
    PointCloud pc = normalized_shape("sphere1", 300, 10);
    ViewSet set = render_views(pc, 1, 64, 21);
    testutil::TempDir dir("png");
    std::string png = dir.str() + "/view.png";
    std::string msk = dir.str() + "/view.mask";
    write_png(png, set.views[0]);
    write_mask(msk, set.views[0]);
    ViewImage back = read_png(png);
    CHECK(back.width == 64);
    CHECK(back.height == 64);
    CHECK(back.rgb == set.views[0].rgb);
    read_mask(msk, back);
    CHECK(back.mask == set.views[0].mask);
}

TEST_CASE("real image conversion round-trips bytes") {
    PointCloud pc = normalized_shape("blob1", 200, 11);
    ViewSet set = render_views(pc, 1, 32, 3);
    Tensor real = image_to_real(set.views[0]);
    CHECK(real.shape == std::vector<size_t>{32, 32, 3});
    ViewImage back = real_to_image(real);
    CHECK(back.rgb == set.views[0].rgb);
}
