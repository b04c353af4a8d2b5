#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "pcqd/common.hpp"
#include "pcqd/minipatch.hpp"

using namespace pcqd;

namespace {

// Fully foreground view with a position/view-dependent color pattern.
ViewImage patterned_view(size_t res, size_t view) {
    ViewImage img = ViewImage::background(res, res, 128, 128, 128);
    for (size_t y = 0; y < res; ++y)
        for (size_t x = 0; x < res; ++x) {
            size_t pix = y * res + x;
            img.mask[pix] = 0;
            img.rgb[3 * pix] = static_cast<uint8_t>((view * 47 + y) & 0xFF);
            img.rgb[3 * pix + 1] = static_cast<uint8_t>((y * 31 + x * 17) & 0xFF);
            img.rgb[3 * pix + 2] = static_cast<uint8_t>((x + view * 99) & 0xFF);
        }
    return img;
}

ViewSet patterned_views(size_t res, size_t n) {
    ViewSet set;
    for (size_t v = 0; v < n; ++v) set.views.push_back(patterned_view(res, v));
    return set;
}

void check_provenance_verbatim(const MiniPatchMap& map, const ViewSet& views) {
    const GridSpec& spec = map.spec;
    size_t s = spec.patch_side;
    for (size_t slot = 0; slot < map.slots.size(); ++slot) {
        const SlotProvenance& p = map.slots[slot];
        const ViewImage& src = views.views[p.view];
        size_t sy = p.grid_i * spec.grid_height() + p.off_y;
        size_t sx = p.grid_j * spec.grid_width() + p.off_x;
        size_t dy = (slot / spec.slot_cols()) * s;
        size_t dx = (slot % spec.slot_cols()) * s;
        for (size_t r = 0; r < s; ++r)
            for (size_t c = 0; c < s; ++c)
                for (int ch = 0; ch < 3; ++ch)
                    REQUIRE(map.image.px(dy + r, dx + c)[ch] == src.px(sy + r, sx + c)[ch]);
    }
}

}  // namespace

TEST_CASE("split_grids: 512 with L=16 gives 256 windows of 32") {
    std::vector<GridWindow> grids = split_grids(512, 512, 16);
    CHECK(grids.size() == 256);
    std::vector<int> covered(512 * 512, 0);
    for (const GridWindow& g : grids) {
        CHECK(g.h == 32);
        CHECK(g.w == 32);
        for (size_t y = g.y0; y < g.y0 + g.h; ++y)
            for (size_t x = g.x0; x < g.x0 + g.w; ++x) covered[y * 512 + x] += 1;
    }
    for (int c : covered) CHECK(c == 1);
}

TEST_CASE("split_grids: L=1 is the whole image") {
    std::vector<GridWindow> grids = split_grids(64, 64, 1);
    REQUIRE(grids.size() == 1);
    CHECK(grids[0].h == 64);
    CHECK(grids[0].w == 64);
}

TEST_CASE("blank detection is strict all-background") {
    ViewImage img = ViewImage::background(64, 64, 128, 128, 128);
    GridWindow win{0, 0, 32, 32};
    CHECK(is_blank(img, win));
    // One foreground pixel flips it, even at 99% masked.
    img.mask[5 * 64 + 7] = 0;
    CHECK_FALSE(is_blank(img, win));
    // Window fully inside the masked remainder stays blank.
    CHECK(is_blank(img, {32, 32, 32, 32}));
}

TEST_CASE("full-coverage six views: 1536 candidates fill 256 distinct slots") {
    GridSpec spec;  // 512, L=16, s=32
    ViewSet views = patterned_views(512, 6);
    MiniPatchMap map = build_map(views, spec, 99);
    CHECK(map.image.width == 512);
    CHECK(map.image.height == 512);
    REQUIRE(map.slots.size() == 256);
    std::set<std::tuple<size_t, size_t, size_t>> sources;
    for (const SlotProvenance& p : map.slots) {
        CHECK_FALSE(p.fill);
        CHECK(p.off_y == 0);         // grid side equals patch side
        sources.insert({p.view, p.grid_i, p.grid_j});
    }
    CHECK(sources.size() == 256);
    check_provenance_verbatim(map, views);
}

TEST_CASE("single non-blank grid feeds every slot") {
    GridSpec spec;
    spec.map_height = spec.map_width = 128;
    spec.grids_per_side = 4;  // 32-px grids
    spec.patch_side = 32;     // 16 slots
    ViewSet views;
    views.views.push_back(ViewImage::background(128, 128, 128, 128, 128));
    // Unmask one grid only: grid (1,2).
    for (size_t y = 32; y < 64; ++y)
        for (size_t x = 64; x < 96; ++x) {
            views.views[0].mask[y * 128 + x] = 0;
            views.views[0].px(y, x)[0] = 200;
        }
    MiniPatchMap map = build_map(views, spec, 5);
    size_t fills = 0;
    for (const SlotProvenance& p : map.slots) {
        CHECK(p.view == 0);
        CHECK(p.grid_i == 1);
        CHECK(p.grid_j == 2);
        fills += p.fill ? 1 : 0;
    }
    CHECK(fills == map.slots.size() - 1);
    check_provenance_verbatim(map, views);
}

TEST_CASE("all-blank views are rejected") {
    GridSpec spec;
    spec.map_height = spec.map_width = 64;
    spec.grids_per_side = 2;
    spec.patch_side = 32;
    ViewSet views;
    views.views.push_back(ViewImage::background(64, 64, 128, 128, 128));
    CHECK_THROWS_AS(build_map(views, spec, 1), Error);
}

TEST_CASE("map construction is bit-deterministic per seed") {
    GridSpec spec;
    spec.map_height = spec.map_width = 128;
    spec.grids_per_side = 8;
    spec.patch_side = 16;
    ViewSet views = patterned_views(128, 3);
    MiniPatchMap a = build_map(views, spec, 7);
    MiniPatchMap b = build_map(views, spec, 7);
    CHECK(a.image.rgb == b.image.rgb);
    REQUIRE(a.slots.size() == b.slots.size());
    for (size_t i = 0; i < a.slots.size(); ++i) {
        CHECK(a.slots[i].view == b.slots[i].view);
        CHECK(a.slots[i].grid_i == b.slots[i].grid_i);
        CHECK(a.slots[i].grid_j == b.slots[i].grid_j);
        CHECK(a.slots[i].fill == b.slots[i].fill);
    }
    MiniPatchMap c = build_map(views, spec, 8);
    CHECK(a.image.rgb != c.image.rgb);
}

TEST_CASE("offsets sample inside oversized grids") {
    GridSpec spec;
    spec.map_height = spec.map_width = 128;
    spec.grids_per_side = 4;  // 32-px grids
    spec.patch_side = 16;     // 64 slots, offsets in [0,16]
    ViewSet views = patterned_views(128, 2);
    MiniPatchMap map = build_map(views, spec, 3);
    bool any_nonzero = false;
    for (const SlotProvenance& p : map.slots) {
        CHECK(p.off_y <= 16);
        CHECK(p.off_x <= 16);
        any_nonzero = any_nonzero || p.off_y > 0 || p.off_x > 0;
    }
    CHECK(any_nonzero);
    check_provenance_verbatim(map, views);
}

TEST_CASE("slot adjacency scrambles source adjacency") {
    GridSpec spec;  // full-coverage default 512/16/32
    ViewSet views = patterned_views(512, 6);
    MiniPatchMap map = build_map(views, spec, 11);
    size_t adjacent = 0, pairs = 0;
    for (size_t slot = 0; slot + 1 < map.slots.size(); ++slot) {
        if (slot % map.spec.slot_cols() == map.spec.slot_cols() - 1) continue;  // row edge
        const SlotProvenance& a = map.slots[slot];
        const SlotProvenance& b = map.slots[slot + 1];
        ++pairs;
        bool same_view = a.view == b.view;
        size_t di = a.grid_i > b.grid_i ? a.grid_i - b.grid_i : b.grid_i - a.grid_i;
        size_t dj = a.grid_j > b.grid_j ? a.grid_j - b.grid_j : b.grid_j - a.grid_j;
        if (same_view && di <= 1 && dj <= 1) ++adjacent;
    }
    CHECK(pairs > 0);
    CHECK(static_cast<double>(adjacent) / static_cast<double>(pairs) <= 0.10);
}

TEST_CASE("grid spec validation") {
    GridSpec bad;
    bad.map_height = 100;  // not divisible by 16
    CHECK_THROWS_AS(bad.validate(), Error);
    GridSpec s_too_big;
    s_too_big.grids_per_side = 32;  // 16-px grids
    s_too_big.patch_side = 32;
    CHECK_THROWS_AS(s_too_big.validate(), Error);
}
