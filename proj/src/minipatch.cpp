#include "pcqd/minipatch.hpp"

#include <cstring>
#include <fstream>

#include "pcqd/common.hpp"
#include "pcqd/rng.hpp"

namespace pcqd {

void GridSpec::validate() const {
    if (grids_per_side == 0 || patch_side == 0 || map_height == 0 || map_width == 0)
        throw Error("grid spec: zero dimension");
    if (map_height % grids_per_side || map_width % grids_per_side)
        throw Error("grid spec: map dimensions must divide by L");
    if (map_height % patch_side || map_width % patch_side)
        throw Error("grid spec: map dimensions must divide by the mini-patch side");
    if (patch_side > grid_height() || patch_side > grid_width())
        throw Error("grid spec: mini-patch side exceeds the grid side");
}

std::vector<GridWindow> split_grids(size_t height, size_t width, size_t grids_per_side) {
    if (grids_per_side == 0 || height % grids_per_side || width % grids_per_side)
        throw Error("split_grids: dimensions must divide by L");
    size_t gh = height / grids_per_side, gw = width / grids_per_side;
    std::vector<GridWindow> out;
    out.reserve(grids_per_side * grids_per_side);
    for (size_t i = 0; i < grids_per_side; ++i)
        for (size_t j = 0; j < grids_per_side; ++j)
            out.push_back({i * gh, j * gw, gh, gw});
    return out;
}

bool is_blank(const ViewImage& img, const GridWindow& win) {
    for (size_t y = win.y0; y < win.y0 + win.h; ++y)
        for (size_t x = win.x0; x < win.x0 + win.w; ++x)
            if (!img.is_background(y, x)) return false;
    return true;
}

MiniPatchMap build_map(const ViewSet& views, const GridSpec& spec, uint64_t seed) {
    spec.validate();
    if (views.views.empty()) throw Error("build_map: no views");
    for (const ViewImage& v : views.views)
        if (v.height != spec.map_height || v.width != spec.map_width)
            throw Error("build_map: view dimensions do not match the grid spec");

    struct Source {
        size_t view, i, j;
    };
    std::vector<Source> candidates;
    size_t gh = spec.grid_height(), gw = spec.grid_width();
    for (size_t v = 0; v < views.views.size(); ++v)
        for (size_t i = 0; i < spec.grids_per_side; ++i)
            for (size_t j = 0; j < spec.grids_per_side; ++j)
                if (!is_blank(views.views[v], {i * gh, j * gw, gh, gw}))
                    candidates.push_back({v, i, j});
    if (candidates.empty()) throw Error("build_map: every grid is blank");

    size_t n_slots = spec.slots();
    Rng rng(seed);
    std::vector<size_t> slot_order(n_slots);
    for (size_t i = 0; i < n_slots; ++i) slot_order[i] = i;
    rng.shuffle(slot_order);
    std::vector<size_t> unique =
        rng.sample_without_replacement(candidates.size(), std::min(n_slots, candidates.size()));

    MiniPatchMap map;
    map.spec = spec;
    map.image.width = spec.map_width;
    map.image.height = spec.map_height;
    map.image.rgb.assign(3 * spec.map_width * spec.map_height, 0);
    map.image.mask.assign(spec.map_width * spec.map_height, 0);
    map.slots.resize(n_slots);

    size_t s = spec.patch_side;
    for (size_t t = 0; t < n_slots; ++t) {
        size_t slot = slot_order[t];
        bool fill = t >= unique.size();
        const Source& src =
            fill ? candidates[rng.below(candidates.size())] : candidates[unique[t]];
        size_t off_y = gh > s ? rng.below(gh - s + 1) : 0;
        size_t off_x = gw > s ? rng.below(gw - s + 1) : 0;
        map.slots[slot] = {src.view, src.i, src.j, off_y, off_x, fill};

        const ViewImage& img = views.views[src.view];
        size_t sy = src.i * gh + off_y, sx = src.j * gw + off_x;
        size_t dy = (slot / spec.slot_cols()) * s, dx = (slot % spec.slot_cols()) * s;
        for (size_t row = 0; row < s; ++row)
            std::memcpy(map.image.rgb.data() + 3 * ((dy + row) * spec.map_width + dx),
                        img.rgb.data() + 3 * ((sy + row) * img.width + sx), 3 * s);
    }
    return map;
}

void write_provenance_csv(const std::string& path, const MiniPatchMap& map) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write provenance csv: " + path);
    os << "slot,row,col,view,i,j,off_y,off_x,fill\n";
    for (size_t slot = 0; slot < map.slots.size(); ++slot) {
        const SlotProvenance& p = map.slots[slot];
        os << slot << ',' << slot / map.spec.slot_cols() << ',' << slot % map.spec.slot_cols()
           << ',' << p.view << ',' << p.grid_i << ',' << p.grid_j << ',' << p.off_y << ','
           << p.off_x << ',' << (p.fill ? 1 : 0) << '\n';
    }
    if (!os) throw IoError("provenance write failed: " + path);
}

}  // namespace pcqd
