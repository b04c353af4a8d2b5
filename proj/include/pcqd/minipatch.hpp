#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcqd/image.hpp"
#include "pcqd/render.hpp"

namespace pcqd {

// Grid decomposition of the views plus the mini-patch mosaic geometry.
struct GridSpec {
    size_t grids_per_side = 16;  // L
    size_t patch_side = 32;      // s
    size_t map_height = 512;
    size_t map_width = 512;

    void validate() const;
    size_t grid_height() const { return map_height / grids_per_side; }
    size_t grid_width() const { return map_width / grids_per_side; }
    size_t slot_rows() const { return map_height / patch_side; }
    size_t slot_cols() const { return map_width / patch_side; }
    size_t slots() const { return slot_rows() * slot_cols(); }
};

struct GridWindow {
    size_t y0, x0, h, w;  // half-open [y0, y0+h) x [x0, x0+w)
};

// L x L half-open windows tiling a height x width image exactly.
std::vector<GridWindow> split_grids(size_t height, size_t width, size_t grids_per_side);

// True iff every pixel of the window is background.
bool is_blank(const ViewImage& img, const GridWindow& win);

struct SlotProvenance {
    size_t view = 0;
    size_t grid_i = 0;
    size_t grid_j = 0;
    size_t off_y = 0;
    size_t off_x = 0;
    bool fill = false;  // drawn with replacement after the pool ran out
};

struct MiniPatchMap {
    ViewImage image;  // mask all-zero; the mosaic has no background notion
    GridSpec spec;
    std::vector<SlotProvenance> slots;  // indexed by slot = row * slot_cols + col
};

// Samples one s x s mini-patch per selected non-blank grid and splices them
// into a map of exactly map_height x map_width. Slot assignment is a seeded
// permutation; pools smaller than the slot count are refilled by resampling
// with replacement.
MiniPatchMap build_map(const ViewSet& views, const GridSpec& spec, uint64_t seed);

// CSV: slot,row,col,view,i,j,off_y,off_x,fill (fill 0/1).
void write_provenance_csv(const std::string& path, const MiniPatchMap& map);

}  // namespace pcqd
