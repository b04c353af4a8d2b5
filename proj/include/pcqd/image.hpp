#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcqd/tensor.hpp"

namespace pcqd {

// Fixed-size RGB raster plus a background flag per pixel (1 = background,
// never written by a splat).
struct ViewImage {
    size_t width = 0;
    size_t height = 0;
    std::vector<uint8_t> rgb;   // 3 * width * height, row-major
    std::vector<uint8_t> mask;  // width * height

    static ViewImage background(size_t w, size_t h, uint8_t r, uint8_t g, uint8_t b);
    size_t pixels() const { return width * height; }
    uint8_t* px(size_t y, size_t x) { return rgb.data() + 3 * (y * width + x); }
    const uint8_t* px(size_t y, size_t x) const { return rgb.data() + 3 * (y * width + x); }
    bool is_background(size_t y, size_t x) const { return mask[y * width + x] != 0; }
};

// Pixels scaled to [0,1] as an [H,W,3] tensor.
Tensor image_to_real(const ViewImage& img);
// Rounds [0,1] reals back to bytes; mask cleared.
ViewImage real_to_image(const Tensor& t);

// Minimal PNG support: 8-bit RGB, non-interlaced, zlib-backed.
void write_png(const std::string& path, const ViewImage& img);
ViewImage read_png(const std::string& path);  // mask comes back all-zero

// Sibling mask format: one bit per pixel, row-major, MSB first.
void write_mask(const std::string& path, const ViewImage& img);
void read_mask(const std::string& path, ViewImage& img);

}  // namespace pcqd
