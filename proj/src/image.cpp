#include "pcqd/image.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include "pcqd/common.hpp"

namespace pcqd {

namespace {

const uint8_t kPngSig[8] = {137, 80, 78, 71, 13, 10, 26, 10};

void put_be32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

uint32_t get_be32(const uint8_t* p) {
    return (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
           (static_cast<uint32_t>(p[2]) << 8) | static_cast<uint32_t>(p[3]);
}

void append_chunk(std::vector<uint8_t>& out, const char type[4],
                  const std::vector<uint8_t>& data) {
    put_be32(out, static_cast<uint32_t>(data.size()));
    size_t type_at = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    uLong crc = crc32(0L, out.data() + type_at, static_cast<uInt>(4 + data.size()));
    put_be32(out, static_cast<uint32_t>(crc));
}

uint8_t paeth(int a, int b, int c) {
    int p = a + b - c;
    int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return static_cast<uint8_t>(a);
    if (pb <= pc) return static_cast<uint8_t>(b);
    return static_cast<uint8_t>(c);
}

}  // namespace

ViewImage ViewImage::background(size_t w, size_t h, uint8_t r, uint8_t g, uint8_t b) {
    ViewImage img;
    img.width = w;
    img.height = h;
    img.rgb.resize(3 * w * h);
    img.mask.assign(w * h, 1);
    for (size_t i = 0; i < w * h; ++i) {
        img.rgb[3 * i] = r;
        img.rgb[3 * i + 1] = g;
        img.rgb[3 * i + 2] = b;
    }
    return img;
}

Tensor image_to_real(const ViewImage& img) {
    Tensor t = Tensor::zeros({img.height, img.width, 3});
    for (size_t i = 0; i < img.rgb.size(); ++i) t.data[i] = img.rgb[i] / 255.0;
    return t;
}

ViewImage real_to_image(const Tensor& t) {
    if (t.rank() != 3 || t.shape[2] != 3) throw Error("real_to_image: need [H,W,3]");
    ViewImage img;
    img.height = t.shape[0];
    img.width = t.shape[1];
    img.rgb.resize(t.numel());
    img.mask.assign(img.pixels(), 0);
    for (size_t i = 0; i < t.numel(); ++i) {
        double v = std::clamp(t.data[i], 0.0, 1.0) * 255.0;
        img.rgb[i] = static_cast<uint8_t>(std::lround(v));
    }
    return img;
}

void write_png(const std::string& path, const ViewImage& img) {
    if (img.width == 0 || img.height == 0 || img.rgb.size() != 3 * img.pixels())
        throw Error("write_png: malformed image");
    size_t stride = 3 * img.width;
    std::vector<uint8_t> raw((stride + 1) * img.height);
    for (size_t y = 0; y < img.height; ++y) {
        raw[y * (stride + 1)] = 0;  // filter: none
        std::memcpy(raw.data() + y * (stride + 1) + 1, img.rgb.data() + y * stride, stride);
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<uint8_t> compressed(bound);
    if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw IoError("write_png: zlib compression failed");
    compressed.resize(bound);

    std::vector<uint8_t> out(kPngSig, kPngSig + 8);
    std::vector<uint8_t> ihdr;
    put_be32(ihdr, static_cast<uint32_t>(img.width));
    put_be32(ihdr, static_cast<uint32_t>(img.height));
    ihdr.push_back(8);   // bit depth
    ihdr.push_back(2);   // color type: RGB
    ihdr.push_back(0);   // compression
    ihdr.push_back(0);   // filter
    ihdr.push_back(0);   // interlace
    append_chunk(out, "IHDR", ihdr);
    append_chunk(out, "IDAT", compressed);
    append_chunk(out, "IEND", {});

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open png for writing: " + path);
    os.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!os) throw IoError("png write failed: " + path);
}

ViewImage read_png(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open png: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                               std::istreambuf_iterator<char>());
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kPngSig, 8) != 0)
        throw IoError("not a png file: " + path);
    size_t pos = 8;
    uint32_t width = 0, height = 0;
    std::vector<uint8_t> idat;
    bool saw_ihdr = false;
    while (pos + 8 <= bytes.size()) {
        uint32_t len = get_be32(bytes.data() + pos);
        if (pos + 12 + static_cast<size_t>(len) > bytes.size())
            throw IoError("truncated png chunk in " + path);
        std::string type(reinterpret_cast<const char*>(bytes.data() + pos + 4), 4);
        const uint8_t* data = bytes.data() + pos + 8;
        if (type == "IHDR") {
            if (len != 13) throw IoError("bad IHDR in " + path);
            width = get_be32(data);
            height = get_be32(data + 4);
            if (data[8] != 8 || data[9] != 2 || data[12] != 0)
                throw IoError("png subset supports 8-bit RGB non-interlaced only: " + path);
            saw_ihdr = true;
        } else if (type == "IDAT") {
            idat.insert(idat.end(), data, data + len);
        } else if (type == "IEND") {
            break;
        }
        pos += 12 + len;
    }
    if (!saw_ihdr || width == 0 || height == 0) throw IoError("png missing IHDR: " + path);
    size_t stride = 3 * static_cast<size_t>(width);
    std::vector<uint8_t> raw((stride + 1) * height);
    uLongf raw_len = static_cast<uLongf>(raw.size());
    if (uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
        raw_len != raw.size())
        throw IoError("png inflate failed: " + path);

    ViewImage img;
    img.width = width;
    img.height = height;
    img.rgb.resize(stride * height);
    img.mask.assign(img.pixels(), 0);
    std::vector<uint8_t> prev(stride, 0);
    for (size_t y = 0; y < height; ++y) {
        uint8_t filter = raw[y * (stride + 1)];
        const uint8_t* src = raw.data() + y * (stride + 1) + 1;
        uint8_t* dst = img.rgb.data() + y * stride;
        for (size_t i = 0; i < stride; ++i) {
            int a = i >= 3 ? dst[i - 3] : 0;
            int b = prev[i];
            int c = i >= 3 ? prev[i - 3] : 0;
            int v = src[i];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: v += paeth(a, b, c); break;
                default: throw IoError("png filter unsupported: " + path);
            }
            dst[i] = static_cast<uint8_t>(v & 0xFF);
        }
        std::memcpy(prev.data(), dst, stride);
    }
    return img;
}

void write_mask(const std::string& path, const ViewImage& img) {
    std::vector<uint8_t> packed((img.pixels() + 7) / 8, 0);
    for (size_t i = 0; i < img.pixels(); ++i)
        if (img.mask[i]) packed[i / 8] |= static_cast<uint8_t>(0x80u >> (i % 8));
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open mask for writing: " + path);
    os.write(reinterpret_cast<const char*>(packed.data()),
             static_cast<std::streamsize>(packed.size()));
    if (!os) throw IoError("mask write failed: " + path);
}

void read_mask(const std::string& path, ViewImage& img) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open mask: " + path);
    std::vector<uint8_t> packed((std::istreambuf_iterator<char>(is)),
                                std::istreambuf_iterator<char>());
    if (packed.size() != (img.pixels() + 7) / 8)
        throw IoError("mask size does not match image: " + path);
    img.mask.assign(img.pixels(), 0);
    for (size_t i = 0; i < img.pixels(); ++i)
        img.mask[i] = (packed[i / 8] >> (7 - i % 8)) & 1u;
}

}  // namespace pcqd
