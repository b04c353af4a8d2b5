#include "pcqd/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pcqd/common.hpp"
#include "pcqd/ply.hpp"
#include "pcqd/rng.hpp"

namespace pcqd {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

uint8_t gradient_byte(double v) {  // v in [-1.5, 1.5] roughly
    double c = 127.5 * (1.0 + std::clamp(v, -1.0, 1.0));
    return static_cast<uint8_t>(std::lround(std::clamp(c, 0.0, 255.0)));
}

void color_by_position(PointCloud& pc) {
    pc.colors.resize(pc.size());
    for (size_t i = 0; i < pc.size(); ++i) {
        const auto& p = pc.positions[i];
        pc.colors[i] = {gradient_byte(p[0]), gradient_byte(p[1]), gradient_byte(p[2])};
    }
}

PointCloud shape_sphere(size_t n, double radius, Rng&) {
    PointCloud pc;
    pc.positions.resize(n);
    // Fibonacci spiral: even coverage without randomness.
    double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    for (size_t i = 0; i < n; ++i) {
        double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = kTwoPi * static_cast<double>(i) / golden;
        pc.positions[i] = {radius * r * std::cos(phi), radius * r * std::sin(phi), radius * z};
    }
    return pc;
}

PointCloud shape_cube(size_t n, double half, Rng& rng) {
    PointCloud pc;
    pc.positions.resize(n);
    for (size_t i = 0; i < n; ++i) {
        uint64_t face = rng.below(6);
        double u = rng.uniform_in(-half, half);
        double v = rng.uniform_in(-half, half);
        double s = (face % 2 == 0) ? half : -half;
        switch (face / 2) {
            case 0: pc.positions[i] = {s, u, v}; break;
            case 1: pc.positions[i] = {u, s, v}; break;
            default: pc.positions[i] = {u, v, s}; break;
        }
    }
    return pc;
}

PointCloud shape_torus(size_t n, double tube, Rng& rng) {
    PointCloud pc;
    pc.positions.resize(n);
    double ring = 0.7;
    for (size_t i = 0; i < n; ++i) {
        double a = rng.uniform_in(0.0, kTwoPi);
        double b = rng.uniform_in(0.0, kTwoPi);
        double w = ring + tube * std::cos(b);
        pc.positions[i] = {w * std::cos(a), w * std::sin(a), tube * std::sin(b)};
    }
    return pc;
}

PointCloud shape_blob(size_t n, double spread, Rng& rng) {
    PointCloud pc;
    pc.positions.resize(n);
    std::array<std::array<double, 3>, 4> centers;
    for (auto& c : centers)
        c = {rng.uniform_in(-0.6, 0.6), rng.uniform_in(-0.6, 0.6), rng.uniform_in(-0.6, 0.6)};
    for (size_t i = 0; i < n; ++i) {
        const auto& c = centers[rng.below(4)];
        pc.positions[i] = {c[0] + spread * rng.normal(), c[1] + spread * rng.normal(),
                           c[2] + spread * rng.normal()};
    }
    return pc;
}

}  // namespace

const char* distortion_name(DistortionType t) {
    switch (t) {
        case DistortionType::PositionNoise: return "pos_noise";
        case DistortionType::ColorNoise: return "color_noise";
        case DistortionType::Downsample: return "downsample";
    }
    return "unknown";
}

DistortionType distortion_from_name(const std::string& s) {
    if (s == "pos_noise") return DistortionType::PositionNoise;
    if (s == "color_noise") return DistortionType::ColorNoise;
    if (s == "downsample") return DistortionType::Downsample;
    throw Error("unknown distortion type: " + s);
}

PointCloud make_shape(const std::string& name, size_t points, uint64_t seed) {
    if (points < 16) throw Error("make_shape: too few points");
    std::string family;
    for (char c : name)
        if (!std::isdigit(static_cast<unsigned char>(c))) family += c;
    uint64_t variant = hash_str(name);
    Rng rng(mix_seed({seed, variant}));
    double scale = 0.85 + 0.3 * (static_cast<double>(variant % 7) / 6.0);
    PointCloud pc;
    if (family == "sphere") pc = shape_sphere(points, scale, rng);
    else if (family == "cube") pc = shape_cube(points, 0.7 * scale, rng);
    else if (family == "torus") pc = shape_torus(points, 0.22 * scale, rng);
    else if (family == "blob") pc = shape_blob(points, 0.18 * scale, rng);
    else throw Error("make_shape: unknown shape family in '" + name + "'");
    color_by_position(pc);
    return pc;
}

double pseudo_mos(DistortionType type, int level) {
    if (level < 1 || level > 7) throw Error("pseudo_mos: level must be in [1,7]");
    double w = 1.0;
    switch (type) {
        case DistortionType::PositionNoise: w = 0.8; break;
        case DistortionType::ColorNoise: w = 1.0; break;
        case DistortionType::Downsample: w = 0.9; break;
    }
    return 5.0 - 4.0 * (static_cast<double>(level) / 7.0) * w;
}

PointCloud distort(const PointCloud& reference, DistortionType type, int level, uint64_t seed) {
    reference.validate();
    if (level < 1 || level > 7) throw Error("distort: level must be in [1,7]");
    Rng rng(mix_seed({seed, static_cast<uint64_t>(type), static_cast<uint64_t>(level)}));
    PointCloud out = reference;
    switch (type) {
        case DistortionType::PositionNoise: {
            double sigma = 0.012 * level;
            for (auto& p : out.positions)
                for (int k = 0; k < 3; ++k) p[k] += sigma * rng.normal();
            break;
        }
        case DistortionType::ColorNoise: {
            if (!out.has_colors()) throw Error("distort: color noise needs colors");
            double amp = 9.0 * level;
            for (auto& c : out.colors)
                for (int k = 0; k < 3; ++k) {
                    double v = c[k] + rng.uniform_in(-amp, amp);
                    c[k] = static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
                }
            break;
        }
        case DistortionType::Downsample: {
            double keep = 1.0 - 0.12 * level;
            size_t keep_n = static_cast<size_t>(
                std::llround(keep * static_cast<double>(reference.size())));
            if (keep_n < 2) keep_n = 2;
            std::vector<size_t> idx = rng.sample_without_replacement(reference.size(), keep_n);
            std::sort(idx.begin(), idx.end());
            PointCloud down;
            down.positions.reserve(keep_n);
            if (reference.has_colors()) down.colors.reserve(keep_n);
            for (size_t i : idx) {
                down.positions.push_back(reference.positions[i]);
                if (reference.has_colors()) down.colors.push_back(reference.colors[i]);
            }
            out = std::move(down);
            break;
        }
    }
    return out;
}

std::vector<CorpusRecord> synthesize_corpus(const CorpusConfig& config, uint64_t seed) {
    if (config.contents.size() < 2)
        throw Error("synthesize_corpus: need at least two content shapes");
    if (config.types.empty()) throw Error("synthesize_corpus: no distortion types");
    if (config.max_level < 1 || config.max_level > 7)
        throw Error("synthesize_corpus: levels run 1..7");
    std::filesystem::create_directories(config.out_dir);
    std::vector<CorpusRecord> records;
    for (const std::string& content : config.contents) {
        PointCloud ref = make_shape(content, config.points, mix_seed({seed, hash_str(content)}));
        write_ply_file(std::filesystem::path(config.out_dir) / reference_filename(content), ref);
        for (DistortionType type : config.types) {
            for (int level = 1; level <= config.max_level; ++level) {
                uint64_t dseed = mix_seed({seed, hash_str(content), hash_str("distort"),
                                           static_cast<uint64_t>(type),
                                           static_cast<uint64_t>(level)});
                PointCloud distorted = distort(ref, type, level, dseed);
                std::string fname = content + "_" + distortion_name(type) + "_l" +
                                    std::to_string(level) + ".ply";
                write_ply_file(std::filesystem::path(config.out_dir) / fname, distorted);
                records.push_back({fname, content, distortion_name(type), level,
                                   pseudo_mos(type, level)});
            }
        }
    }
    write_manifest((std::filesystem::path(config.out_dir) / "manifest.csv").string(), records);
    return records;
}

void write_manifest(const std::string& path, const std::vector<CorpusRecord>& records) {
    std::ofstream os(path, std::ios::binary);  // binary keeps LF endings everywhere
    if (!os) throw IoError("cannot write manifest: " + path);
    os << "path,content_id,distortion_type,level,mos\n";
    for (const CorpusRecord& r : records) {
        std::ostringstream mos;
        mos.precision(10);
        mos << r.mos;
        os << r.path << ',' << r.content_id << ',' << r.distortion_type << ',' << r.level << ','
           << mos.str() << '\n';
    }
    if (!os) throw IoError("manifest write failed: " + path);
}

std::vector<CorpusRecord> read_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open manifest: " + path);
    std::string line;
    if (!std::getline(is, line)) throw IoError("manifest is empty: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "path,content_id,distortion_type,level,mos")
        throw IoError("manifest header mismatch in " + path);
    std::vector<CorpusRecord> out;
    size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 5)
            throw IoError("manifest row " + std::to_string(lineno) + " malformed in " + path);
        CorpusRecord r;
        r.path = cells[0];
        r.content_id = cells[1];
        r.distortion_type = cells[2];
        try {
            r.level = std::stoi(cells[3]);
            r.mos = std::stod(cells[4]);
        } catch (const std::exception&) {
            throw IoError("manifest row " + std::to_string(lineno) + " has bad numbers");
        }
        out.push_back(std::move(r));
    }
    if (out.empty()) throw IoError("manifest has no records: " + path);
    return out;
}

std::string reference_filename(const std::string& content_id) {
    return "ref_" + content_id + ".ply";
}

}  // namespace pcqd
