#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcqd/pointcloud.hpp"

namespace pcqd {

enum class DistortionType { PositionNoise, ColorNoise, Downsample };

const char* distortion_name(DistortionType t);
DistortionType distortion_from_name(const std::string& s);

struct CorpusRecord {
    std::string path;  // relative to the manifest directory
    std::string content_id;
    std::string distortion_type;
    int level = 1;  // 1..7
    double mos = 0.0;
};

struct CorpusConfig {
    std::vector<std::string> contents;  // procedural shape names, e.g. "sphere0"
    std::vector<DistortionType> types = {DistortionType::PositionNoise,
                                         DistortionType::ColorNoise,
                                         DistortionType::Downsample};
    int max_level = 7;
    size_t points = 4096;
    std::string out_dir;
};

// Procedural content: name prefix picks the family (sphere, cube, torus,
// blob); trailing digits select a variant. Colors are smooth position-driven
// gradients so color distortions are observable.
PointCloud make_shape(const std::string& name, size_t points, uint64_t seed);

PointCloud distort(const PointCloud& reference, DistortionType type, int level, uint64_t seed);

// Synthetic monotone label: 5 - 4 * (level/7) * w_type with w in
// {0.8, 1.0, 0.9} for position noise, color noise, downsampling.
double pseudo_mos(DistortionType type, int level);

// Writes reference and distorted PLY files plus manifest.csv into
// config.out_dir. Deterministic per (config, seed) byte-for-byte.
std::vector<CorpusRecord> synthesize_corpus(const CorpusConfig& config, uint64_t seed);

void write_manifest(const std::string& path, const std::vector<CorpusRecord>& records);
std::vector<CorpusRecord> read_manifest(const std::string& path);

// Reference clouds live next to the manifest as ref_<content>.ply.
std::string reference_filename(const std::string& content_id);

}  // namespace pcqd
