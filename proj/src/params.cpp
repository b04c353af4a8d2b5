#include "pcqd/params.hpp"

#include <cstring>
#include <fstream>

#include "pcqd/common.hpp"

namespace pcqd {

namespace {

constexpr char kMagic[4] = {'D', 'Q', 'L', '1'};

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

bool get_u32(std::istream& is, uint32_t& v) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) return false;
    v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return true;
}

bool get_u64(std::istream& is, uint64_t& v) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) return false;
    v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return true;
}

}  // namespace

Tensor& ParameterSet::add(const std::string& name, Tensor value) {
    if (values_.count(name)) throw Error("parameter already registered: " + name);
    grads_.emplace(name, Tensor::zeros(value.shape));
    auto [it, ok] = values_.emplace(name, std::move(value));
    (void)ok;
    return it->second;
}

Tensor& ParameterSet::value(const std::string& name) {
    auto it = values_.find(name);
    if (it == values_.end()) throw Error("unknown parameter: " + name);
    return it->second;
}

const Tensor& ParameterSet::value(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) throw Error("unknown parameter: " + name);
    return it->second;
}

Tensor& ParameterSet::grad(const std::string& name) {
    auto it = grads_.find(name);
    if (it == grads_.end()) throw Error("unknown parameter: " + name);
    return it->second;
}

const Tensor& ParameterSet::grad(const std::string& name) const {
    auto it = grads_.find(name);
    if (it == grads_.end()) throw Error("unknown parameter: " + name);
    return it->second;
}

void ParameterSet::zero_grads() {
    for (auto& [name, g] : grads_) std::fill(g.data.begin(), g.data.end(), 0.0);
}

std::vector<std::string> ParameterSet::names() const {
    std::vector<std::string> out;
    out.reserve(values_.size());
    for (const auto& [name, v] : values_) out.push_back(name);
    return out;
}

uint64_t ParameterSet::checksum() const {
    uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const void* p, size_t n) {
        const unsigned char* b = static_cast<const unsigned char*>(p);
        for (size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& [name, v] : values_) {
        mix(name.data(), name.size());
        mix(v.data.data(), v.data.size() * sizeof(double));
    }
    return h;
}

ParameterSet ParameterSet::subset(const std::string& prefix) const {
    ParameterSet out;
    for (const auto& [name, v] : values_)
        if (name.rfind(prefix, 0) == 0) out.add(name.substr(prefix.size()), v);
    return out;
}

void ParameterSet::merge(const ParameterSet& other, const std::string& prefix) {
    for (const auto& [name, v] : other.values_) add(prefix + name, v);
}

void save_checkpoint(const std::string& path, const ParameterSet& ps) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open checkpoint for writing: " + path);
    os.write(kMagic, 4);
    for (const auto& [name, v] : ps.values()) {
        put_u32(os, static_cast<uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(os, static_cast<uint32_t>(v.rank()));
        for (size_t d : v.shape) put_u64(os, d);
        for (double x : v.data) {
            uint64_t bits;
            std::memcpy(&bits, &x, 8);
            put_u64(os, bits);
        }
    }
    if (!os) throw IoError("checkpoint write failed: " + path);
}

ParameterSet load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + path);
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("bad checkpoint magic in " + path);
    ParameterSet ps;
    while (true) {
        uint32_t name_len;
        if (!get_u32(is, name_len)) break;  // clean EOF
        std::string name(name_len, '\0');
        if (!is.read(name.data(), name_len)) throw IoError("truncated checkpoint: " + path);
        uint32_t rank;
        if (!get_u32(is, rank)) throw IoError("truncated checkpoint: " + path);
        if (rank > 8) throw IoError("implausible tensor rank in checkpoint: " + path);
        std::vector<size_t> shape(rank);
        for (uint32_t i = 0; i < rank; ++i) {
            uint64_t d;
            if (!get_u64(is, d)) throw IoError("truncated checkpoint: " + path);
            shape[i] = static_cast<size_t>(d);
        }
        size_t n = shape_numel(shape);
        std::vector<double> data(n);
        for (size_t i = 0; i < n; ++i) {
            uint64_t bits;
            if (!get_u64(is, bits)) throw IoError("truncated checkpoint: " + path);
            std::memcpy(&data[i], &bits, 8);
        }
        ps.add(name, Tensor(std::move(shape), std::move(data)));
    }
    return ps;
}

}  // namespace pcqd
