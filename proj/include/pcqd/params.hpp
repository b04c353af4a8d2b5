#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pcqd/tensor.hpp"

namespace pcqd {

// Named trainable tensors plus their gradient accumulators. Iteration order
// is the lexicographic name order of std::map, which keeps optimizer updates
// and checkpoints deterministic.
class ParameterSet {
public:
    Tensor& add(const std::string& name, Tensor value);

    bool has(const std::string& name) const { return values_.count(name) != 0; }
    Tensor& value(const std::string& name);
    const Tensor& value(const std::string& name) const;
    Tensor& grad(const std::string& name);
    const Tensor& grad(const std::string& name) const;

    void zero_grads();
    size_t size() const { return values_.size(); }
    std::vector<std::string> names() const;

    const std::map<std::string, Tensor>& values() const { return values_; }

    // FNV-1a over names and raw value bytes; order-stable.
    uint64_t checksum() const;

    // Copies entries whose names start with `prefix`, stripping it.
    ParameterSet subset(const std::string& prefix) const;
    // Merges `other` in, prepending `prefix` to each name.
    void merge(const ParameterSet& other, const std::string& prefix);

private:
    std::map<std::string, Tensor> values_;
    std::map<std::string, Tensor> grads_;
};

// Flat binary checkpoint: magic "DQL1", then per parameter
// u32 name length, name bytes, u32 rank, u64 dims, f64 little-endian values.
void save_checkpoint(const std::string& path, const ParameterSet& ps);
ParameterSet load_checkpoint(const std::string& path);

}  // namespace pcqd
