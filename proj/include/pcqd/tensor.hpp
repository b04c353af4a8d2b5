#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pcqd {

// Dense 64-bit tensor, row-major. Shapes are immutable after construction;
// data is plain storage with no view aliasing.
struct Tensor {
    std::vector<size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<size_t> s, std::vector<double> d);

    static Tensor zeros(std::vector<size_t> s);
    static Tensor full(std::vector<size_t> s, double v);
    static Tensor scalar(double v);
    static Tensor vec(std::vector<double> d);

    size_t numel() const { return data.size(); }
    size_t rank() const { return shape.size(); }

    // 2-D accessors; throw on rank mismatch.
    size_t rows() const;
    size_t cols() const;
    double& at(size_t i, size_t j);
    double at(size_t i, size_t j) const;

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    bool all_finite() const;
};

size_t shape_numel(const std::vector<size_t>& s);
std::string shape_str(const std::vector<size_t>& s);

// Throws NumericError naming `where` if any element is NaN/Inf.
void ensure_finite(const Tensor& t, const char* where);

}  // namespace pcqd
