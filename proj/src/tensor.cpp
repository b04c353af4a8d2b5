#include "pcqd/tensor.hpp"

#include <cmath>
#include <sstream>

#include "pcqd/common.hpp"

namespace pcqd {

size_t shape_numel(const std::vector<size_t>& s) {
    size_t n = 1;
    for (size_t d : s) n *= d;
    return n;
}

std::string shape_str(const std::vector<size_t>& s) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << "]";
    return os.str();
}

Tensor::Tensor(std::vector<size_t> s, std::vector<double> d)
    : shape(std::move(s)), data(std::move(d)) {
    if (shape_numel(shape) != data.size())
        throw Error("tensor: shape " + shape_str(shape) + " does not match " +
                    std::to_string(data.size()) + " values");
}

Tensor Tensor::zeros(std::vector<size_t> s) {
    size_t n = shape_numel(s);
    return Tensor(std::move(s), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(std::vector<size_t> s, double v) {
    size_t n = shape_numel(s);
    return Tensor(std::move(s), std::vector<double>(n, v));
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::vec(std::vector<double> d) {
    size_t n = d.size();
    return Tensor({n}, std::move(d));
}

size_t Tensor::rows() const {
    if (rank() != 2) throw Error("tensor: rows() on rank-" + std::to_string(rank()));
    return shape[0];
}

size_t Tensor::cols() const {
    if (rank() != 2) throw Error("tensor: cols() on rank-" + std::to_string(rank()));
    return shape[1];
}

double& Tensor::at(size_t i, size_t j) { return data[i * cols() + j]; }
double Tensor::at(size_t i, size_t j) const { return data[i * cols() + j]; }

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

void ensure_finite(const Tensor& t, const char* where) {
    if (!t.all_finite())
        throw NumericError(std::string("non-finite value in ") + where);
}

}  // namespace pcqd
