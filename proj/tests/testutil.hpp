#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "pcqd/params.hpp"

namespace testutil {

// Central finite differences of `loss_of(params)` against the analytic
// gradient for up to `max_coords` coordinates of each parameter. Returns the
// worst relative error observed. `loss_and_grad` must populate gradients.
inline double max_grad_rel_error(pcqd::ParameterSet& ps,
                                 const std::function<double()>& loss_value,
                                 const std::function<void()>& loss_and_grad,
                                 size_t max_coords_per_param = 16, double h = 1e-5) {
    ps.zero_grads();
    loss_and_grad();
    double worst = 0.0;
    for (const std::string& name : ps.names()) {
        pcqd::Tensor& w = ps.value(name);
        const pcqd::Tensor analytic = ps.grad(name);
        size_t n = w.numel();
        size_t step = n <= max_coords_per_param ? 1 : n / max_coords_per_param;
        for (size_t i = 0; i < n; i += step) {
            double keep = w.data[i];
            w.data[i] = keep + h;
            double up = loss_value();
            w.data[i] = keep - h;
            double down = loss_value();
            w.data[i] = keep;
            double fd = (up - down) / (2.0 * h);
            double denom = std::max({std::fabs(fd), std::fabs(analytic.data[i]), 1e-6});
            double rel = std::fabs(fd - analytic.data[i]) / denom;
            if (rel > worst) worst = rel;
        }
    }
    return worst;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("pcqd_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string str() const { return path_.string(); }
    std::filesystem::path path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace testutil
