#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "pcqd/params.hpp"

namespace pcqd {

// Adam with classic L2 regularization folded into the gradient (g + wd * w).
struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
    uint64_t step = 0;

    std::map<std::string, Tensor> m;
    std::map<std::string, Tensor> v;
};

// One update over every parameter in `ps` using its accumulated gradients.
// Moments are lazily created; the step counter increments once per call.
void adam_step(ParameterSet& ps, AdamState& state);

// Serialize optimizer moments into `out` under `prefix` (for resumable runs).
void adam_state_save(const AdamState& state, ParameterSet& out, const std::string& prefix);
AdamState adam_state_load(const ParameterSet& in, const std::string& prefix);

}  // namespace pcqd
