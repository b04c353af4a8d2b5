#pragma once

#include <string>
#include <vector>

#include "pcqd/autodiff.hpp"
#include "pcqd/params.hpp"
#include "pcqd/rng.hpp"

namespace pcqd {

enum class Activation { Relu, Gelu };

// Feed-forward stack: widths[0] inputs through hidden layers to widths.back()
// outputs. Hidden layers use `hidden_act`; the output layer is linear.
struct MlpSpec {
    std::vector<size_t> widths;
    Activation hidden_act = Activation::Relu;

    void validate() const;
    size_t in_dim() const { return widths.front(); }
    size_t out_dim() const { return widths.back(); }
};

// Registers layer weights/biases under `prefix` (layer k: "<prefix>k.w",
// "<prefix>k.b"). Weights ~ N(0, 2/fan_in) for hidden, N(0, 1/fan_in) for the
// output layer; biases zero.
void mlp_init(const MlpSpec& spec, ParameterSet& ps, const std::string& prefix, Rng& rng);

// Forward on a [B, in] batch; records the graph. `trainable` false treats the
// weights as constants (no gradient reaches them).
Var mlp_forward(Tape& tape, const MlpSpec& spec, ParameterSet& ps, const std::string& prefix,
                Var input, bool trainable = true);

}  // namespace pcqd
