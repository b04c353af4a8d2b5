#include "pcqd/mlp.hpp"

#include <cmath>

#include "pcqd/common.hpp"

namespace pcqd {

void MlpSpec::validate() const {
    if (widths.size() < 2) throw Error("mlp: need at least input and output widths");
    for (size_t w : widths)
        if (w == 0) throw Error("mlp: zero layer width");
}

void mlp_init(const MlpSpec& spec, ParameterSet& ps, const std::string& prefix, Rng& rng) {
    spec.validate();
    size_t layers = spec.widths.size() - 1;
    for (size_t k = 0; k < layers; ++k) {
        size_t in = spec.widths[k], out = spec.widths[k + 1];
        bool last = k + 1 == layers;
        double std_dev = std::sqrt((last ? 1.0 : 2.0) / static_cast<double>(in));
        Tensor w = Tensor::zeros({in, out});
        for (double& v : w.data) v = std_dev * rng.normal();
        ps.add(prefix + std::to_string(k) + ".w", std::move(w));
        ps.add(prefix + std::to_string(k) + ".b", Tensor::zeros({out}));
    }
}

Var mlp_forward(Tape& tape, const MlpSpec& spec, ParameterSet& ps, const std::string& prefix,
                Var input, bool trainable) {
    spec.validate();
    const Tensor& in = tape.value(input);
    if (in.rank() != 2 || in.cols() != spec.in_dim())
        throw Error("mlp_forward: input shape " + shape_str(in.shape) + " does not match in_dim " +
                    std::to_string(spec.in_dim()));
    size_t layers = spec.widths.size() - 1;
    Var h = input;
    for (size_t k = 0; k < layers; ++k) {
        std::string base = prefix + std::to_string(k);
        Var w = trainable ? tape.param(ps, base + ".w") : tape.frozen(ps, base + ".w");
        Var b = trainable ? tape.param(ps, base + ".b") : tape.frozen(ps, base + ".b");
        h = tape.add_rows(tape.matmul(h, w), b);
        if (k + 1 < layers)
            h = spec.hidden_act == Activation::Relu ? tape.relu(h) : tape.gelu(h);
    }
    return h;
}

}  // namespace pcqd
