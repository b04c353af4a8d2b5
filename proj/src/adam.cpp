#include "pcqd/adam.hpp"

#include <cmath>

#include "pcqd/common.hpp"

namespace pcqd {

void adam_step(ParameterSet& ps, AdamState& state) {
    state.step += 1;
    double t = static_cast<double>(state.step);
    double bc1 = 1.0 - std::pow(state.beta1, t);
    double bc2 = 1.0 - std::pow(state.beta2, t);
    for (const std::string& name : ps.names()) {
        Tensor& w = ps.value(name);
        const Tensor& g = ps.grad(name);
        auto mi = state.m.find(name);
        if (mi == state.m.end()) {
            mi = state.m.emplace(name, Tensor::zeros(w.shape)).first;
            state.v.emplace(name, Tensor::zeros(w.shape));
        }
        Tensor& m = mi->second;
        Tensor& v = state.v.at(name);
        for (size_t i = 0; i < w.data.size(); ++i) {
            double grad = g.data[i] + state.weight_decay * w.data[i];
            m.data[i] = state.beta1 * m.data[i] + (1.0 - state.beta1) * grad;
            v.data[i] = state.beta2 * v.data[i] + (1.0 - state.beta2) * grad * grad;
            double mhat = m.data[i] / bc1;
            double vhat = v.data[i] / bc2;
            w.data[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
        ensure_finite(w, "adam_step");
    }
}

void adam_state_save(const AdamState& state, ParameterSet& out, const std::string& prefix) {
    out.add(prefix + "step", Tensor::scalar(static_cast<double>(state.step)));
    for (const auto& [name, t] : state.m) out.add(prefix + "m/" + name, t);
    for (const auto& [name, t] : state.v) out.add(prefix + "v/" + name, t);
}

AdamState adam_state_load(const ParameterSet& in, const std::string& prefix) {
    AdamState st;
    if (!in.has(prefix + "step")) throw Error("optimizer state missing: " + prefix + "step");
    st.step = static_cast<uint64_t>(in.value(prefix + "step").data[0]);
    ParameterSet ms = in.subset(prefix + "m/");
    ParameterSet vs = in.subset(prefix + "v/");
    for (const std::string& n : ms.names()) st.m.emplace(n, ms.value(n));
    for (const std::string& n : vs.names()) st.v.emplace(n, vs.value(n));
    return st;
}

}  // namespace pcqd
