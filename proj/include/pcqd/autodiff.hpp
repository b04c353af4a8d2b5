#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pcqd/params.hpp"
#include "pcqd/tensor.hpp"

namespace pcqd {

struct Var {
    int id = -1;
};

// Reverse-mode tape over tensor ops. A tape is built per forward pass and
// consumed by a single backward() call; parameter gradients accumulate into
// the owning ParameterSet. Every op validates shapes and rejects non-finite
// outputs.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Leaves.
    Var input(Tensor v);                                      // constant
    Var param(ParameterSet& ps, const std::string& name);     // trainable
    Var frozen(const ParameterSet& ps, const std::string& name);  // constant copy

    // Elementwise / structural ops.
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var scale(Var a, double c);
    Var add_rows(Var m, Var v);  // broadcast 1-D v over rows of 2-D m
    Var relu(Var a);
    Var gelu(Var a);
    Var exp(Var a);
    Var clamp(Var a, double lo, double hi);
    Var reshape(Var a, std::vector<size_t> shape);

    // Linear algebra / reductions.
    Var matmul(Var a, Var b);
    Var sum(Var a);        // -> scalar
    Var mean(Var a);       // -> scalar
    Var mean_rows(Var m);  // [N,E] -> [E]

    // Row plumbing.
    Var gather_rows(Var m, std::vector<size_t> idx);
    Var scatter_rows(Var m, std::vector<size_t> idx, size_t n_rows);
    Var repeat_row(Var v, size_t n);
    Var concat(Var a, Var b);  // 1-D
    Var stack_rows(const std::vector<Var>& rows);

    // Diagonal-Gaussian log density per row: mu, logvar, y all [N,D] -> [N].
    Var gaussian_row_loglik(Var mu, Var logvar, Var y);
    // Sample-pair log-ratio estimate over all (i,j) pairs -> scalar.
    Var club_pairwise(Var mu, Var logvar, Var y);
    // Pairwise margin ranking loss of predictions against fixed targets.
    Var rank_loss(Var pred, const std::vector<double>& target);

    const Tensor& value(Var v) const;
    const Tensor& grad(Var v) const;  // valid after backward()

    // Seeds d(loss)/d(loss)=1 and sweeps the tape in reverse; loss must be
    // scalar. Accumulates into ParameterSet gradients. One call per tape.
    void backward(Var loss);

    size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::vector<int> parents;
        std::function<void(Tape&, int)> back;  // empty for leaves
        ParameterSet* ps = nullptr;
        std::string pname;
    };

    Var push(Tensor value, std::vector<int> parents, std::function<void(Tape&, int)> back,
             const char* opname);
    Node& node(Var v);
    const Node& node(Var v) const;
    Tensor& grad_buf(int id);

    std::vector<Node> nodes_;
    bool consumed_ = false;
};

}  // namespace pcqd
