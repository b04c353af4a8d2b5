#include "pcqd/autodiff.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "pcqd/common.hpp"

namespace pcqd {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kLog2Pi = 1.8378770664093454836;

CMapMat as_mat(const Tensor& t) {
    return CMapMat(t.data.data(), static_cast<Eigen::Index>(t.rows()),
                   static_cast<Eigen::Index>(t.cols()));
}

MapMat as_mat(Tensor& t) {
    return MapMat(t.data.data(), static_cast<Eigen::Index>(t.rows()),
                  static_cast<Eigen::Index>(t.cols()));
}

}  // namespace

Tape::Node& Tape::node(Var v) {
    if (v.id < 0 || static_cast<size_t>(v.id) >= nodes_.size()) throw Error("invalid tape var");
    return nodes_[static_cast<size_t>(v.id)];
}

const Tape::Node& Tape::node(Var v) const {
    if (v.id < 0 || static_cast<size_t>(v.id) >= nodes_.size()) throw Error("invalid tape var");
    return nodes_[static_cast<size_t>(v.id)];
}

Tensor& Tape::grad_buf(int id) { return nodes_[static_cast<size_t>(id)].grad; }

Var Tape::push(Tensor value, std::vector<int> parents, std::function<void(Tape&, int)> back,
               const char* opname) {
    ensure_finite(value, opname);
    Node n;
    n.value = std::move(value);
    n.parents = std::move(parents);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size() - 1)};
}

Var Tape::input(Tensor v) { return push(std::move(v), {}, nullptr, "input"); }

Var Tape::param(ParameterSet& ps, const std::string& name) {
    Var v = push(ps.value(name), {}, nullptr, "param");
    Node& n = nodes_.back();
    n.ps = &ps;
    n.pname = name;
    return v;
}

Var Tape::frozen(const ParameterSet& ps, const std::string& name) {
    return push(ps.value(name), {}, nullptr, "frozen");
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

const Tensor& Tape::grad(Var v) const {
    const Node& n = node(v);
    if (n.grad.numel() == 0) throw Error("gradient not populated; call backward() first");
    return n.grad;
}

Var Tape::add(Var a, Var b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    if (!ta.same_shape(tb))
        throw Error("add: shape mismatch " + shape_str(ta.shape) + " vs " + shape_str(tb.shape));
    Tensor out = ta;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += tb.data[i];
    return push(std::move(out), {a.id, b.id}, [](Tape& t, int self) {
        const Tensor& g = t.grad_buf(self);
        Node& n = t.nodes_[static_cast<size_t>(self)];
        Tensor& ga = t.grad_buf(n.parents[0]);
        Tensor& gb = t.grad_buf(n.parents[1]);
        for (size_t i = 0; i < g.data.size(); ++i) {
            ga.data[i] += g.data[i];
            gb.data[i] += g.data[i];
        }
    }, "add");
}

Var Tape::sub(Var a, Var b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    if (!ta.same_shape(tb))
        throw Error("sub: shape mismatch " + shape_str(ta.shape) + " vs " + shape_str(tb.shape));
    Tensor out = ta;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] -= tb.data[i];
    return push(std::move(out), {a.id, b.id}, [](Tape& t, int self) {
        const Tensor& g = t.grad_buf(self);
        Node& n = t.nodes_[static_cast<size_t>(self)];
        Tensor& ga = t.grad_buf(n.parents[0]);
        Tensor& gb = t.grad_buf(n.parents[1]);
        for (size_t i = 0; i < g.data.size(); ++i) {
            ga.data[i] += g.data[i];
            gb.data[i] -= g.data[i];
        }
    }, "sub");
}

Var Tape::mul(Var a, Var b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    if (!ta.same_shape(tb))
        throw Error("mul: shape mismatch " + shape_str(ta.shape) + " vs " + shape_str(tb.shape));
    Tensor out = ta;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= tb.data[i];
    return push(std::move(out), {a.id, b.id}, [](Tape& t, int self) {
        const Tensor& g = t.grad_buf(self);
        Node& n = t.nodes_[static_cast<size_t>(self)];
        const Tensor& va = t.nodes_[static_cast<size_t>(n.parents[0])].value;
        const Tensor& vb = t.nodes_[static_cast<size_t>(n.parents[1])].value;
        Tensor& ga = t.grad_buf(n.parents[0]);
        Tensor& gb = t.grad_buf(n.parents[1]);
        for (size_t i = 0; i < g.data.size(); ++i) {
            ga.data[i] += g.data[i] * vb.data[i];
            gb.data[i] += g.data[i] * va.data[i];
        }
    }, "mul");
}

Var Tape::scale(Var a, double c) {
    Tensor out = value(a);
    for (double& v : out.data) v *= c;
    return push(std::move(out), {a.id}, [c](Tape& t, int self) {
        const Tensor& g = t.grad_buf(self);
        Node& n = t.nodes_[static_cast<size_t>(self)];
        Tensor& ga = t.grad_buf(n.parents[0]);
        for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += c * g.data[i];
    }, "scale");
}

Var Tape::add_rows(Var m, Var v) {
    const Tensor& tm = value(m);
    const Tensor& tv = value(v);
    if (tm.rank() != 2 || tv.rank() != 1 || tm.cols() != tv.shape[0])
        throw Error("add_rows: need [N,E] and [E], got " + shape_str(tm.shape) + " and " +
                    shape_str(tv.shape));
    Tensor out = tm;
    size_t rows = tm.rows(), cols = tm.cols();
    for (size_t i = 0; i < rows; ++i)
        for (size_t j = 0; j < cols; ++j) out.data[i * cols + j] += tv.data[j];
    return push(std::move(out), {m.id, v.id}, [rows, cols](Tape& t, int self) {
        const Tensor& g = t.grad_buf(self);
        Node& n = t.nodes_[static_cast<size_t>(self)];
        Tensor& gm = t.grad_buf(n.parents[0]);
        Tensor& gv = t.grad_buf(n.parents[1]);
        for (size_t i = 0; i < rows; ++i)
            for (size_t j = 0; j < cols; ++j) {
                gm.data[i * cols + j] += g.data[i * cols + j];
                gv.data[j] += g.data[i * cols + j];
            }
    }, "add_rows");
}

Var Tape::relu(Var a) {
    Tensor out = value(a);
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    return push(std::move(out), {a.id}, [](Tape& t, int self) {
        const Tensor& g = t.grad_buf(self);
        Node& n = t.nodes_[static_cast<size_t>(self)];
        const Tensor& x = t.nodes_[static_cast<size_t>(n.parents[0])].value;
        Tensor& ga = t.grad_buf(n.parents[0]);
        for (size_t i = 0; i < g.data.size(); ++i)
            if (x.data[i] > 0.0) ga.data[i] += g.data[i];
    }, "relu");
}

Var Tape::gelu(Var a) {
    Tensor out = value(a);
    for (double& v : out.data) v = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
    return push(std::move(out), {a.id}, [](Tape& t, int self) {
        const Tensor& g = t.grad_buf(self);
        Node& n = t.nodes_[static_cast<size_t>(self)];
        const Tensor& x = t.nodes_[static_cast<size_t>(n.parents[0])].value;
        Tensor& ga = t.grad_buf(n.parents[0]);
        for (size_t i = 0; i < g.data.size(); ++i) {
            double v = x.data[i];
            double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
            double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
            ga.data[i] += g.data[i] * (cdf + v * pdf);
        }
    }, "gelu");
}

Var Tape::exp(Var a) {
    Tensor out = value(a);
    for (double& v : out.data) v = std::exp(v);
    return push(std::move(out), {a.id}, [](Tape& t, int self) {
        const Tensor& g = t.grad_buf(self);
        Node& n = t.nodes_[static_cast<size_t>(self)];
        const Tensor& y = n.value;
        Tensor& ga = t.grad_buf(n.parents[0]);
        for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i] * y.data[i];
    }, "exp");
}

Var Tape::clamp(Var a, double lo, double hi) {
    if (!(lo < hi)) throw Error("clamp: lo must be < hi");
    Tensor out = value(a);
    for (double& v : out.data) v = v < lo ? lo : (v > hi ? hi : v);
    return push(std::move(out), {a.id}, [lo, hi](Tape& t, int self) {
        const Tensor& g = t.grad_buf(self);
        Node& n = t.nodes_[static_cast<size_t>(self)];
        const Tensor& x = t.nodes_[static_cast<size_t>(n.parents[0])].value;
        Tensor& ga = t.grad_buf(n.parents[0]);
        for (size_t i = 0; i < g.data.size(); ++i)
            if (x.data[i] > lo && x.data[i] < hi) ga.data[i] += g.data[i];
    }, "clamp");
}

Var Tape::reshape(Var a, std::vector<size_t> shape) {
    const Tensor& ta = value(a);
    if (shape_numel(shape) != ta.numel())
        throw Error("reshape: element count mismatch " + shape_str(ta.shape) + " -> " +
                    shape_str(shape));
    Tensor out(std::move(shape), ta.data);
    return push(std::move(out), {a.id}, [](Tape& t, int self) {
        const Tensor& g = t.grad_buf(self);
        Node& n = t.nodes_[static_cast<size_t>(self)];
        Tensor& ga = t.grad_buf(n.parents[0]);
        for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
    }, "reshape");
}

Var Tape::matmul(Var a, Var b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    if (ta.rank() != 2 || tb.rank() != 2 || ta.cols() != tb.rows())
        throw Error("matmul: incompatible shapes " + shape_str(ta.shape) + " x " +
                    shape_str(tb.shape));
    Tensor out = Tensor::zeros({ta.rows(), tb.cols()});
    as_mat(out).noalias() = as_mat(ta) * as_mat(tb);
    return push(std::move(out), {a.id, b.id}, [](Tape& t, int self) {
        Node& n = t.nodes_[static_cast<size_t>(self)];
        const Tensor& g = n.grad;
        const Tensor& va = t.nodes_[static_cast<size_t>(n.parents[0])].value;
        const Tensor& vb = t.nodes_[static_cast<size_t>(n.parents[1])].value;
        Tensor& ga = t.grad_buf(n.parents[0]);
        Tensor& gb = t.grad_buf(n.parents[1]);
        as_mat(ga).noalias() += as_mat(g) * as_mat(vb).transpose();
        as_mat(gb).noalias() += as_mat(va).transpose() * as_mat(g);
    }, "matmul");
}

Var Tape::sum(Var a) {
    const Tensor& ta = value(a);
    double acc = 0.0;
    for (double v : ta.data) acc += v;
    return push(Tensor::scalar(acc), {a.id}, [](Tape& t, int self) {
        Node& n = t.nodes_[static_cast<size_t>(self)];
        double g = n.grad.data[0];
        Tensor& ga = t.grad_buf(n.parents[0]);
        for (double& v : ga.data) v += g;
    }, "sum");
}

Var Tape::mean(Var a) {
    const Tensor& ta = value(a);
    if (ta.numel() == 0) throw Error("mean: empty tensor");
    double acc = 0.0;
    for (double v : ta.data) acc += v;
    double inv = 1.0 / static_cast<double>(ta.numel());
    return push(Tensor::scalar(acc * inv), {a.id}, [inv](Tape& t, int self) {
        Node& n = t.nodes_[static_cast<size_t>(self)];
        double g = n.grad.data[0] * inv;
        Tensor& ga = t.grad_buf(n.parents[0]);
        for (double& v : ga.data) v += g;
    }, "mean");
}

Var Tape::mean_rows(Var m) {
    const Tensor& tm = value(m);
    if (tm.rank() != 2 || tm.rows() == 0) throw Error("mean_rows: need non-empty [N,E]");
    size_t rows = tm.rows(), cols = tm.cols();
    Tensor out = Tensor::zeros({cols});
    for (size_t i = 0; i < rows; ++i)
        for (size_t j = 0; j < cols; ++j) out.data[j] += tm.data[i * cols + j];
    double inv = 1.0 / static_cast<double>(rows);
    for (double& v : out.data) v *= inv;
    return push(std::move(out), {m.id}, [rows, cols, inv](Tape& t, int self) {
        Node& n = t.nodes_[static_cast<size_t>(self)];
        const Tensor& g = n.grad;
        Tensor& gm = t.grad_buf(n.parents[0]);
        for (size_t i = 0; i < rows; ++i)
            for (size_t j = 0; j < cols; ++j) gm.data[i * cols + j] += g.data[j] * inv;
    }, "mean_rows");
}

Var Tape::gather_rows(Var m, std::vector<size_t> idx) {
    const Tensor& tm = value(m);
    if (tm.rank() != 2) throw Error("gather_rows: need [N,E]");
    size_t cols = tm.cols();
    for (size_t i : idx)
        if (i >= tm.rows()) throw Error("gather_rows: index out of range");
    Tensor out = Tensor::zeros({idx.size(), cols});
    for (size_t r = 0; r < idx.size(); ++r)
        for (size_t j = 0; j < cols; ++j) out.data[r * cols + j] = tm.data[idx[r] * cols + j];
    return push(std::move(out), {m.id}, [idx = std::move(idx), cols](Tape& t, int self) {
        Node& n = t.nodes_[static_cast<size_t>(self)];
        const Tensor& g = n.grad;
        Tensor& gm = t.grad_buf(n.parents[0]);
        for (size_t r = 0; r < idx.size(); ++r)
            for (size_t j = 0; j < cols; ++j) gm.data[idx[r] * cols + j] += g.data[r * cols + j];
    }, "gather_rows");
}

Var Tape::scatter_rows(Var m, std::vector<size_t> idx, size_t n_rows) {
    const Tensor& tm = value(m);
    if (tm.rank() != 2 || tm.rows() != idx.size())
        throw Error("scatter_rows: row count must match index count");
    size_t cols = tm.cols();
    for (size_t i : idx)
        if (i >= n_rows) throw Error("scatter_rows: index out of range");
    Tensor out = Tensor::zeros({n_rows, cols});
    for (size_t r = 0; r < idx.size(); ++r)
        for (size_t j = 0; j < cols; ++j) out.data[idx[r] * cols + j] = tm.data[r * cols + j];
    return push(std::move(out), {m.id}, [idx = std::move(idx), cols](Tape& t, int self) {
        Node& n = t.nodes_[static_cast<size_t>(self)];
        const Tensor& g = n.grad;
        Tensor& gm = t.grad_buf(n.parents[0]);
        for (size_t r = 0; r < idx.size(); ++r)
            for (size_t j = 0; j < cols; ++j) gm.data[r * cols + j] += g.data[idx[r] * cols + j];
    }, "scatter_rows");
}

Var Tape::repeat_row(Var v, size_t n) {
    const Tensor& tv = value(v);
    if (tv.rank() != 1) throw Error("repeat_row: need 1-D input");
    size_t cols = tv.shape[0];
    Tensor out = Tensor::zeros({n, cols});
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < cols; ++j) out.data[i * cols + j] = tv.data[j];
    return push(std::move(out), {v.id}, [n, cols](Tape& t, int self) {
        Node& nd = t.nodes_[static_cast<size_t>(self)];
        const Tensor& g = nd.grad;
        Tensor& gv = t.grad_buf(nd.parents[0]);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < cols; ++j) gv.data[j] += g.data[i * cols + j];
    }, "repeat_row");
}

Var Tape::concat(Var a, Var b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    if (ta.rank() != 1 || tb.rank() != 1) throw Error("concat: 1-D operands only");
    Tensor out = Tensor::zeros({ta.numel() + tb.numel()});
    std::copy(ta.data.begin(), ta.data.end(), out.data.begin());
    std::copy(tb.data.begin(), tb.data.end(), out.data.begin() + static_cast<long>(ta.numel()));
    size_t na = ta.numel();
    return push(std::move(out), {a.id, b.id}, [na](Tape& t, int self) {
        Node& n = t.nodes_[static_cast<size_t>(self)];
        const Tensor& g = n.grad;
        Tensor& ga = t.grad_buf(n.parents[0]);
        Tensor& gb = t.grad_buf(n.parents[1]);
        for (size_t i = 0; i < na; ++i) ga.data[i] += g.data[i];
        for (size_t i = na; i < g.data.size(); ++i) gb.data[i - na] += g.data[i];
    }, "concat");
}

Var Tape::stack_rows(const std::vector<Var>& rows) {
    if (rows.empty()) throw Error("stack_rows: no rows");
    size_t cols = value(rows[0]).numel();
    std::vector<int> parents;
    parents.reserve(rows.size());
    Tensor out = Tensor::zeros({rows.size(), cols});
    for (size_t r = 0; r < rows.size(); ++r) {
        const Tensor& tr = value(rows[r]);
        if (tr.rank() != 1 || tr.numel() != cols) throw Error("stack_rows: ragged rows");
        std::copy(tr.data.begin(), tr.data.end(), out.data.begin() + static_cast<long>(r * cols));
        parents.push_back(rows[r].id);
    }
    return push(std::move(out), std::move(parents), [cols](Tape& t, int self) {
        Node& n = t.nodes_[static_cast<size_t>(self)];
        const Tensor& g = n.grad;
        for (size_t r = 0; r < n.parents.size(); ++r) {
            Tensor& gr = t.grad_buf(n.parents[r]);
            for (size_t j = 0; j < cols; ++j) gr.data[j] += g.data[r * cols + j];
        }
    }, "stack_rows");
}

Var Tape::gaussian_row_loglik(Var mu, Var logvar, Var y) {
    const Tensor& tm = value(mu);
    const Tensor& tv = value(logvar);
    const Tensor& ty = value(y);
    if (tm.rank() != 2 || !tm.same_shape(tv) || !tm.same_shape(ty))
        throw Error("gaussian_row_loglik: mu/logvar/y must share [N,D]");
    size_t n = tm.rows(), d = tm.cols();
    Tensor out = Tensor::zeros({n});
    for (size_t i = 0; i < n; ++i) {
        double ll = 0.0;
        for (size_t j = 0; j < d; ++j) {
            size_t k = i * d + j;
            double diff = ty.data[k] - tm.data[k];
            ll += -0.5 * (kLog2Pi + tv.data[k]) - 0.5 * diff * diff * std::exp(-tv.data[k]);
        }
        out.data[i] = ll;
    }
    return push(std::move(out), {mu.id, logvar.id, y.id}, [n, d](Tape& t, int self) {
        Node& nd = t.nodes_[static_cast<size_t>(self)];
        const Tensor& g = nd.grad;
        const Tensor& tm = t.nodes_[static_cast<size_t>(nd.parents[0])].value;
        const Tensor& tv = t.nodes_[static_cast<size_t>(nd.parents[1])].value;
        const Tensor& ty = t.nodes_[static_cast<size_t>(nd.parents[2])].value;
        Tensor& gm = t.grad_buf(nd.parents[0]);
        Tensor& gv = t.grad_buf(nd.parents[1]);
        Tensor& gy = t.grad_buf(nd.parents[2]);
        for (size_t i = 0; i < n; ++i) {
            double gi = g.data[i];
            if (gi == 0.0) continue;
            for (size_t j = 0; j < d; ++j) {
                size_t k = i * d + j;
                double diff = ty.data[k] - tm.data[k];
                double inv_var = std::exp(-tv.data[k]);
                gm.data[k] += gi * diff * inv_var;
                gv.data[k] += gi * (-0.5 + 0.5 * diff * diff * inv_var);
                gy.data[k] += gi * (-diff * inv_var);
            }
        }
    }, "gaussian_row_loglik");
}

Var Tape::club_pairwise(Var mu, Var logvar, Var y) {
    const Tensor& tm = value(mu);
    const Tensor& tv = value(logvar);
    const Tensor& ty = value(y);
    if (tm.rank() != 2 || !tm.same_shape(tv) || !tm.same_shape(ty))
        throw Error("club_pairwise: mu/logvar/y must share [N,D]");
    size_t n = tm.rows(), d = tm.cols();
    if (n == 0) throw Error("club_pairwise: empty batch");
    // (1/N^2) sum_i sum_j [ll(i,i) - ll(i,j)], conditioning on row i.
    // Accumulated as sorted symmetric pair differences so that the value is
    // exactly zero for N=1 and for heads that ignore x, and is bit-stable
    // under any permutation of the sample pairs.
    std::vector<double> ll(n * n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (size_t k = 0; k < d; ++k) {
                double diff = ty.data[j * d + k] - tm.data[i * d + k];
                double lv = tv.data[i * d + k];
                acc += -0.5 * (kLog2Pi + lv) - 0.5 * diff * diff * std::exp(-lv);
            }
            ll[i * n + j] = acc;
        }
    std::vector<double> terms;
    terms.reserve(n * (n - 1) / 2);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            terms.push_back((ll[i * n + i] - ll[i * n + j]) + (ll[j * n + j] - ll[j * n + i]));
    std::sort(terms.begin(), terms.end());
    double total = 0.0;
    for (double t : terms) total += t;
    double nn = static_cast<double>(n);
    double est = total / (nn * nn);
    return push(Tensor::scalar(est), {mu.id, logvar.id, y.id}, [n, d](Tape& t, int self) {
        Node& nd = t.nodes_[static_cast<size_t>(self)];
        double g = nd.grad.data[0];
        if (g == 0.0) return;
        const Tensor& tm = t.nodes_[static_cast<size_t>(nd.parents[0])].value;
        const Tensor& tv = t.nodes_[static_cast<size_t>(nd.parents[1])].value;
        const Tensor& ty = t.nodes_[static_cast<size_t>(nd.parents[2])].value;
        Tensor& gm = t.grad_buf(nd.parents[0]);
        Tensor& gv = t.grad_buf(nd.parents[1]);
        Tensor& gy = t.grad_buf(nd.parents[2]);
        double nn = static_cast<double>(n);
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = 0; j < n; ++j) {
                double w = (i == j ? 1.0 / nn : 0.0) - 1.0 / (nn * nn);
                if (w == 0.0) continue;
                double wg = w * g;
                for (size_t k = 0; k < d; ++k) {
                    size_t ki = i * d + k, kj = j * d + k;
                    double diff = ty.data[kj] - tm.data[ki];
                    double inv_var = std::exp(-tv.data[ki]);
                    gm.data[ki] += wg * diff * inv_var;
                    gv.data[ki] += wg * (-0.5 + 0.5 * diff * diff * inv_var);
                    gy.data[kj] += wg * (-diff * inv_var);
                }
            }
        }
    }, "club_pairwise");
}

Var Tape::rank_loss(Var pred, const std::vector<double>& target) {
    const Tensor& tp = value(pred);
    if (tp.rank() != 1 || tp.numel() != target.size())
        throw Error("rank_loss: prediction/target size mismatch");
    size_t b = target.size();
    if (b == 0) throw Error("rank_loss: empty batch");
    double acc = 0.0;
    for (size_t i = 0; i < b; ++i)
        for (size_t j = 0; j < b; ++j) {
            double e = target[i] >= target[j] ? 1.0 : -1.0;
            double term = std::fabs(target[i] - target[j]) - e * (tp.data[i] - tp.data[j]);
            if (term > 0.0) acc += term;
        }
    double inv = 1.0 / (static_cast<double>(b) * static_cast<double>(b));
    return push(Tensor::scalar(acc * inv), {pred.id}, [target, b, inv](Tape& t, int self) {
        Node& nd = t.nodes_[static_cast<size_t>(self)];
        double g = nd.grad.data[0] * inv;
        const Tensor& tp = t.nodes_[static_cast<size_t>(nd.parents[0])].value;
        Tensor& gp = t.grad_buf(nd.parents[0]);
        for (size_t i = 0; i < b; ++i)
            for (size_t j = 0; j < b; ++j) {
                double e = target[i] >= target[j] ? 1.0 : -1.0;
                double term = std::fabs(target[i] - target[j]) - e * (tp.data[i] - tp.data[j]);
                if (term > 0.0) {
                    gp.data[i] -= g * e;
                    gp.data[j] += g * e;
                }
            }
    }, "rank_loss");
}

void Tape::backward(Var loss) {
    if (consumed_) throw Error("backward: tape already consumed");
    const Tensor& lv = value(loss);
    if (lv.numel() != 1)
        throw Error("backward: loss must be scalar, got " + shape_str(lv.shape));
    consumed_ = true;
    for (Node& n : nodes_) n.grad = Tensor::zeros(n.value.shape);
    nodes_[static_cast<size_t>(loss.id)].grad.data[0] = 1.0;
    for (size_t i = nodes_.size(); i-- > 0;) {
        Node& n = nodes_[i];
        if (n.back) n.back(*this, static_cast<int>(i));
    }
    for (Node& n : nodes_) {
        if (!n.ps) continue;
        Tensor& acc = n.ps->grad(n.pname);
        ensure_finite(n.grad, "backward gradient");
        for (size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += n.grad.data[i];
    }
}

}  // namespace pcqd
