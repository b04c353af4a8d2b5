#include "pcqd/mi.hpp"

#include <cmath>

#include "pcqd/adam.hpp"
#include "pcqd/common.hpp"

namespace pcqd {

RepresentationBatch::RepresentationBatch(Tensor x_, Tensor y_) : x(std::move(x_)), y(std::move(y_)) {
    if (x.rank() != 2 || y.rank() != 2 || !x.same_shape(y))
        throw Error("representation batch: x and y must share [N,D], got " + shape_str(x.shape) +
                    " and " + shape_str(y.shape));
    if (x.rows() == 0) throw Error("representation batch: empty");
    ensure_finite(x, "representation batch x");
    ensure_finite(y, "representation batch y");
}

VariationalNetwork make_variational_network(size_t dim, std::vector<size_t> hidden,
                                            uint64_t seed) {
    if (dim == 0) throw Error("variational network: dim must be positive");
    if (hidden.empty()) hidden = {128, 128};
    VariationalNetwork net;
    net.dim = dim;
    net.backbone.widths.push_back(dim);
    for (size_t h : hidden) net.backbone.widths.push_back(h);
    net.mean_head.widths = {hidden.back(), dim};
    net.logvar_head.widths = {hidden.back(), dim};
    Rng rng(mix_seed({seed, hash_str("variational")}));
    mlp_init(net.backbone, net.params, "bb.", rng);
    mlp_init(net.mean_head, net.params, "mu.", rng);
    mlp_init(net.logvar_head, net.params, "lv.", rng);
    return net;
}

GaussianHeads variational_heads(Tape& tape, VariationalNetwork& net, Var x, bool trainable) {
    const Tensor& tx = tape.value(x);
    if (tx.rank() != 2 || tx.cols() != net.dim)
        throw Error("variational heads: expected [N," + std::to_string(net.dim) + "], got " +
                    shape_str(tx.shape));
    Var h = tape.relu(mlp_forward(tape, net.backbone, net.params, "bb.", x, trainable));
    Var mu = mlp_forward(tape, net.mean_head, net.params, "mu.", h, trainable);
    Var lv = mlp_forward(tape, net.logvar_head, net.params, "lv.", h, trainable);
    lv = tape.clamp(lv, net.logvar_lo, net.logvar_hi);
    return {mu, lv};
}

double log_likelihood(VariationalNetwork& net, const std::vector<double>& x,
                      const std::vector<double>& y) {
    if (x.size() != net.dim || y.size() != net.dim)
        throw Error("log_likelihood: dimension mismatch");
    Tape tape;
    Var vx = tape.input(Tensor({1, x.size()}, x));
    Var vy = tape.input(Tensor({1, y.size()}, y));
    GaussianHeads heads = variational_heads(tape, net, vx, false);
    Var ll = tape.gaussian_row_loglik(heads.mu, heads.logvar, vy);
    return tape.value(ll).data[0];
}

Var nll_loss_var(Tape& tape, VariationalNetwork& net, Var x, Var y, bool trainable) {
    GaussianHeads heads = variational_heads(tape, net, x, trainable);
    Var ll = tape.gaussian_row_loglik(heads.mu, heads.logvar, y);
    return tape.scale(tape.mean(ll), -1.0);
}

double nll_loss(VariationalNetwork& net, const RepresentationBatch& batch) {
    Tape tape;
    Var x = tape.input(batch.x);
    Var y = tape.input(batch.y);
    return tape.value(nll_loss_var(tape, net, x, y, false)).data[0];
}

Var estimate_mi_var(Tape& tape, VariationalNetwork& net, Var x, Var y, bool trainable_phi) {
    GaussianHeads heads = variational_heads(tape, net, x, trainable_phi);
    return tape.club_pairwise(heads.mu, heads.logvar, y);
}

MiEstimate estimate_mi(VariationalNetwork& net, const RepresentationBatch& batch) {
    Tape tape;
    Var x = tape.input(batch.x);
    Var y = tape.input(batch.y);
    GaussianHeads heads = variational_heads(tape, net, x, false);
    Var est = tape.club_pairwise(heads.mu, heads.logvar, y);
    Var ll = tape.gaussian_row_loglik(heads.mu, heads.logvar, y);
    Var nll = tape.scale(tape.mean(ll), -1.0);
    MiEstimate out;
    out.value = tape.value(est).data[0];
    out.n = batch.n();
    out.nll = tape.value(nll).data[0];
    return out;
}

std::vector<double> train_estimator(VariationalNetwork& net, const RepresentationBatch& batch,
                                    size_t steps, AdamState& opt) {
    if (steps == 0) throw Error("train_estimator: steps must be >= 1");
    std::vector<double> trajectory;
    trajectory.reserve(steps);
    for (size_t s = 0; s < steps; ++s) {
        net.params.zero_grads();
        Tape tape;
        Var x = tape.input(batch.x);
        Var y = tape.input(batch.y);
        Var nll = nll_loss_var(tape, net, x, y, true);
        tape.backward(nll);
        adam_step(net.params, opt);
        trajectory.push_back(nll_loss(net, batch));
    }
    return trajectory;
}

double gaussian_mi_oracle(double rho, size_t d) {
    if (!(std::fabs(rho) < 1.0)) throw Error("gaussian_mi_oracle: |rho| must be < 1");
    if (d == 0) throw Error("gaussian_mi_oracle: d must be >= 1");
    return -0.5 * static_cast<double>(d) * std::log1p(-rho * rho);
}

double numeric_mi_oracle(const std::function<double(double, double)>& joint_density,
                         const Grid2d& grid) {
    if (grid.nx < 2 || grid.ny < 2 || !(grid.x_hi > grid.x_lo) || !(grid.y_hi > grid.y_lo))
        throw Error("numeric_mi_oracle: degenerate grid");
    double dx = (grid.x_hi - grid.x_lo) / static_cast<double>(grid.nx);
    double dy = (grid.y_hi - grid.y_lo) / static_cast<double>(grid.ny);
    std::vector<double> p(grid.nx * grid.ny);
    double mass = 0.0;
    for (size_t i = 0; i < grid.nx; ++i) {
        double x = grid.x_lo + (static_cast<double>(i) + 0.5) * dx;
        for (size_t j = 0; j < grid.ny; ++j) {
            double y = grid.y_lo + (static_cast<double>(j) + 0.5) * dy;
            double d = joint_density(x, y);
            if (!(d >= 0.0) || !std::isfinite(d))
                throw Error("numeric_mi_oracle: density must be finite and non-negative");
            p[i * grid.ny + j] = d * dx * dy;
            mass += d * dx * dy;
        }
    }
    if (std::fabs(mass - 1.0) > 1e-3)
        throw Error("numeric_mi_oracle: grid mass " + std::to_string(mass) +
                    " not within 1e-3 of 1; widen or refine the grid");
    std::vector<double> px(grid.nx, 0.0), py(grid.ny, 0.0);
    for (size_t i = 0; i < grid.nx; ++i)
        for (size_t j = 0; j < grid.ny; ++j) {
            px[i] += p[i * grid.ny + j];
            py[j] += p[i * grid.ny + j];
        }
    double mi = 0.0;
    for (size_t i = 0; i < grid.nx; ++i)
        for (size_t j = 0; j < grid.ny; ++j) {
            double pij = p[i * grid.ny + j];
            if (pij > 0.0 && px[i] > 0.0 && py[j] > 0.0)
                mi += pij * std::log(pij / (px[i] * py[j]));
        }
    return mi;
}

RepresentationBatch sample_gaussian_pairs(double rho, size_t d, size_t n, Rng& rng) {
    if (!(std::fabs(rho) < 1.0)) throw Error("sample_gaussian_pairs: |rho| must be < 1");
    Tensor x = Tensor::zeros({n, d});
    Tensor y = Tensor::zeros({n, d});
    double noise = std::sqrt(1.0 - rho * rho);
    for (size_t i = 0; i < n * d; ++i) {
        x.data[i] = rng.normal();
        y.data[i] = rho * x.data[i] + noise * rng.normal();
    }
    return RepresentationBatch(std::move(x), std::move(y));
}

}  // namespace pcqd
