#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pcqd/adam.hpp"
#include "pcqd/autodiff.hpp"
#include "pcqd/mlp.hpp"
#include "pcqd/params.hpp"
#include "pcqd/rng.hpp"

namespace pcqd {

// Paired representation samples: rows of x and y drawn jointly.
struct RepresentationBatch {
    Tensor x;  // [N, D]
    Tensor y;  // [N, D]

    RepresentationBatch(Tensor x_, Tensor y_);
    size_t n() const { return x.rows(); }
    size_t dim() const { return x.cols(); }
};

// Variational conditional q(y|x): an MLP backbone with linear mean and
// clamped log-variance heads, modelling a diagonal Gaussian over y.
struct VariationalNetwork {
    size_t dim = 0;
    MlpSpec backbone;           // [D, hidden..., H]
    MlpSpec mean_head;          // [H, D]
    MlpSpec logvar_head;        // [H, D]
    ParameterSet params;
    double logvar_lo = -8.0;
    double logvar_hi = 8.0;
};

VariationalNetwork make_variational_network(size_t dim, std::vector<size_t> hidden,
                                            uint64_t seed);

struct GaussianHeads {
    Var mu;      // [N, D]
    Var logvar;  // [N, D], clamped
};

// Runs the heads on a [N, D] batch of x already on the tape.
GaussianHeads variational_heads(Tape& tape, VariationalNetwork& net, Var x, bool trainable);

struct MiEstimate {
    double value = 0.0;  // nats
    size_t n = 0;
    double nll = 0.0;    // training NLL on the same batch at estimation time
};

// log q(y|x) for a single pair, in nats.
double log_likelihood(VariationalNetwork& net, const std::vector<double>& x,
                      const std::vector<double>& y);

// -(1/N) sum_i log q(y_i|x_i).
double nll_loss(VariationalNetwork& net, const RepresentationBatch& batch);
Var nll_loss_var(Tape& tape, VariationalNetwork& net, Var x, Var y, bool trainable);

// Sample-based log-ratio MI estimate over all N^2 pairs, diagonal included.
MiEstimate estimate_mi(VariationalNetwork& net, const RepresentationBatch& batch);
Var estimate_mi_var(Tape& tape, VariationalNetwork& net, Var x, Var y, bool trainable_phi);

// `steps` Adam updates of the variational parameters on a fixed batch.
// Returns the NLL after each step.
std::vector<double> train_estimator(VariationalNetwork& net, const RepresentationBatch& batch,
                                    size_t steps, AdamState& opt);

// Exact MI of d independent bivariate-Gaussian coordinate pairs.
double gaussian_mi_oracle(double rho, size_t d);

// Midpoint-rule discretization of the MI integral for a 2-D joint density.
struct Grid2d {
    double x_lo, x_hi, y_lo, y_hi;
    size_t nx, ny;
};
double numeric_mi_oracle(const std::function<double(double, double)>& joint_density,
                         const Grid2d& grid);

// y = rho * x + sqrt(1-rho^2) * eps with standard normal coordinates.
RepresentationBatch sample_gaussian_pairs(double rho, size_t d, size_t n, Rng& rng);

}  // namespace pcqd
