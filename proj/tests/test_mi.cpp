#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pcqd/common.hpp"
#include "pcqd/mi.hpp"
#include "testutil.hpp"

using namespace pcqd;

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

// Tiny network with hand-set weights: relu backbone [1,1] passes x through
// for x >= 0, mean head mu(x) = slope*x + bias, log-variance = lv_bias.
VariationalNetwork fixed_net_1d(double mu_slope, double mu_bias, double lv_bias) {
    VariationalNetwork net = make_variational_network(1, {1}, 0);
    net.params.value("bb.0.w").data[0] = 1.0;
    net.params.value("bb.0.b").data[0] = 0.0;
    net.params.value("mu.0.w").data[0] = mu_slope;
    net.params.value("mu.0.b").data[0] = mu_bias;
    net.params.value("lv.0.w").data[0] = 0.0;
    net.params.value("lv.0.b").data[0] = lv_bias;
    return net;
}

}  // namespace

TEST_CASE("log density at the mean with unit variance") {
    VariationalNetwork net = fixed_net_1d(0.0, 0.7, 0.0);
    CHECK(log_likelihood(net, {0.3}, {0.7}) == doctest::Approx(-kHalfLog2Pi).epsilon(1e-12));
}

TEST_CASE("log density one sigma away") {
    VariationalNetwork net = fixed_net_1d(0.0, 0.0, 0.0);
    CHECK(log_likelihood(net, {0.0}, {1.0}) ==
          doctest::Approx(-kHalfLog2Pi - 0.5).epsilon(1e-12));
}

TEST_CASE("diagonal 2-D density factorizes into 1-D terms") {
    VariationalNetwork net = make_variational_network(2, {4}, 3);
    std::vector<double> x{0.2, -0.4};
    std::vector<double> y{1.0, 0.3};
    double joint = log_likelihood(net, x, y);

    // Evaluate the heads once and re-sum the per-coordinate densities.
    Tape tape;
    Var vx = tape.input(Tensor({1, 2}, x));
    GaussianHeads heads = variational_heads(tape, net, vx, false);
    double acc = 0.0;
    for (size_t d = 0; d < 2; ++d) {
        double mu = tape.value(heads.mu).data[d];
        double lv = tape.value(heads.logvar).data[d];
        acc += -0.5 * std::log(2.0 * M_PI) - 0.5 * lv -
               (y[d] - mu) * (y[d] - mu) / (2.0 * std::exp(lv));
    }
    CHECK(joint == doctest::Approx(acc).epsilon(1e-12));
}

TEST_CASE("log_likelihood rejects dimension mismatch") {
    VariationalNetwork net = make_variational_network(2, {4}, 3);
    CHECK_THROWS_AS(log_likelihood(net, {0.1}, {0.2, 0.3}), Error);
}

TEST_CASE("nll: mean-centred single pair and averaging") {
    VariationalNetwork net = fixed_net_1d(0.0, 0.7, 0.0);
    RepresentationBatch one(Tensor({1, 1}, {0.3}), Tensor({1, 1}, {0.7}));
    CHECK(nll_loss(net, one) == doctest::Approx(kHalfLog2Pi).epsilon(1e-12));

    RepresentationBatch two(Tensor({2, 1}, {0.3, 0.3}), Tensor({2, 1}, {0.7, 0.7}));
    CHECK(nll_loss(net, two) == doctest::Approx(nll_loss(net, one)).epsilon(1e-15));
}

TEST_CASE("nll on a seeded batch matches element-wise recomputation") {
    VariationalNetwork net = make_variational_network(3, {8}, 21);
    Rng rng(5);
    RepresentationBatch batch = sample_gaussian_pairs(0.4, 3, 6, rng);
    double expected = 0.0;
    for (size_t i = 0; i < batch.n(); ++i) {
        std::vector<double> xi(3), yi(3);
        for (size_t d = 0; d < 3; ++d) {
            xi[d] = batch.x.at(i, d);
            yi[d] = batch.y.at(i, d);
        }
        expected -= log_likelihood(net, xi, yi);
    }
    expected /= static_cast<double>(batch.n());
    CHECK(nll_loss(net, batch) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("estimate is exactly zero for a single pair") {
    VariationalNetwork net = make_variational_network(2, {8}, 9);
    RepresentationBatch one(Tensor({1, 2}, {0.1, 0.2}), Tensor({1, 2}, {0.5, -0.3}));
    CHECK(estimate_mi(net, one).value == 0.0);
}

TEST_CASE("estimate is exactly zero when the head ignores x") {
    VariationalNetwork net = make_variational_network(1, {4}, 17);
    // Zero every weight: mu and logvar become input-independent biases.
    for (const std::string& name : net.params.names())
        for (double& v : net.params.value(name).data) v = 0.0;
    net.params.value("mu.0.b").data[0] = 0.4;
    net.params.value("lv.0.b").data[0] = -1.0;
    Rng rng(6);
    RepresentationBatch batch = sample_gaussian_pairs(0.7, 1, 32, rng);
    CHECK(estimate_mi(net, batch).value == 0.0);
}

TEST_CASE("hand-computed estimate with identity mean: pairs (0,0) and (1,1)") {
    VariationalNetwork net = fixed_net_1d(1.0, 0.0, 0.0);
    RepresentationBatch batch(Tensor({2, 1}, {0.0, 1.0}), Tensor({2, 1}, {0.0, 1.0}));
    MiEstimate est = estimate_mi(net, batch);
    // Four log densities: ll(0,0)=ll(1,1)=-.5*ln(2pi); the cross terms sit
    // half a nat lower. (1/4)*(0.5 + 0.5) = 0.25.
    CHECK(est.value == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(est.n == 2);
}

TEST_CASE("estimate is invariant under adding a constant to all log densities") {
    VariationalNetwork net = make_variational_network(1, {8}, 33);
    Rng rng(8);
    RepresentationBatch batch = sample_gaussian_pairs(0.6, 1, 16, rng);
    double est = estimate_mi(net, batch).value;

    // Rebuild the double sum from individually evaluated densities, shifted
    // by several constants; the shift must cancel exactly.
    size_t n = batch.n();
    std::vector<double> ll(n * n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            ll[i * n + j] = log_likelihood(net, {batch.x.at(i, 0)}, {batch.y.at(j, 0)});
    for (double shift : {0.0, 5.0, -250.0}) {
        double diag = 0.0, all = 0.0;
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) {
                all += ll[i * n + j] + shift;
                if (i == j) diag += ll[i * n + j] + shift;
            }
        double rebuilt = diag / static_cast<double>(n) -
                         all / (static_cast<double>(n) * static_cast<double>(n));
        CHECK(rebuilt == doctest::Approx(est).epsilon(1e-9));
    }
}

TEST_CASE("estimate is bit-identical under pair permutation") {
    VariationalNetwork net = make_variational_network(2, {16}, 12);
    Rng rng(10);
    RepresentationBatch batch = sample_gaussian_pairs(0.5, 2, 24, rng);
    double est = estimate_mi(net, batch).value;

    std::vector<size_t> perm(batch.n());
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    Rng shuffler(3);
    shuffler.shuffle(perm);
    Tensor px = Tensor::zeros(batch.x.shape), py = Tensor::zeros(batch.y.shape);
    for (size_t i = 0; i < perm.size(); ++i)
        for (size_t d = 0; d < batch.dim(); ++d) {
            px.at(i, d) = batch.x.at(perm[i], d);
            py.at(i, d) = batch.y.at(perm[i], d);
        }
    RepresentationBatch shuffled(px, py);
    CHECK(estimate_mi(net, shuffled).value == est);
}

TEST_CASE("estimate gradient w.r.t. x and y matches finite differences") {
    VariationalNetwork net = make_variational_network(2, {8}, 25);
    Rng rng(14);
    RepresentationBatch batch = sample_gaussian_pairs(0.5, 2, 5, rng);
    ParameterSet inputs;
    inputs.add("x", batch.x);
    inputs.add("y", batch.y);

    auto value = [&]() {
        Tape tape;
        Var x = tape.input(inputs.value("x"));
        Var y = tape.input(inputs.value("y"));
        return tape.value(estimate_mi_var(tape, net, x, y, false)).data[0];
    };
    auto grad = [&]() {
        Tape tape;
        Var x = tape.param(inputs, "x");
        Var y = tape.param(inputs, "y");
        tape.backward(estimate_mi_var(tape, net, x, y, false));
    };
    CHECK(testutil::max_grad_rel_error(inputs, value, grad, 10) < 1e-4);

    inputs.zero_grads();
    grad();
    double norm = 0.0;
    for (double g : inputs.grad("y").data) norm += g * g;
    CHECK(norm > 0.0);
}

TEST_CASE("estimator training drives nll toward the conditional entropy floor") {
    double sigma = 0.5;
    double entropy = 0.5 * std::log(2.0 * M_PI * M_E * sigma * sigma);
    Rng rng(42);
    auto fresh = [&](size_t n) {
        Tensor x = Tensor::zeros({n, 1}), y = Tensor::zeros({n, 1});
        for (size_t i = 0; i < n; ++i) {
            x.data[i] = rng.normal();
            y.data[i] = x.data[i] + sigma * rng.normal();
        }
        return RepresentationBatch(std::move(x), std::move(y));
    };
    VariationalNetwork net = make_variational_network(1, {32, 32}, 7);
    AdamState opt;
    opt.lr = 5e-3;
    double first = nll_loss(net, fresh(512));
    for (int step = 0; step < 600; ++step) train_estimator(net, fresh(256), 1, opt);
    double last = nll_loss(net, fresh(512));
    CHECK(last < first);
    // The conditional entropy of the noise is the population floor.
    CHECK(last > entropy - 0.05);
    CHECK(std::fabs(last - entropy) < 0.15);
}

TEST_CASE("zero learning rate leaves the estimator untouched") {
    VariationalNetwork net = make_variational_network(2, {8}, 4);
    uint64_t before = net.params.checksum();
    Rng rng(2);
    RepresentationBatch batch = sample_gaussian_pairs(0.3, 2, 16, rng);
    double nll_before = nll_loss(net, batch);
    AdamState opt;
    opt.lr = 0.0;
    train_estimator(net, batch, 5, opt);
    CHECK(net.params.checksum() == before);
    CHECK(nll_loss(net, batch) == nll_before);
}

TEST_CASE("estimator training is seed-deterministic") {
    auto run = [](uint64_t seed) {
        Rng rng(seed);
        RepresentationBatch batch = sample_gaussian_pairs(0.6, 2, 32, rng);
        VariationalNetwork net = make_variational_network(2, {16}, seed);
        AdamState opt;
        opt.lr = 1e-3;
        train_estimator(net, batch, 50, opt);
        return net.params.checksum();
    };
    CHECK(run(9) == run(9));
}

TEST_CASE("gaussian mi oracle closed forms") {
    CHECK(gaussian_mi_oracle(0.0, 1) == 0.0);
    CHECK(gaussian_mi_oracle(0.8, 1) == doctest::Approx(0.51083).epsilon(1e-4));
    CHECK(gaussian_mi_oracle(0.5, 1) == doctest::Approx(0.14384).epsilon(1e-4));
    CHECK(gaussian_mi_oracle(0.8, 3) == doctest::Approx(3 * gaussian_mi_oracle(0.8, 1)));
    CHECK_THROWS_AS(gaussian_mi_oracle(1.0, 1), Error);
    CHECK_THROWS_AS(gaussian_mi_oracle(-1.2, 1), Error);
    CHECK_THROWS_AS(gaussian_mi_oracle(0.5, 0), Error);
}

namespace {

double bivariate_gaussian(double x, double y, double rho) {
    double s2 = 1.0 - rho * rho;
    return std::exp(-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * s2)) /
           (2.0 * M_PI * std::sqrt(s2));
}

}  // namespace

TEST_CASE("numeric oracle: product density has nearly zero mi") {
    Grid2d grid{-5, 5, -5, 5, 200, 200};
    double mi = numeric_mi_oracle([](double x, double y) { return bivariate_gaussian(x, y, 0.0); },
                                  grid);
    CHECK(std::fabs(mi) < 1e-5);
}

TEST_CASE("numeric oracle agrees with the closed form at rho 0.8") {
    Grid2d grid{-5, 5, -5, 5, 400, 400};
    double mi = numeric_mi_oracle([](double x, double y) { return bivariate_gaussian(x, y, 0.8); },
                                  grid);
    CHECK(std::fabs(mi - gaussian_mi_oracle(0.8, 1)) < 0.005);
}

TEST_CASE("numeric oracle grows monotonically as the copy ridge narrows") {
    auto ridge = [](double width) {
        return [width](double x, double y) {
            double px = std::exp(-x * x / 2.0) / std::sqrt(2.0 * M_PI);
            double py = std::exp(-(y - x) * (y - x) / (2.0 * width * width)) /
                        (std::sqrt(2.0 * M_PI) * width);
            return px * py;
        };
    };
    Grid2d grid{-6, 6, -6, 6, 600, 600};
    double prev = -1.0;
    for (double width : {0.5, 0.25, 0.125}) {
        double mi = numeric_mi_oracle(ridge(width), grid);
        CHECK(mi > prev);
        prev = mi;
    }
}

TEST_CASE("numeric oracle rejects grids that do not hold the mass") {
    Grid2d grid{-1, 1, -1, 1, 100, 100};
    CHECK_THROWS_AS(
        numeric_mi_oracle([](double x, double y) { return bivariate_gaussian(x, y, 0.0); }, grid),
        Error);
}

TEST_CASE("trained estimator respects the upper-bound side at rho 0.8") {
    // Desk-scale version of the acceptance protocol: fresh batches per step.
    double rho = 0.8;
    VariationalNetwork net = make_variational_network(1, {64, 64}, 19);
    AdamState opt;
    opt.lr = 2e-3;
    Rng rng(77);
    for (int step = 0; step < 400; ++step) {
        RepresentationBatch b = sample_gaussian_pairs(rho, 1, 256, rng);
        train_estimator(net, b, 1, opt);
    }
    double mean = 0.0, sq = 0.0;
    int reps = 20;
    std::vector<double> vals;
    for (int r = 0; r < reps; ++r) {
        RepresentationBatch b = sample_gaussian_pairs(rho, 1, 512, rng);
        vals.push_back(estimate_mi(net, b).value);
    }
    for (double v : vals) mean += v;
    mean /= reps;
    for (double v : vals) sq += (v - mean) * (v - mean);
    double se = std::sqrt(sq / (reps - 1)) / std::sqrt(static_cast<double>(reps));
    CHECK(mean >= gaussian_mi_oracle(rho, 1) - 2.0 * se);
}
