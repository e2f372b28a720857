// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "qmce/density_matrix.hpp"
#include "qmce/ensemble.hpp"
#include "qmce/errors.hpp"
#include "qmce/qfunction.hpp"
#include "qmce/rng.hpp"

using namespace qmce;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd random_obs(int dim, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.uniform(lo, hi);
    return v;
}

// Brute-force chip evaluation: compose the full dense unitary of the whole
// gate list (including final gates) and take the Z-string expectation
// explicitly. Completely bypasses the statevector kernels' pair updates.
double dense_matrix_chip_forward(const CircuitSpec& spec,
                                 std::span<const double> params,
                                 std::span<const double> features) {
    const int n = spec.num_qubits;
    const Eigen::Index dim = Eigen::Index{1} << n;
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
    auto values = [&params](const Gate& g) {
        std::vector<double> v(g.param_count());
        for (int i = 0; i < g.param_count(); ++i) v[i] = params[g.param_slots[i]];
        return v;
    };
    for (const auto& layer : spec.layer_gates)
        for (const Gate& g : layer) u = gate_unitary(g, values(g), n) * u;
    for (const Gate& g : spec.final_gates)
        u = gate_unitary(g, values(g), n) * u;

    const StateVector embedded = embed(features, n);
    Eigen::VectorXcd psi(dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        psi[i] = embedded.amplitudes()[static_cast<std::size_t>(i)];
    psi = u * psi;

    std::size_t mask = 0;
    for (int q : spec.measurement) mask |= std::size_t{1} << (n - 1 - q);
    double value = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
        const double p = std::norm(psi[i]);
        value += (std::popcount(static_cast<std::size_t>(i) & mask) & 1) ? -p : p;
    }
    return value;
}

} // namespace

TEST_CASE("partition slices features contiguously") {
    const std::vector<double> two = {1.5, -2.5};
    const auto s2 = partition(two, 2, 1);
    REQUIRE(s2.size() == 2);
    CHECK(s2[0][0] == 1.5);
    CHECK(s2[1][0] == -2.5);

    const auto s1 = partition(two, 1, 2);
    REQUIRE(s1.size() == 1);
    CHECK(s1[0][1] == -2.5);

    std::vector<double> wide(800);
    for (int i = 0; i < 800; ++i) wide[i] = i;
    const auto s100 = partition(wide, 100, 8);
    REQUIRE(s100.size() == 100);
    CHECK(s100[99][0] == 792.0);
    CHECK(s100[42][7] == 42 * 8 + 7);

    CHECK_THROWS_AS(partition(two, 2, 2), ContractError);
}

TEST_CASE("identity head turns the ensemble into per-chip cosines") {
    // k=2 single-qubit chips with zeroed circuit parameters compute
    // cos(angle); an identity pre-layer plus identity head exposes them.
    EnsembleModel model = make_ensemble_model(2, 2, 2, 1, 0, 123);
    model.pre.weights = Eigen::MatrixXd::Identity(2, 2);
    model.pre.bias.setZero();
    for (auto& chip : model.chip_params)
        std::fill(chip.begin(), chip.end(), 0.0);
    model.head.layers.clear();
    Rng rng(9);
    DenseLayer identity = make_dense_layer(2, 2, Activation::Linear, rng);
    identity.weights = Eigen::MatrixXd::Identity(2, 2);
    identity.bias.setZero();
    model.head.layers.push_back(identity);

    for (double x1 : {0.2, -1.1}) {
        for (double x2 : {0.0, 2.0}) {
            // Choose observations so the squash lands exactly on (x1, x2).
            Eigen::VectorXd obs(2);
            obs << std::atanh(x1 / kPi), std::atanh(x2 / kPi);
            const Eigen::VectorXd q = ensemble_forward(model, obs);
            CHECK(q[0] == doctest::Approx(std::cos(x1)).epsilon(1e-10));
            CHECK(q[1] == doctest::Approx(std::cos(x2)).epsilon(1e-10));
        }
    }
}

TEST_CASE("k=1 ensemble equals the manual single-chip pipeline") {
    const EnsembleModel model = make_ensemble_model(6, 2, 1, 4, 1, 321);
    Rng rng(10);
    const Eigen::VectorXd obs = random_obs(6, rng);
    const Eigen::VectorXd q = ensemble_forward(model, obs);

    // Manual composition of the same pieces.
    const Eigen::VectorXd z = model.pre.weights * obs + model.pre.bias;
    const Eigen::VectorXd angles = kPi * z.array().tanh().matrix();
    const double e = qcnn_forward(model.chip_spec, model.chip_params[0],
                                  std::span<const double>(angles.data(), 4));
    Eigen::VectorXd ev(1);
    ev << e;
    const Eigen::VectorXd manual = model.head.forward(ev);
    CHECK((q - manual).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("ensemble forward equals the dense-matrix brute-force oracle") {
    Rng rng(11);
    const EnsembleModel model = make_ensemble_model(5, 2, 2, 2, 1, 99);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::VectorXd obs = random_obs(5, rng);
        const Eigen::VectorXd z = model.pre.weights * obs + model.pre.bias;
        const Eigen::VectorXd angles = kPi * z.array().tanh().matrix();
        Eigen::VectorXd outputs(2);
        for (int i = 0; i < 2; ++i)
            outputs[i] = dense_matrix_chip_forward(
                model.chip_spec, model.chip_params[i],
                std::span<const double>(angles.data() + 2 * i, 2));
        const Eigen::VectorXd expect = model.head.forward(outputs);
        const Eigen::VectorXd got = ensemble_forward(model, obs);
        CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("chip independence: perturbing chip i leaves chip j alone") {
    Rng rng(12);
    EnsembleModel model = make_ensemble_model(8, 2, 3, 2, 1, 7);
    const Eigen::VectorXd obs = random_obs(8, rng);
    const Eigen::VectorXd before = ensemble_chip_outputs(model, obs);
    model.chip_params[1][3] += 0.7;
    const Eigen::VectorXd after = ensemble_chip_outputs(model, obs);
    CHECK(before[0] == after[0]);
    CHECK(before[2] == after[2]);
    CHECK(before[1] != after[1]);
}

TEST_CASE("dimension law: wrong observation size is rejected") {
    const EnsembleModel model = make_ensemble_model(10, 2, 2, 2, 1, 1);
    Eigen::VectorXd wrong(9);
    wrong.setZero();
    CHECK_THROWS_AS(ensemble_forward(model, wrong), ContractError);
}

TEST_CASE("zero dloss_dq yields all-zero gradients") {
    EnsembleModel model = make_ensemble_model(4, 2, 2, 2, 1, 3);
    Rng rng(13);
    const Eigen::MatrixXd obs = random_obs(4, rng);
    ensemble_zero_grad(model);
    ensemble_backward_batch(model, obs, Eigen::MatrixXd::Zero(2, 1));
    CHECK(model.pre.grad_weights.cwiseAbs().maxCoeff() == 0.0);
    for (const auto& g : model.chip_grads)
        for (double v : g) CHECK(v == 0.0);
    for (const auto& layer : model.head.layers)
        CHECK(layer.grad_weights.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("head column cut isolates exactly that chip's gradient") {
    EnsembleModel model = make_ensemble_model(4, 2, 2, 1, 0, 17);
    // Single linear head layer whose second column is zero: chip 1 cannot
    // influence the loss, chip 0 can.
    model.head.layers.resize(1);
    model.head.layers[0].in_dim = 2;
    model.head.layers[0].out_dim = 2;
    model.head.layers[0].activation = Activation::Linear;
    model.head.layers[0].weights.resize(2, 2);
    model.head.layers[0].weights << 1.0, 0.0, 0.5, 0.0;
    model.head.layers[0].bias = Eigen::VectorXd::Zero(2);
    model.head.layers[0].grad_weights = Eigen::MatrixXd::Zero(2, 2);
    model.head.layers[0].grad_bias = Eigen::VectorXd::Zero(2);

    Rng rng(14);
    const Eigen::MatrixXd obs = random_obs(4, rng);
    Eigen::MatrixXd d_q(2, 1);
    d_q << 1.0, -0.5;
    ensemble_zero_grad(model);
    ensemble_backward_batch(model, obs, d_q);

    double chip0 = 0.0, chip1 = 0.0;
    for (double v : model.chip_grads[0]) chip0 += std::abs(v);
    for (double v : model.chip_grads[1]) chip1 += std::abs(v);
    CHECK(chip1 == 0.0);
    CHECK(chip0 > 1e-9);
}

TEST_CASE("loss-chain linearity: scaling the head scales chip gradients") {
    EnsembleModel model = make_ensemble_model(4, 1, 1, 2, 1, 23);
    model.head.layers.resize(1);
    Rng rng(15);
    model.head.layers[0] = make_dense_layer(1, 1, Activation::Linear, rng);
    model.head.layers[0].bias.setZero();
    const Eigen::MatrixXd obs = random_obs(4, rng);
    const Eigen::MatrixXd d_q = Eigen::MatrixXd::Ones(1, 1);

    model.head.layers[0].weights(0, 0) = 1.0;
    ensemble_zero_grad(model);
    ensemble_backward_batch(model, obs, d_q);
    const std::vector<double> base = model.chip_grads[0];

    const double c = -2.5;
    model.head.layers[0].weights(0, 0) = c;
    ensemble_zero_grad(model);
    ensemble_backward_batch(model, obs, d_q);
    for (std::size_t i = 0; i < base.size(); ++i)
        CHECK(model.chip_grads[0][i] == doctest::Approx(c * base[i]).epsilon(1e-10));
}

TEST_CASE("assembled gradients match end-to-end finite differences") {
    Rng rng(16);
    for (const auto& [k, l] : std::vector<std::pair<int, int>>{
             {1, 1}, {1, 2}, {2, 1}, {2, 2}}) {
        const int layers = l >= 2 ? 1 : 0;
        EnsembleModel model = make_ensemble_model(3, 2, k, l, layers, 1000 + k * 10 + l);
        Eigen::MatrixXd obs(3, 2);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 2; ++c) obs(r, c) = rng.uniform(-1.0, 1.0);
        Eigen::MatrixXd d_q(2, 2);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) d_q(r, c) = rng.uniform(-1.0, 1.0);

        auto loss = [&] {
            return (ensemble_forward_batch(model, obs).array() * d_q.array()).sum();
        };
        ensemble_zero_grad(model);
        ensemble_backward_batch(model, obs, d_q);

        const double h = 1e-5;
        auto probe = [&](double& w, double analytic) {
            const double saved = w;
            w = saved + h;
            const double up = loss();
            w = saved - h;
            const double down = loss();
            w = saved;
            CHECK(std::abs((up - down) / (2 * h) - analytic) < 1e-5);
        };
        for (int r = 0; r < model.pre.weights.rows(); ++r)
            for (int c = 0; c < model.pre.weights.cols(); ++c)
                probe(model.pre.weights(r, c), model.pre.grad_weights(r, c));
        for (int r = 0; r < model.pre.bias.size(); ++r)
            probe(model.pre.bias[r], model.pre.grad_bias[r]);
        for (int i = 0; i < k; ++i)
            for (std::size_t p = 0; p < model.chip_params[i].size(); ++p)
                probe(model.chip_params[i][p], model.chip_grads[i][p]);
        for (auto& layer : model.head.layers) {
            for (int r = 0; r < layer.weights.rows(); ++r)
                for (int c = 0; c < layer.weights.cols(); ++c)
                    probe(layer.weights(r, c), layer.grad_weights(r, c));
            for (int r = 0; r < layer.bias.size(); ++r)
                probe(layer.bias[r], layer.grad_bias[r]);
        }
    }
}

TEST_CASE("checkpoint round trip is bit-exact") {
    EnsembleQFunction original(7, 2, 2, 2, 1, 44);
    std::ostringstream first;
    original.save(first);
    std::istringstream in(first.str());
    auto loaded = load_qfunction(in);
    REQUIRE(loaded != nullptr);
    std::ostringstream second;
    loaded->save(second);
    CHECK(first.str() == second.str());
    CHECK(original.flat_weights() == loaded->flat_weights());

    Rng rng(18);
    const Eigen::VectorXd obs = random_obs(7, rng);
    CHECK((original.forward(obs) - loaded->forward(obs)).cwiseAbs().maxCoeff() == 0.0);

    ClassicalQFunction cls(7, 2, 2, 4, 2, 45);
    std::ostringstream cfirst;
    cls.save(cfirst);
    std::istringstream cin(cfirst.str());
    auto cloaded = load_qfunction(cin);
    std::ostringstream csecond;
    cloaded->save(csecond);
    CHECK(cfirst.str() == csecond.str());
    CHECK((cls.forward(obs) - cloaded->forward(obs)).cwiseAbs().maxCoeff() == 0.0);
}
