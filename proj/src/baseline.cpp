// SPDX-License-Identifier: Apache-2.0
#include "qmce/baseline.hpp"

#include <cmath>
#include <numbers>

#include "qmce/errors.hpp"
#include "qmce/rng.hpp"

namespace qmce {

namespace {

constexpr double kPi = std::numbers::pi;

enum : std::uint64_t { kPreStream = 101, kHeadStream = 102, kChipStream0 = 128 };

void check_obs(const ClassicalBaseline& model, Eigen::Index rows) {
    if (rows != model.input_dim)
        throw ContractError("observation dimension mismatch: expected " +
                            std::to_string(model.input_dim) + ", got " +
                            std::to_string(rows));
}

} // namespace

ClassicalBaseline build_classical_baseline(int input_dim, int num_actions,
                                           int k, int l, int num_layers,
                                           std::uint64_t seed) {
    if (input_dim < 1) throw ContractError("input dimension must be positive");
    if (num_actions < 1) throw ContractError("need at least one action");
    if (k < 1 || l < 1) throw ContractError("need k, l >= 1");
    if (l < (1 << num_layers))
        throw ContractError("need l >= 2^num_layers to halve " +
                            std::to_string(num_layers) + " times");

    ClassicalBaseline model;
    model.input_dim = input_dim;
    model.num_actions = num_actions;
    model.k = k;
    model.l = l;
    model.num_layers = num_layers;
    model.seed = seed;

    Rng pre_rng(Rng::derive(seed, kPreStream));
    model.pre = make_dense_layer(input_dim, k * l, Activation::Linear, pre_rng);

    for (int i = 0; i < k; ++i) {
        Rng chip_rng(Rng::derive(seed, kChipStream0 + static_cast<std::uint64_t>(i)));
        DenseNet chip;
        int width = l;
        for (int layer = 0; layer < num_layers; ++layer) {
            chip.layers.push_back(
                make_dense_layer(width, width / 2, Activation::Tanh, chip_rng));
            width /= 2;
        }
        chip.layers.push_back(
            make_dense_layer(width, 1, Activation::Tanh, chip_rng));
        model.pseudo_chips.push_back(std::move(chip));
    }

    Rng head_rng(Rng::derive(seed, kHeadStream));
    const int hidden = std::max(k, 8);
    model.head.layers.push_back(
        make_dense_layer(k, hidden, Activation::Relu, head_rng));
    model.head.layers.push_back(
        make_dense_layer(hidden, num_actions, Activation::Linear, head_rng));
    return model;
}

long baseline_parameter_count(const ClassicalBaseline& model) {
    auto count_layer = [](const DenseLayer& layer) {
        return static_cast<long>(layer.weights.size()) + layer.bias.size();
    };
    long total = count_layer(model.pre);
    for (const auto& chip : model.pseudo_chips)
        for (const auto& layer : chip.layers) total += count_layer(layer);
    for (const auto& layer : model.head.layers) total += count_layer(layer);
    return total;
}

Eigen::VectorXd baseline_forward(const ClassicalBaseline& model,
                                 const Eigen::Ref<const Eigen::VectorXd>& observation) {
    return baseline_forward_batch(model, observation).col(0);
}

Eigen::MatrixXd baseline_forward_batch(const ClassicalBaseline& model,
                                       const Eigen::Ref<const Eigen::MatrixXd>& observations) {
    check_obs(model, observations.rows());
    const Eigen::Index batch = observations.cols();
    const Eigen::MatrixXd features =
        kPi * dense_preactivation(model.pre, observations).array().tanh().matrix();
    Eigen::MatrixXd outputs(model.k, batch);
    for (int i = 0; i < model.k; ++i)
        outputs.row(i) = model.pseudo_chips[i]
                             .forward_batch(features.middleRows(
                                 static_cast<Eigen::Index>(i) * model.l, model.l))
                             .row(0);
    return model.head.forward_batch(outputs);
}

void baseline_zero_grad(ClassicalBaseline& model) {
    model.pre.zero_grad();
    for (auto& chip : model.pseudo_chips) chip.zero_grad();
    model.head.zero_grad();
}

void baseline_backward_batch(ClassicalBaseline& model,
                             const Eigen::Ref<const Eigen::MatrixXd>& observations,
                             const Eigen::Ref<const Eigen::MatrixXd>& dloss_dq) {
    check_obs(model, observations.rows());
    const Eigen::Index batch = observations.cols();
    if (dloss_dq.rows() != model.num_actions || dloss_dq.cols() != batch)
        throw ContractError("dloss_dq must be num_actions x batch");

    const Eigen::MatrixXd pre_z = dense_preactivation(model.pre, observations);
    const Eigen::MatrixXd features = kPi * pre_z.array().tanh().matrix();

    std::vector<DenseNetTrace> chip_traces;
    chip_traces.reserve(model.k);
    Eigen::MatrixXd outputs(model.k, batch);
    for (int i = 0; i < model.k; ++i) {
        chip_traces.push_back(dense_net_forward_traced(
            model.pseudo_chips[i],
            features.middleRows(static_cast<Eigen::Index>(i) * model.l, model.l)));
        outputs.row(i) = chip_traces.back().output.row(0);
    }

    const DenseNetTrace head_trace = dense_net_forward_traced(model.head, outputs);
    const Eigen::MatrixXd d_outputs =
        dense_net_backward(model.head, head_trace, dloss_dq);

    Eigen::MatrixXd d_features(model.k * model.l, batch);
    for (int i = 0; i < model.k; ++i) {
        const Eigen::MatrixXd d_chip_out = d_outputs.row(i);
        d_features.middleRows(static_cast<Eigen::Index>(i) * model.l, model.l) =
            dense_net_backward(model.pseudo_chips[i], chip_traces[i], d_chip_out);
    }

    const Eigen::MatrixXd d_pre_z =
        (d_features.array() * kPi * (1.0 - pre_z.array().tanh().square())).matrix();
    model.pre.grad_weights.noalias() += d_pre_z * observations.transpose();
    model.pre.grad_bias.noalias() += d_pre_z.rowwise().sum();
}

} // namespace qmce
